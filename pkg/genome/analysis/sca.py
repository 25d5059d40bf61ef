"""
Software composition analysis: component analysis, clone detection,
dependency analysis and advisory matching over one target, in one report.
"""

import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Set, Tuple, Union

from genome.analysis.advisory import load_advisories, match_dependencies, match_genes, portrait_score
from genome.analysis.clone import align_to_index, detect_clones
from genome.analysis.depgraph import load_manifest, load_registry, lineage_paths, resolve
from genome.analysis.extract import fingerprint
from genome.analysis.genepool import split_component
from genome.analysis.profiles import get_profile
from genome.core.config import GlobalConfig
from genome.core.errors import GenomeError, StageError
from genome.db.corpus_store import load_corpus
from genome.db.index_store import load_pool
from genome.schemas.advisory import AdvisoryDb, Finding
from genome.schemas.corpus import Corpus
from genome.schemas.deps import Manifest, RegistrySnapshot, Version
from genome.schemas.gene import GenePool
from genome.schemas.report import ComponentMatch, MatchedGene, ReportMeta, ScaReport

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Component analysis
# ---------------------------------------------------------------------------


def _version_key(version: str) -> Tuple:
    try:
        return (1, Version.parse(version).to_semver(), version)
    except ValueError:
        return (0, version)


def _likelihood(genes: Set[str], matched: Set[str], values: Dict[str, float]) -> float:
    total = sum(values[fp] for fp in genes)
    if total <= 0:
        # every gene floored to 0: fall back to the plain match ratio
        return len(genes & matched) / len(genes) if genes else 0.0
    return sum(values[fp] for fp in genes & matched) / total


def component_analysis(target: Corpus, pool: GenePool, theta_comp: float = 0.1) -> List[ComponentMatch]:
    """
    Value-weighted share of each component's genes found in the target.

    A repo named ``name@version`` attributes its genes to component ``name``
    at that version; the reported version is the one whose own gene set is
    best matched, ties going to the higher version.
    """
    values = {g.fingerprint: max(g.value, 0.0) for g in pool.genes}
    genes_of: Dict[str, Set[str]] = {}
    versions_of: Dict[str, Dict[str, Set[str]]] = {}
    for gene in pool.genes:
        for repo in gene.repos:
            name, version = split_component(repo)
            genes_of.setdefault(name, set()).add(gene.fingerprint)
            if version is not None:
                versions_of.setdefault(name, {}).setdefault(version, set()).add(gene.fingerprint)

    hits: Dict[str, List[str]] = {}
    for record in target.functions:
        fp = fingerprint(record)
        if fp in values:
            hits.setdefault(fp, []).append(record.function_id)
    found = set(hits)

    matches = []
    for name, genes in genes_of.items():
        matched = genes & found
        if not matched:
            continue
        likelihood = min(1.0, _likelihood(genes, matched, values))
        if likelihood < theta_comp:
            continue

        version = None
        if name in versions_of:
            version = max(
                versions_of[name],
                key=lambda v: (_likelihood(versions_of[name][v], found, values), _version_key(v)),
            )
        matches.append(
            ComponentMatch(
                component=name,
                version=version,
                likelihood=likelihood,
                matched_genes=sorted(
                    (MatchedGene(fingerprint=fp, function_id=fid) for fp in matched for fid in hits[fp]),
                    key=lambda m: (m.fingerprint, m.function_id),
                ),
            )
        )
    matches.sort(key=lambda m: (-m.likelihood, m.component))
    return matches


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


@contextmanager
def _stage(name: str) -> Iterator[None]:
    try:
        yield
    except StageError:
        raise
    except (GenomeError, OSError) as exc:
        raise StageError(name, exc) from exc


def scan(
    target: Union[Path, Corpus],
    pool: Union[Path, GenePool],
    advisories: Union[Path, AdvisoryDb],
    manifest: Union[Path, Manifest, None] = None,
    registry: Union[Path, RegistrySnapshot, None] = None,
    config: Optional[GlobalConfig] = None,
    jobs: Optional[int] = None,
    target_name: Optional[str] = None,
) -> ScaReport:
    """
    Run every perspective over one target. Optional stages that cannot run
    leave a notice in the report meta; failing stages raise StageError.
    """
    config = config or GlobalConfig()
    notices: List[str] = []

    with _stage("index"):
        pool = pool if isinstance(pool, GenePool) else load_pool(pool)
    with _stage("advisories"):
        db = advisories if isinstance(advisories, AdvisoryDb) else load_advisories(advisories)
    with _stage("extract"):
        if isinstance(target, Corpus):
            corpus = target
        else:
            corpus = load_corpus(target, get_profile(config.profile), jobs=jobs)

    with _stage("components"):
        components = component_analysis(corpus, pool, config.theta_comp)

    with _stage("clones"):
        clone_cfg = align_to_index(config.clone, pool.windows)
        clones = detect_clones(corpus.functions, pool.function_map(), pool.windows, clone_cfg)

    graph = None
    findings: List[Finding] = []
    with _stage("dependencies"):
        if manifest is None:
            notices.append("dependency analysis skipped: no manifest given")
        elif registry is None:
            notices.append("dependency analysis skipped: no registry snapshot given")
        else:
            root = manifest if isinstance(manifest, Manifest) else load_manifest(manifest)
            snapshot = registry if isinstance(registry, RegistrySnapshot) else load_registry(registry)
            graph = resolve(root, snapshot)

    with _stage("vulnerabilities"):
        if graph is not None:
            findings.extend(match_dependencies(graph, db))
        findings.extend(match_genes(clones, db))
        findings.sort(
            key=lambda f: (f.advisory_id, f.matched_via.kind, f.matched_via.node or f.matched_via.function_id or "")
        )
        portrait = portrait_score(findings, config.portrait, config.portrait_aggregation)

    lineage = None
    if graph is not None:
        with _stage("lineage"):
            affected = sorted({f.matched_via.node for f in findings if f.matched_via.node})
            lineage = {node: lineage_paths(graph, node) for node in affected}

    if target_name is None:
        target_name = str(target) if not isinstance(target, Corpus) else "corpus"
    report = ScaReport(
        meta=ReportMeta(
            target=target_name,
            generated_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            config=config.model_dump(mode="json"),
            notices=notices,
        ),
        components=components,
        clones=clones,
        dependency_graph=graph,
        lineage=lineage,
        findings=findings,
        portrait=portrait,
    )
    logger.info(
        "Scan of %s: %d component(s), %d clone(s), %d finding(s).",
        target_name,
        len(components),
        len(clones),
        len(findings),
    )
    return report
