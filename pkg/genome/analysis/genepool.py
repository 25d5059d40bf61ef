"""
Software genes: call graphs, centrality, ranking, the gene pool itself,
gene families and pool-to-pool evolution.
"""

import logging
import math
import os
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from genome.analysis.clone import build_window_index, token_similarity
from genome.analysis.extract import body_span, fingerprint
from genome.analysis.metrics import repo_contribution
from genome.core.errors import DegenerateNormalization
from genome.schemas.common import Diagnostic
from genome.schemas.corpus import Corpus, FunctionRecord, TokenKind
from genome.schemas.gene import (
    CallGraph,
    Centrality,
    Gene,
    GeneCluster,
    GenePool,
    PoolDiff,
    PoolMeta,
    RankWeights,
    ReplacedGene,
)
from genome.schemas.metrics import MetricSet, RepoStats

logger = logging.getLogger(__name__)

__all__ = [
    "build_call_graph",
    "build_pool",
    "centrality",
    "cluster_genes",
    "diff_pools",
    "fingerprint",
    "normalization_ranges",
    "rank_genes",
    "split_component",
]

NORMALIZED_METRICS = ("degree", "closeness", "betweenness", "value")


# ---------------------------------------------------------------------------
# Call graphs and centrality
# ---------------------------------------------------------------------------


def _call_sites(record: FunctionRecord) -> List[str]:
    code = record.code_tokens()
    if not code:
        return []
    open_idx, _ = body_span(code)
    start = open_idx + 1 if code[open_idx].lexeme == "{" else 0
    skip_own_name = start == 0

    names = []
    for i in range(start, len(code) - 1):
        tok = code[i]
        if tok.kind is not TokenKind.IDENTIFIER or code[i + 1].lexeme != "(":
            continue
        # brace-less records start with their own signature
        if skip_own_name and tok.lexeme == record.name:
            skip_own_name = False
            continue
        names.append(tok.lexeme)
    return names


def build_call_graph(repo_functions: Sequence[FunctionRecord]) -> CallGraph:
    """Name-resolved caller → callee edges; an ambiguous name links to every match."""
    repos = {f.repo_id for f in repo_functions}
    if len(repos) > 1:
        raise ValueError(f"call graph spans several repos: {sorted(repos)}")

    by_name: Dict[str, List[str]] = defaultdict(list)
    for record in repo_functions:
        by_name[record.name].append(record.function_id)

    edges: Set[Tuple[str, str]] = set()
    for record in repo_functions:
        for name in _call_sites(record):
            for callee in by_name.get(name, ()):
                edges.add((record.function_id, callee))

    return CallGraph(
        repo_id=next(iter(repos), ""),
        nodes=sorted(f.function_id for f in repo_functions),
        edges=sorted(edges),
    )


def centrality(g: CallGraph) -> Dict[str, Centrality]:
    """
    Exact degree, closeness and betweenness on the undirected simple view.

    Closeness is the Wasserman-Faust form (r/(n-1))·(r/Σd); betweenness is
    the raw count of unordered pairs routed through the node.
    """
    graph = nx.Graph()
    graph.add_nodes_from(g.nodes)
    graph.add_edges_from((u, v) for u, v in g.edges if u != v)

    closeness = nx.closeness_centrality(graph, wf_improved=True)
    betweenness = nx.betweenness_centrality(graph, normalized=False)
    return {
        node: Centrality(
            degree=float(graph.degree(node)),
            closeness=float(closeness[node]),
            betweenness=float(betweenness[node]),
        )
        for node in g.nodes
    }


def _repo_centrality(repo_functions: List[FunctionRecord]) -> Dict[str, Centrality]:
    return centrality(build_call_graph(repo_functions))


def corpus_centrality(
    corpus: Corpus,
    call_graphs: Optional[Iterable[CallGraph]] = None,
    jobs: Optional[int] = None,
) -> Dict[str, Centrality]:
    """Per-function centrality; repos are independent and fan out across processes."""
    if call_graphs is not None:
        scores: Dict[str, Centrality] = {}
        for g in call_graphs:
            scores.update(centrality(g))
        return scores

    groups = list(corpus.by_repo().values())
    workers = jobs or os.cpu_count() or 1
    if workers > 1 and len(groups) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(groups))) as executor:
            parts = list(executor.map(_repo_centrality, groups))
    else:
        parts = [_repo_centrality(group) for group in groups]

    scores = {}
    for part in parts:
        scores.update(part)
    return scores


# ---------------------------------------------------------------------------
# Ranking
# ---------------------------------------------------------------------------


def normalization_ranges(
    scores: Dict[str, Centrality],
    metrics: Dict[str, MetricSet],
) -> Dict[str, Tuple[float, float]]:
    ranges: Dict[str, Tuple[float, float]] = {}
    for name in NORMALIZED_METRICS:
        if name == "value":
            values = [m.value for m in metrics.values()]
        else:
            values = [getattr(c, name) for c in scores.values()]
        if values:
            ranges[name] = (min(values), max(values))
    return ranges


def _minmax(x: float, bounds: Tuple[float, float]) -> float:
    lo, hi = bounds
    if hi == lo:
        return 0.5
    return (x - lo) / (hi - lo)


def _function_rank(
    c: Centrality,
    m: MetricSet,
    ranges: Dict[str, Tuple[float, float]],
    weights: RankWeights,
) -> float:
    composite = (
        _minmax(c.degree, ranges["degree"])
        + _minmax(c.closeness, ranges["closeness"])
        + _minmax(c.betweenness, ranges["betweenness"])
    ) / 3
    return weights.w_centrality * composite + weights.w_value * _minmax(m.value, ranges["value"])


def _report_degenerate(ranges: Dict[str, Tuple[float, float]], diagnostics: Optional[List[Diagnostic]]) -> None:
    for name, (lo, hi) in ranges.items():
        if lo != hi:
            continue
        err = DegenerateNormalization(f"{name} is constant ({lo}) across the corpus; normalized to 0.5")
        logger.warning(err.message)
        if diagnostics is not None:
            diagnostics.append(Diagnostic(code=err.code, message=err.message))


def rank_genes(
    corpus: Corpus,
    weights: RankWeights,
    metrics: Dict[str, MetricSet],
    call_graphs: Optional[Iterable[CallGraph]] = None,
    jobs: Optional[int] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> List[Gene]:
    """
    One Gene per fingerprint, best first.

    Scores are those of the exemplar (highest value, then lowest
    function_id); frequency counts distinct repos.
    """
    genes, _ = _rank(corpus, weights, metrics, call_graphs, jobs, diagnostics)
    return genes


def _rank(
    corpus: Corpus,
    weights: RankWeights,
    metrics: Dict[str, MetricSet],
    call_graphs: Optional[Iterable[CallGraph]],
    jobs: Optional[int],
    diagnostics: Optional[List[Diagnostic]],
) -> Tuple[List[Gene], Dict[str, Tuple[float, float]]]:
    if not corpus.functions:
        return [], {}

    scores = corpus_centrality(corpus, call_graphs, jobs)
    ranges = normalization_ranges(scores, metrics)
    _report_degenerate(ranges, diagnostics)

    groups: Dict[str, List[FunctionRecord]] = defaultdict(list)
    for record in corpus.functions:
        groups[fingerprint(record)].append(record)

    genes = []
    for fp, members in groups.items():
        exemplar = min(members, key=lambda r: (-metrics[r.function_id].value, r.function_id))
        c = scores.get(exemplar.function_id, Centrality())
        m = metrics[exemplar.function_id]
        repos = sorted({r.repo_id for r in members})
        genes.append(
            Gene(
                fingerprint=fp,
                exemplar=exemplar.function_id,
                value=m.value,
                frequency=len(repos),
                degree=c.degree,
                closeness=c.closeness,
                betweenness=c.betweenness,
                rank_score=_function_rank(c, m, ranges, weights),
                repos=repos,
            )
        )
    genes.sort(key=lambda g: (-g.rank_score, g.fingerprint))
    return genes, ranges


# ---------------------------------------------------------------------------
# Pool construction
# ---------------------------------------------------------------------------


def repo_stats(corpus: Corpus, metrics: Dict[str, MetricSet], f_common: Optional[int]) -> List[RepoStats]:
    """Contribution of every repo, fingerprint frequency taken over the whole corpus."""
    repos_per_fp: Dict[str, Set[str]] = defaultdict(set)
    fps: Dict[str, str] = {}
    for record in corpus.functions:
        fp = fingerprint(record)
        fps[record.function_id] = fp
        repos_per_fp[fp].add(record.repo_id)

    cap = f_common if f_common is not None else max(len(corpus.repo_ids()), 1)
    stats = []
    for repo_id, functions in corpus.by_repo().items():
        rows = [(metrics[f.function_id].value, len(repos_per_fp[fps[f.function_id]])) for f in functions]
        stats.append(repo_contribution(rows, cap, repo_id=repo_id))
    return stats


def build_pool(
    corpus: Corpus,
    metrics: Dict[str, MetricSet],
    weights: Optional[RankWeights] = None,
    tau: float = 0.2,
    f_common: Optional[int] = 100,
    n_lines: int = 4,
    abstract_windows: bool = True,
    jobs: Optional[int] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> GenePool:
    """
    Keep the top-τ share of ranked fingerprints, then drop those shared by
    more than f_common repos (None means no cap).
    """
    if not 0.0 <= tau <= 1.0:
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    weights = weights or RankWeights()

    ranked, ranges = _rank(corpus, weights, metrics, None, jobs, diagnostics)
    cut = math.ceil(tau * len(ranked) - 1e-9)
    kept = [
        g for g in ranked[:cut]
        if f_common is None or g.frequency <= f_common
    ]
    kept.sort(key=lambda g: g.fingerprint)

    by_id = corpus.by_id()
    exemplars = sorted((by_id[g.exemplar] for g in kept), key=lambda r: r.function_id)
    logger.info("Gene pool keeps %d of %d fingerprint(s).", len(kept), len(ranked))
    return GenePool(
        meta=PoolMeta(
            n_lines=n_lines,
            abstract_windows=abstract_windows,
            weights=weights,
            tau=tau,
            f_common=f_common,
            norm_ranges=ranges,
        ),
        genes=kept,
        functions=exemplars,
        windows=build_window_index(exemplars, n_lines, abstract_windows),
        repos=repo_stats(corpus, metrics, f_common),
    )


# ---------------------------------------------------------------------------
# Gene families
# ---------------------------------------------------------------------------


def split_component(repo_id: str) -> Tuple[str, Optional[str]]:
    """``name@version`` → (name, version); anything else is a version-less component."""
    name, sep, version = repo_id.rpartition("@")
    if sep and name and version:
        return name, version
    return repo_id, None


def _jaccard(a: Set[str], b: Set[str]) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def cluster_genes(
    pool: GenePool,
    dependency_edges: Iterable[Tuple[str, str]] = (),
    theta_co: float = 0.5,
) -> List[GeneCluster]:
    """
    Gene families: connected components of the co-existence / dependency link graph.

    Two genes link when the Jaccard index of their repo sets reaches
    theta_co, or when a package holding one reaches a different package
    holding the other along package-level dependency edges.
    """
    deps = nx.DiGraph()
    deps.add_edges_from(dependency_edges)
    reach = {pkg: nx.descendants(deps, pkg) for pkg in deps.nodes}

    repo_sets = {g.fingerprint: set(g.repos) for g in pool.genes}
    packages = {fp: {split_component(r)[0] for r in repos} for fp, repos in repo_sets.items()}

    def dependency_linked(p_set: Set[str], q_set: Set[str]) -> bool:
        for p in p_set:
            for q in q_set:
                if p != q and (q in reach.get(p, ()) or p in reach.get(q, ())):
                    return True
        return False

    links = nx.Graph()
    fps = sorted(repo_sets)
    links.add_nodes_from(fps)
    for i, g in enumerate(fps):
        for h in fps[i + 1:]:
            if _jaccard(repo_sets[g], repo_sets[h]) >= theta_co or dependency_linked(packages[g], packages[h]):
                links.add_edge(g, h)

    clusters = []
    for component in nx.connected_components(links):
        members = sorted(component)
        repos = sorted(set().union(*(repo_sets[fp] for fp in members)))
        clusters.append(GeneCluster(members=members, repos=repos))
    clusters.sort(key=lambda c: c.members[0])
    return clusters


# ---------------------------------------------------------------------------
# Evolution
# ---------------------------------------------------------------------------


def diff_pools(old: GenePool, new: GenePool, theta_repl: float = 0.7) -> PoolDiff:
    """Added, removed and replaced genes; replacements pair greedily by exemplar token similarity."""
    old_genes, new_genes = old.gene_map(), new.gene_map()
    added = sorted(set(new_genes) - set(old_genes))
    removed = sorted(set(old_genes) - set(new_genes))

    old_fns, new_fns = old.function_map(), new.function_map()
    scored = []
    for o in removed:
        a = old_fns.get(old_genes[o].exemplar)
        if a is None:
            continue
        for n in added:
            b = new_fns.get(new_genes[n].exemplar)
            if b is None:
                continue
            sim = token_similarity(a, b)
            if sim >= theta_repl:
                scored.append((sim, o, n))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))

    used_old: Set[str] = set()
    used_new: Set[str] = set()
    replaced = []
    for sim, o, n in scored:
        if o in used_old or n in used_new:
            continue
        used_old.add(o)
        used_new.add(n)
        replaced.append(ReplacedGene(old=o, new=n, similarity=sim))
    replaced.sort(key=lambda r: r.old)

    return PoolDiff(
        added=[fp for fp in added if fp not in used_new],
        removed=[fp for fp in removed if fp not in used_old],
        replaced=replaced,
    )
