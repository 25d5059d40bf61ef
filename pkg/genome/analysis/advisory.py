"""
Intelligence genome: advisory records and their matching against resolved
dependencies and detected clones, plus the weighted portrait score.
"""

import logging
import math
from pathlib import Path
from typing import Dict, Iterable, List, Set

from pydantic import ValidationError

from genome.analysis.depgraph import parse_range, split_node
from genome.core.errors import DuplicateId, InvalidSeverity, MalformedLine, MissingField
from genome.schemas.advisory import (
    Advisory,
    AdvisoryDb,
    Dimension,
    Finding,
    MatchedVia,
    Portrait,
    PortraitWeights,
)
from genome.schemas.clone import ClonePair
from genome.schemas.deps import DependencyGraph, Version
from genome.utils.jsonl import iter_jsonl

logger = logging.getLogger(__name__)

AGGREGATIONS = ("max", "sum")


def _severity(row: dict, advisory_id: str) -> float:
    value = row.get("severity")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidSeverity(advisory_id, value)
    if math.isnan(value) or not 0 <= value <= 10:
        raise InvalidSeverity(advisory_id, value)
    return float(value)


def load_advisories(path: Path) -> AdvisoryDb:
    """Advisory JSONL, one record per line; ranges use the depgraph grammar."""
    path = Path(path)
    advisories: List[Advisory] = []
    seen: Set[str] = set()
    for line_no, row in iter_jsonl(path):
        if not isinstance(row, dict):
            raise MalformedLine(line_no, "expected a JSON object", file_path=str(path))
        if "id" not in row:
            raise MissingField("id", line_no=line_no, file_path=str(path))
        advisory_id = str(row["id"])
        if advisory_id in seen:
            raise DuplicateId(advisory_id)
        seen.add(advisory_id)

        data = dict(row)
        data["severity"] = _severity(row, advisory_id)
        affected = row.get("affected") or []
        if isinstance(affected, str):
            affected = [affected]
        data["affected"] = [parse_range(str(text)) for text in affected]
        try:
            advisories.append(Advisory.model_validate(data))
        except ValidationError as exc:
            error = exc.errors()[0]
            where = ".".join(str(p) for p in error["loc"])
            reason = f"{where}: {error['msg']}" if where else error["msg"]
            raise MalformedLine(line_no, reason, file_path=str(path)) from exc

    logger.info("Loaded %d advisory record(s) from %s.", len(advisories), path)
    return AdvisoryDb(advisories=advisories)


# ---------------------------------------------------------------------------
# Matching
# ---------------------------------------------------------------------------


def _same_ecosystem(advisory: Advisory, ecosystem: str) -> bool:
    # an empty ecosystem on either side matches any
    return not advisory.ecosystem or not ecosystem or advisory.ecosystem == ecosystem


def match_dependencies(g: DependencyGraph, db: AdvisoryDb) -> List[Finding]:
    by_package: Dict[str, List[Advisory]] = {}
    for advisory in db.advisories:
        if advisory.affected and _same_ecosystem(advisory, g.ecosystem):
            by_package.setdefault(advisory.package, []).append(advisory)

    findings = []
    for node in g.nodes:
        name, version_text = split_node(node)
        candidates = by_package.get(name)
        if not candidates:
            continue
        version = Version.parse(version_text)
        for advisory in candidates:
            if any(r.contains(version) for r in advisory.affected):
                findings.append(
                    Finding(
                        advisory_id=advisory.id,
                        matched_via=MatchedVia(kind="PackageRange", node=node),
                        dimension=advisory.effective_dimension,
                        severity=advisory.severity,
                    )
                )
    findings.sort(key=lambda f: (f.advisory_id, f.matched_via.node))
    return findings


def match_genes(clone_findings: Iterable[ClonePair], db: AdvisoryDb) -> List[Finding]:
    """A finding per clone whose pool-side fingerprint is a listed defective gene."""
    listed = db.by_fingerprint()
    findings = []
    for pair in clone_findings:
        if not pair.verdict:
            continue
        pool_side = next((s for s in pair.provenance if s.role == "pool"), None)
        target_side = next((s for s in pair.provenance if s.role == "target"), None)
        if pool_side is None:
            continue
        for advisory in listed.get(pool_side.fingerprint, ()):
            findings.append(
                Finding(
                    advisory_id=advisory.id,
                    matched_via=MatchedVia(
                        kind="GeneFingerprint",
                        function_id=(target_side or pool_side).function_id,
                        fingerprint=pool_side.fingerprint,
                    ),
                    dimension=advisory.effective_dimension,
                    severity=advisory.severity,
                )
            )
    findings.sort(key=lambda f: (f.advisory_id, f.matched_via.function_id))
    return findings


# ---------------------------------------------------------------------------
# Portrait
# ---------------------------------------------------------------------------


def portrait_score(
    findings: Iterable[Finding],
    weights: PortraitWeights = PortraitWeights(),
    aggregation: str = "max",
) -> Portrait:
    """
    Per dimension: max severity / 10 (or the severity sum, capped at 10,
    / 10); total is the weighted sum of the dimensions.
    """
    if aggregation not in AGGREGATIONS:
        raise ValueError(f"aggregation must be one of {AGGREGATIONS}, got {aggregation!r}")

    raw = {d.value: 0.0 for d in Dimension}
    for finding in findings:
        key = finding.dimension.value
        if aggregation == "max":
            raw[key] = max(raw[key], finding.severity)
        else:
            raw[key] = min(10.0, raw[key] + finding.severity)

    w = weights.as_dict()
    total = sum(w[d] * raw[d] for d in raw) / 10
    return Portrait(
        total=min(1.0, total),
        dimensions={d: raw[d] / 10 for d in raw},
    )
