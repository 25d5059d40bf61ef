import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from genome.core.errors import DomainError, InsufficientPoints
from genome.schemas.corpus import FunctionRecord, LanguageProfile, TokenKind
from genome.schemas.metrics import (
    REPO_METRICS,
    MetricSet,
    RepoMetadata,
    RepoStats,
    SelectionConfig,
)

logger = logging.getLogger(__name__)

LRD_EPSILON = 1e-12
# Relative slack when deciding k-distance ties between float distances
TIE_TOLERANCE = 1e-12

_NON_BRANCH_KINDS = (TokenKind.STRING, TokenKind.NUMBER, TokenKind.COMMENT)


# ---------------------------------------------------------------------------
# Function-level metrics
# ---------------------------------------------------------------------------


def compute_metrics(record: FunctionRecord, profile: LanguageProfile) -> MetricSet:
    """
    Halstead volume, cyclomatic complexity and LOC of one function.

    Operands are identifiers and literals; operators are keywords, operators
    and punctuation. Comments count for neither.
    """
    code = record.code_tokens()
    total = len(code)
    distinct = len({t.lexeme for t in code})
    hv = total * math.log2(distinct) if distinct > 0 else 0.0

    branches = profile.branch_keywords
    cc = 1 + sum(1 for t in code if t.lexeme in branches and t.kind not in _NON_BRANCH_KINDS)
    loc = record.line_count
    return MetricSet(
        halstead_volume=hv,
        cyclomatic=cc,
        loc=loc,
        value=function_value(hv, cc, loc),
    )


def function_value(hv: float, cc: int, loc: int) -> float:
    """171 − 5.2·ln(max(HV, 1)) − 0.23·CC − 16.2·ln(LOC); unclamped below."""
    if cc < 1:
        raise DomainError(f"cyclomatic complexity must be >= 1, got {cc}")
    if loc < 1:
        raise DomainError(f"lines of code must be >= 1, got {loc}")
    if hv < 0 or math.isnan(hv) or math.isinf(hv):
        raise DomainError(f"halstead volume must be a finite non-negative number, got {hv}")
    return 171.0 - 5.2 * math.log(max(hv, 1.0)) - 0.23 * cc - 16.2 * math.log(loc)


def corpus_metrics(functions: Iterable[FunctionRecord], profile: LanguageProfile) -> Dict[str, MetricSet]:
    return {record.function_id: compute_metrics(record, profile) for record in functions}


# ---------------------------------------------------------------------------
# Repository contribution and selection
# ---------------------------------------------------------------------------


def repo_contribution(
    repo_functions: Sequence[Tuple[float, int]],
    f_common: int,
    repo_id: str = "",
) -> RepoStats:
    """
    Share of ecosystem value a repository contributes.

    Each function's (floored) value is split across the repos that share its
    fingerprint; functions shared by more than f_common repos are ignored;
    the sum is scaled by the repo's unique-function ratio.
    """
    all_count = len(repo_functions)
    if all_count == 0:
        return RepoStats(repo_id=repo_id, function_count=0, unique_func_count=0, contribution=0.0)

    unique = sum(1 for _, freq in repo_functions if freq == 1)
    shared_value = sum(
        max(value, 0.0) / freq
        for value, freq in repo_functions
        if freq <= f_common
    )
    return RepoStats(
        repo_id=repo_id,
        function_count=all_count,
        unique_func_count=unique,
        contribution=shared_value * (unique / all_count),
    )


def select_repos(
    metadata: Sequence[RepoMetadata],
    cfg: SelectionConfig,
) -> Tuple[List[RepoMetadata], List[RepoMetadata]]:
    """Selected iff every metric meets its threshold; input order kept in both parts."""
    selected: List[RepoMetadata] = []
    excluded: List[RepoMetadata] = []
    for repo in metadata:
        passes = all(getattr(repo, name) >= cfg.thresholds[name] for name in REPO_METRICS)
        (selected if passes else excluded).append(repo)
    return selected, excluded


# ---------------------------------------------------------------------------
# Local Outlier Factor
# ---------------------------------------------------------------------------


def standardize(points: Sequence[Sequence[float]]) -> np.ndarray:
    """Z-score every dimension; zero-variance dimensions are dropped."""
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValueError("points must be a sequence of equal-length vectors")
    std = x.std(axis=0)
    keep = std > 0
    return (x[:, keep] - x.mean(axis=0)[keep]) / std[keep]


def lof_scores(points: Sequence[Sequence[float]], k: int) -> List[float]:
    """
    Classic LOF over z-scored points with Euclidean distance.

    k-distance neighbourhoods include ties, reach-dist(p, o) is
    max(k-distance(o), d(p, o)) and every lrd denominator gets LRD_EPSILON,
    so duplicate points score exactly 1.0.
    """
    n = len(points)
    if k < 1:
        raise DomainError(f"k must be >= 1, got {k}")
    if n <= k:
        raise InsufficientPoints(n, k)

    x = standardize(points)
    diff = x[:, None, :] - x[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))

    others = dist.copy()
    np.fill_diagonal(others, np.inf)
    k_distance = np.sort(others, axis=1)[:, k - 1]
    limit = k_distance + TIE_TOLERANCE * np.maximum(1.0, k_distance)
    neighbours = others <= limit[:, None]

    reach = np.maximum(k_distance[None, :], dist)
    sizes = neighbours.sum(axis=1)
    lrd = sizes / (np.where(neighbours, reach, 0.0).sum(axis=1) + LRD_EPSILON)
    lof = np.where(neighbours, lrd[None, :], 0.0).sum(axis=1) / sizes / lrd
    return [float(v) for v in lof]


def prioritize_excluded(
    excluded: Sequence[RepoMetadata],
    k: int,
) -> List[Tuple[RepoMetadata, Optional[float]]]:
    """
    Order excluded repos for re-examination: most outlying first.

    With k or fewer repos there is no LOF; the input order comes back with
    no scores.
    """
    if len(excluded) <= k:
        logger.warning(
            "Only %d excluded repo(s) for k=%d; skipping LOF prioritization.", len(excluded), k
        )
        return [(repo, None) for repo in excluded]

    scores = lof_scores([repo.vector() for repo in excluded], k)
    ranked = sorted(zip(excluded, scores), key=lambda pair: (-pair[1], pair[0].repo_id))
    return [(repo, score) for repo, score in ranked]
