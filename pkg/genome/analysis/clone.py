"""
Clone detection against the gene index.

Token-based filtering (shared N-line windows through an inverted index,
then multiset token similarity) narrows the candidates; tree-based
verification (subtree hash matching plus tree-vector cosine) confirms them.
"""

import logging
import math
from collections import Counter, defaultdict
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from genome.analysis.extract import build_nesting_tree, fingerprint, normalize_token, normalized_stream
from genome.core.errors import NMismatch, WindowModeMismatch
from genome.schemas.clone import (
    CloneCandidate,
    CloneCategory,
    CloneConfig,
    CloneLink,
    ClonePair,
    CloneSide,
)
from genome.schemas.corpus import FunctionRecord, NestingTree, TokenKind
from genome.schemas.gene import WindowIndex
from genome.utils.hashing import hash_hex

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# N-line windows and the inverted index
# ---------------------------------------------------------------------------


def window_lines(record: FunctionRecord, abstract: bool = True) -> List[str]:
    """Comment-free lines rebuilt from tokens, single-space separated."""
    lines: Dict[int, List[str]] = defaultdict(list)
    for tok in record.tokens:
        if tok.kind is TokenKind.COMMENT:
            continue
        lines[tok.line].append(normalize_token(tok) if abstract else tok.lexeme)
    return [" ".join(parts) for _, parts in sorted(lines.items())]


def windows(record: FunctionRecord, n_lines: int, abstract: bool = True) -> List[str]:
    lines = window_lines(record, abstract)
    if len(lines) < n_lines:
        return [hash_hex("\n".join(lines))]
    return [hash_hex("\n".join(lines[i:i + n_lines])) for i in range(len(lines) - n_lines + 1)]


def build_window_index(
    functions: Iterable[FunctionRecord],
    n_lines: int,
    abstract: bool = True,
) -> WindowIndex:
    postings: Dict[str, Set[str]] = defaultdict(set)
    for record in functions:
        for h in windows(record, n_lines, abstract):
            postings[h].add(record.function_id)
    return WindowIndex(
        n_lines=n_lines,
        abstract_windows=abstract,
        postings={h: sorted(ids) for h, ids in sorted(postings.items())},
    )


def align_to_index(cfg: CloneConfig, index: WindowIndex) -> CloneConfig:
    """Adopt the index's N and window mode unless the config set them explicitly."""
    update = {}
    if "n_lines" not in cfg.model_fields_set:
        update["n_lines"] = index.n_lines
    if "abstract_windows" not in cfg.model_fields_set:
        update["abstract_windows"] = index.abstract_windows
    return cfg.model_copy(update=update) if update else cfg


def filter_candidates(
    target: FunctionRecord,
    index: WindowIndex,
    cfg: CloneConfig,
) -> List[CloneCandidate]:
    """Pool functions sharing at least min_shared distinct windows with the target."""
    if cfg.n_lines != index.n_lines:
        raise NMismatch(cfg.n_lines, index.n_lines)
    if cfg.abstract_windows != index.abstract_windows:
        raise WindowModeMismatch(cfg.abstract_windows, index.abstract_windows)

    counts: Counter = Counter()
    for h in set(windows(target, index.n_lines, index.abstract_windows)):
        for function_id in index.postings.get(h, ()):
            counts[function_id] += 1

    hits = [
        CloneCandidate(function_id=fid, shared_windows=n)
        for fid, n in counts.items()
        if n >= cfg.min_shared
    ]
    hits.sort(key=lambda c: (-c.shared_windows, c.function_id))
    return hits


# ---------------------------------------------------------------------------
# Similarities
# ---------------------------------------------------------------------------


def token_similarity(a: FunctionRecord, b: FunctionRecord) -> float:
    """Multiset Jaccard over normalized tokens."""
    ca = Counter(normalized_stream(a.tokens))
    cb = Counter(normalized_stream(b.tokens))
    union = sum((ca | cb).values())
    if union == 0:
        return 1.0
    return sum((ca & cb).values()) / union


def tree_vector(tree: NestingTree, depth_buckets: int = 16, arity_buckets: int = 8) -> List[int]:
    """Nodes per depth followed by the arity histogram; the last bucket of each absorbs overflow."""
    depths = [0] * depth_buckets
    arities = [0] * arity_buckets
    for node, depth in tree.iter_nodes():
        depths[min(depth, depth_buckets - 1)] += 1
        arities[min(len(node.children), arity_buckets - 1)] += 1
    return depths + arities


def _cosine(u: Sequence[int], v: Sequence[int]) -> float:
    nu = sum(x * x for x in u)
    nv = sum(x * x for x in v)
    if nu == 0 or nv == 0:
        return 1.0 if nu == nv else 0.0
    # integer product under one sqrt keeps identical vectors at exactly 1.0
    return min(1.0, sum(x * y for x, y in zip(u, v)) / math.sqrt(nu * nv))


def tree_similarity(a: NestingTree, b: NestingTree, cfg: Optional[CloneConfig] = None) -> float:
    cfg = cfg or CloneConfig()
    qa = Counter(n.subtree_hash for n, _ in a.iter_nodes() if n.node_count >= cfg.min_subtree_nodes)
    qb = Counter(n.subtree_hash for n, _ in b.iter_nodes() if n.node_count >= cfg.min_subtree_nodes)
    ta, tb = sum(qa.values()), sum(qb.values())
    if ta == 0 and tb == 0:
        hash_ratio = 1.0
    else:
        hash_ratio = sum((qa & qb).values()) / max(ta, tb)

    vector_sim = _cosine(
        tree_vector(a, cfg.depth_buckets, cfg.arity_buckets),
        tree_vector(b, cfg.depth_buckets, cfg.arity_buckets),
    )
    return (hash_ratio + vector_sim) / 2


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------


def _compact_text(record: FunctionRecord) -> str:
    return "".join(t.lexeme for t in record.tokens if t.kind is not TokenKind.COMMENT)


def _side(record: FunctionRecord, role: str) -> CloneSide:
    return CloneSide(
        function_id=record.function_id,
        role=role,
        repo_id=record.repo_id,
        file_path=record.file_path,
        start_line=record.start_line,
        end_line=record.end_line,
        name=record.name,
        fingerprint=fingerprint(record),
    )


def verify(
    a: FunctionRecord,
    b: FunctionRecord,
    cfg: CloneConfig,
    shared_windows: int = 0,
    roles: Tuple[str, str] = ("target", "pool"),
    trees: Optional[Dict[str, NestingTree]] = None,
) -> ClonePair:
    """
    Score a token-filtered pair and categorize it.

    Type1: identical text once whitespace and comments are gone; Type2:
    identical fingerprints; Type3: any other pair at or above theta_verify.
    """
    trees = trees if trees is not None else {}
    for record in (a, b):
        if record.function_id not in trees:
            trees[record.function_id] = build_nesting_tree(record)

    token_sim = token_similarity(a, b)
    tree_sim = tree_similarity(trees[a.function_id], trees[b.function_id], cfg)
    combined = min(1.0, cfg.token_weight * token_sim + (1.0 - cfg.token_weight) * tree_sim)
    verdict = combined >= cfg.theta_verify

    if _compact_text(a) == _compact_text(b):
        category = CloneCategory.TYPE1
    elif fingerprint(a) == fingerprint(b):
        category = CloneCategory.TYPE2
    elif verdict:
        category = CloneCategory.TYPE3
    else:
        category = CloneCategory.NONE

    sides = [_side(a, roles[0]), _side(b, roles[1])]
    sides.sort(key=lambda s: s.function_id)
    return ClonePair(
        a=sides[0].function_id,
        b=sides[1].function_id,
        shared_windows=shared_windows,
        token_sim=token_sim,
        tree_sim=tree_sim,
        combined=combined,
        verdict=verdict,
        category=category,
        provenance=sides,
    )


def _overlapping(a: FunctionRecord, b: FunctionRecord) -> bool:
    return a.overlaps(b)


def detect_clones(
    targets: Iterable[FunctionRecord],
    pool_functions: Dict[str, FunctionRecord],
    index: WindowIndex,
    cfg: CloneConfig,
) -> List[ClonePair]:
    """
    Window filter → token filter → tree verification; verdict-true pairs only.

    Self pairs and overlapping spans in the same file are never reported and
    each unordered pair appears once.
    """
    if cfg.n_lines != index.n_lines:
        raise NMismatch(cfg.n_lines, index.n_lines)

    trees: Dict[str, NestingTree] = {}
    seen: Set[Tuple[str, str]] = set()
    results: List[ClonePair] = []
    for target in targets:
        for candidate in filter_candidates(target, index, cfg):
            other = pool_functions.get(candidate.function_id)
            if other is None or other.function_id == target.function_id:
                continue
            if _overlapping(target, other):
                continue
            key = tuple(sorted((target.function_id, other.function_id)))
            if key in seen:
                continue
            seen.add(key)
            if token_similarity(target, other) < cfg.theta_token:
                continue
            pair = verify(target, other, cfg, candidate.shared_windows, trees=trees)
            if pair.verdict:
                results.append(pair)

    results.sort(key=lambda p: (-p.combined, p.a, p.b))
    logger.info("Verified %d clone pair(s).", len(results))
    return results


def clone_links(pairs: Iterable[ClonePair]) -> List[CloneLink]:
    """Aggregate verified pairs into file-level clone dependencies."""
    grouped: Dict[Tuple[str, str], List[float]] = defaultdict(list)
    for pair in pairs:
        units = sorted(f"{s.repo_id}:{s.file_path}" for s in pair.provenance)
        grouped[(units[0], units[-1])].append(pair.combined)
    links = [
        CloneLink(source=src, target=dst, pairs=len(scores), mean_similarity=sum(scores) / len(scores))
        for (src, dst), scores in grouped.items()
    ]
    links.sort(key=lambda link: (-link.pairs, link.source, link.target))
    return links
