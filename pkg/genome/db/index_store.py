"""
On-disk gene index.

Layout of an index directory (UTF-8, LF, sorted keys):
    meta.json        PoolMeta
    genes.jsonl      one Gene per line, sorted by fingerprint
    windows.jsonl    {"h": window hash, "p": [function_ids]} sorted by hash
    functions.jsonl  exemplar FunctionRecords in corpus format
    repos.jsonl      RepoStats per repo, sorted by repo_id
"""

import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, List

from pydantic import ValidationError

from genome.core.errors import CorruptIndex, GenomeError, IndexLocked, IndexVersionMismatch
from genome.db.corpus_store import read_corpus_jsonl, record_to_row
from genome.schemas.gene import INDEX_FORMAT_VERSION, Gene, GenePool, PoolMeta, WindowIndex
from genome.schemas.metrics import RepoStats
from genome.utils.jsonl import iter_jsonl, write_json, write_jsonl

logger = logging.getLogger(__name__)

META_FILE = "meta.json"
GENES_FILE = "genes.jsonl"
WINDOWS_FILE = "windows.jsonl"
FUNCTIONS_FILE = "functions.jsonl"
REPOS_FILE = "repos.jsonl"
LOCK_FILE = "pool.lock"


@contextmanager
def pool_lock(index_dir: Path) -> Iterator[Path]:
    """Exclusive writer lock; readers never take it."""
    lock = Path(index_dir) / LOCK_FILE
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise IndexLocked(f"index {index_dir} is locked by another writer ({lock})") from None
    try:
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)
        yield lock
    finally:
        lock.unlink(missing_ok=True)


# ---------------------------------------------------------------------------
# Save
# ---------------------------------------------------------------------------


def save_pool(pool: GenePool, index_dir: Path) -> Path:
    index_dir = Path(index_dir)
    index_dir.mkdir(parents=True, exist_ok=True)

    with pool_lock(index_dir):
        write_json(index_dir / META_FILE, pool.meta.model_dump(mode="json"))
        write_jsonl(
            index_dir / GENES_FILE,
            (g.model_dump(mode="json") for g in sorted(pool.genes, key=lambda g: g.fingerprint)),
            sort_keys=True,
        )
        write_jsonl(
            index_dir / WINDOWS_FILE,
            ({"h": h, "p": sorted(ids)} for h, ids in sorted(pool.windows.postings.items())),
            sort_keys=True,
        )
        write_jsonl(
            index_dir / FUNCTIONS_FILE,
            (record_to_row(f) for f in sorted(pool.functions, key=lambda f: f.function_id)),
        )
        write_jsonl(
            index_dir / REPOS_FILE,
            (r.model_dump(mode="json") for r in sorted(pool.repos, key=lambda r: r.repo_id)),
            sort_keys=True,
        )

    logger.info("Saved %d gene(s) to %s.", len(pool.genes), index_dir)
    return index_dir


# ---------------------------------------------------------------------------
# Load
# ---------------------------------------------------------------------------


def _load_meta(path: Path) -> PoolMeta:
    if not path.is_file():
        raise CorruptIndex(str(path), "file is missing")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptIndex(str(path), exc.msg) from exc
    if not isinstance(raw, dict):
        raise CorruptIndex(str(path), "expected a JSON object")

    found = raw.get("format_version")
    if found != INDEX_FORMAT_VERSION:
        raise IndexVersionMismatch(found, INDEX_FORMAT_VERSION)
    try:
        return PoolMeta.model_validate(raw)
    except ValidationError as exc:
        raise CorruptIndex(str(path), str(exc.errors()[0]["msg"])) from exc


def _rows(path: Path) -> Iterator[tuple]:
    if not path.is_file():
        raise CorruptIndex(str(path), "file is missing")
    try:
        yield from iter_jsonl(path)
    except GenomeError as exc:
        raise CorruptIndex(str(path), exc.message) from exc


def load_pool(index_dir: Path) -> GenePool:
    index_dir = Path(index_dir)
    if not index_dir.is_dir():
        raise FileNotFoundError(f"index directory does not exist: {index_dir}")

    meta = _load_meta(index_dir / META_FILE)

    genes: List[Gene] = []
    path = index_dir / GENES_FILE
    for line_no, row in _rows(path):
        try:
            genes.append(Gene.model_validate(row))
        except ValidationError as exc:
            raise CorruptIndex(f"{path}:{line_no}", str(exc.errors()[0]["msg"])) from exc

    postings = {}
    path = index_dir / WINDOWS_FILE
    for line_no, row in _rows(path):
        if not isinstance(row, dict) or "h" not in row or not isinstance(row.get("p"), list):
            raise CorruptIndex(f"{path}:{line_no}", "expected {\"h\", \"p\"}")
        postings[row["h"]] = row["p"]

    path = index_dir / FUNCTIONS_FILE
    if not path.is_file():
        raise CorruptIndex(str(path), "file is missing")
    try:
        functions = read_corpus_jsonl(path).functions
    except GenomeError as exc:
        raise CorruptIndex(str(path), exc.message) from exc

    repos: List[RepoStats] = []
    path = index_dir / REPOS_FILE
    # optional: hand-assembled indexes may omit contribution stats
    if path.is_file():
        for line_no, row in _rows(path):
            try:
                repos.append(RepoStats.model_validate(row))
            except ValidationError as exc:
                raise CorruptIndex(f"{path}:{line_no}", str(exc.errors()[0]["msg"])) from exc

    known = {f.function_id for f in functions}
    missing = [g.exemplar for g in genes if g.exemplar not in known]
    if missing:
        raise CorruptIndex(str(index_dir / FUNCTIONS_FILE), f"exemplar {missing[0]} is not stored")

    return GenePool(
        meta=meta,
        genes=genes,
        functions=functions,
        windows=WindowIndex(n_lines=meta.n_lines, abstract_windows=meta.abstract_windows, postings=postings),
        repos=repos,
    )
