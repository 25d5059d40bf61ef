import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, List, Optional, Tuple

from pydantic import ValidationError

from genome.analysis.extract import extract_functions
from genome.analysis.profiles import C_LIKE
from genome.core.errors import GenomeError, MalformedLine, MissingField
from genome.schemas.common import Diagnostic
from genome.schemas.corpus import (
    Corpus,
    FunctionDetection,
    FunctionRecord,
    LanguageProfile,
    Token,
    TokenKind,
)
from genome.utils.jsonl import iter_jsonl, write_jsonl

logger = logging.getLogger(__name__)

# Fixed key order of the corpus JSONL format
CORPUS_FIELDS = ("function_id", "repo_id", "file_path", "name", "start_line", "end_line", "tokens")
# Column-precise span, written after the fixed fields; absent means whole lines
SPAN_FIELDS = ("start_column", "end_column")


# ---------------------------------------------------------------------------
# JSONL codec
# ---------------------------------------------------------------------------


def record_to_row(record: FunctionRecord) -> dict:
    return {
        "function_id": record.function_id,
        "repo_id": record.repo_id,
        "file_path": record.file_path,
        "name": record.name,
        "start_line": record.start_line,
        "end_line": record.end_line,
        "tokens": [t.to_row() for t in record.tokens],
        "start_column": record.start_column,
        "end_column": record.end_column,
    }


def row_to_record(row: Any, line_no: int, file_path: Optional[str] = None) -> FunctionRecord:
    if not isinstance(row, dict):
        raise MalformedLine(line_no, "expected a JSON object", file_path=file_path)
    for name in CORPUS_FIELDS:
        if name not in row:
            raise MissingField(name, line_no=line_no, file_path=file_path)
    try:
        tokens = [
            Token(kind=TokenKind(kind), lexeme=lexeme, line=line)
            for kind, lexeme, line in row["tokens"]
        ]
        return FunctionRecord(
            function_id=row["function_id"],
            repo_id=row["repo_id"],
            file_path=row["file_path"],
            name=row["name"],
            start_line=row["start_line"],
            end_line=row["end_line"],
            tokens=tokens,
            **{name: row[name] for name in SPAN_FIELDS if row.get(name) is not None},
        )
    except (ValidationError, ValueError, TypeError) as exc:
        raise MalformedLine(line_no, str(exc).splitlines()[0], file_path=file_path) from exc


def store_corpus(corpus: Corpus, path: Path) -> int:
    """Write the corpus as JSONL, one function per line, in corpus order."""
    return write_jsonl(Path(path), (record_to_row(r) for r in corpus.functions))


def read_corpus_jsonl(path: Path) -> Corpus:
    records = [row_to_record(row, line_no, str(path)) for line_no, row in iter_jsonl(Path(path))]
    return Corpus(functions=records)


# ---------------------------------------------------------------------------
# Source directories
# ---------------------------------------------------------------------------


def _extract_file(job: Tuple[str, str, str, LanguageProfile]) -> Tuple[List[FunctionRecord], List[Diagnostic]]:
    """Worker: extract one file; failures become diagnostics, never exceptions."""
    abs_path, repo_id, rel_path, profile = job
    diagnostics: List[Diagnostic] = []
    try:
        source = Path(abs_path).read_bytes().decode("utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        diagnostics.append(Diagnostic(code="unreadable_file", message=str(exc), file_path=rel_path))
        return [], diagnostics
    try:
        return extract_functions(source, profile, repo_id, rel_path, diagnostics), diagnostics
    except GenomeError as exc:
        line = getattr(exc, "line", None)
        diagnostics.append(Diagnostic(code=exc.code, message=exc.message, file_path=rel_path, line=line))
        return [], diagnostics


def _source_jobs(root: Path, profile: LanguageProfile) -> List[Tuple[str, str, str, LanguageProfile]]:
    """
    Each immediate subdirectory is one repo; loose top-level files form a
    repo named after the directory itself.
    """
    jobs = []
    for entry in sorted(root.iterdir()):
        if entry.is_dir():
            repo_id, repo_root = entry.name, entry
            files = sorted(p for p in entry.rglob("*") if p.is_file())
        elif entry.is_file():
            repo_id, repo_root = root.name, root
            files = [entry]
        else:
            continue
        for path in files:
            if path.suffix.lower() in profile.extensions:
                rel = path.relative_to(repo_root).as_posix()
                jobs.append((str(path), repo_id, rel, profile))
    return jobs


def load_corpus(
    path: Path,
    profile: Optional[LanguageProfile] = None,
    jobs: Optional[int] = None,
    diagnostics: Optional[List[Diagnostic]] = None,
) -> Corpus:
    """
    Load a pre-extracted JSONL corpus, or extract one from a source directory.

    Files that fail extraction are skipped. Their diagnostics, and the
    tokenizer recoveries of files that did extract, are logged and appended
    to ``diagnostics`` when a list is passed in.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"corpus path does not exist: {path}")
    if path.is_file():
        return read_corpus_jsonl(path)

    profile = profile or C_LIKE
    if profile.function_detection is FunctionDetection.PRE_EXTRACTED:
        records: List[FunctionRecord] = []
        for part in sorted(p for p in path.rglob("*.jsonl") if p.is_file()):
            records.extend(read_corpus_jsonl(part).functions)
        return Corpus(functions=records)

    work = _source_jobs(path, profile)
    workers = jobs or os.cpu_count() or 1
    if workers > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(work))) as executor:
            results = list(executor.map(_extract_file, work, chunksize=8))
    else:
        results = [_extract_file(job) for job in work]

    records = []
    for file_records, file_diags in results:
        records.extend(file_records)
        for diag in file_diags:
            logger.warning("%s: %s", diag.file_path, diag.message)
            if diagnostics is not None:
                diagnostics.append(diag)

    logger.info("Extracted %d function(s) from %d file(s) under %s.", len(records), len(work), path)
    return Corpus(functions=records)
