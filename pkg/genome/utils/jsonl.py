import json
from pathlib import Path
from typing import Any, Iterable, Iterator, Tuple

from genome.core.errors import MalformedLine


def dumps_line(obj: Any, sort_keys: bool = False) -> str:
    """One compact JSON object, UTF-8 friendly, no trailing newline."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=sort_keys, separators=(",", ":"))


def iter_jsonl(path: Path) -> Iterator[Tuple[int, Any]]:
    """Yield (1-based line number, decoded object), skipping blank lines."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                yield line_no, json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLine(line_no, exc.msg, file_path=str(path)) from exc


def write_jsonl(path: Path, rows: Iterable[Any], sort_keys: bool = False) -> int:
    count = 0
    # newline="\n" keeps LF on every platform
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fh.write(dumps_line(row, sort_keys=sort_keys))
            fh.write("\n")
            count += 1
    return count


def write_json(path: Path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2))
        fh.write("\n")
