import random
from pathlib import Path
from typing import List

import pytest

from genome.analysis.clone import build_window_index
from genome.analysis.extract import extract_functions, fingerprint
from genome.analysis.profiles import C_LIKE
from genome.schemas.corpus import Corpus, FunctionRecord
from genome.schemas.gene import Gene, GenePool, WindowIndex


ADD_SRC = """\
int add(int a, int b) {
    return a + b;
}
"""

UTIL_SRC = """\
int clamp(int value, int lo, int hi) {
    if (value < lo) {
        return lo;
    }
    if (value > hi) {
        return hi;
    }
    return value;
}

int twice(int x) {
    return add(x, x);
}

int sum_to(int n) {
    int total = 0;
    for (int i = 0; i < n; i++) {
        total += clamp(i, 0, n);
    }
    return total;
}
"""

RENAMED_CLAMP_SRC = """\
int bound(int v, int low, int high) {
    if (v < low) {
        return low;
    }
    if (v > high) {
        return high;
    }
    return v;
}
"""


# ---------------------------------------------------------------------------
# Generated sources
# ---------------------------------------------------------------------------

BINARY_OPS = ("+", "-", "*", "/", "%", "<", ">", "==", "!=", "&&", "||", "<<", "^")


def random_function(rng: random.Random, name: str) -> str:
    """
    One brace-bodied C function on a single line. Every operator is
    surrounded by spaces so tests can edit them textually.
    """
    params = [f"p{i}" for i in range(rng.randint(1, 3))]
    names = params + ["t0", "t1"]

    def expr(depth: int) -> str:
        if depth == 0 or rng.random() < 0.3:
            return rng.choice(names) if rng.random() < 0.7 else str(rng.randint(0, 99))
        return f"({expr(depth - 1)} {rng.choice(BINARY_OPS)} {expr(depth - 1)})"

    def stmt(depth: int) -> str:
        roll = rng.random()
        if depth > 0 and roll < 0.25:
            return f"if ({expr(2)}) {{ {block(depth - 1)} }}"
        if depth > 0 and roll < 0.4:
            return f"while ({expr(2)}) {{ {block(depth - 1)} }}"
        if roll < 0.55:
            return f"{rng.choice(names)} = helper({expr(2)});"
        return f"{rng.choice(names)} = {expr(3)};"

    def block(depth: int) -> str:
        return " ".join(stmt(depth) for _ in range(rng.randint(1, 3)))

    signature = ", ".join(f"int {p}" for p in params)
    return f"int {name}({signature}) {{ int t0 = 0; int t1 = 1; {block(2)} return {expr(2)}; }}"


def random_file(rng: random.Random, names: List[str]) -> str:
    """Functions joined by spaces, newlines or declarations, so several may share a line."""
    parts = []
    for name in names:
        parts.append(random_function(rng, name))
        parts.append(rng.choice([" ", "\n", "\n\n", " int g; ", "\n/* gap */ "]))
    return "".join(parts)


@pytest.fixture(autouse=True)
def quiet_logs(monkeypatch):
    # keeps stderr empty so CLI tests can parse stdout as JSON
    monkeypatch.setenv("SGP_LOG_LEVEL", "ERROR")
    monkeypatch.delenv("SGP_CONFIG", raising=False)
    monkeypatch.delenv("SGP_JOBS", raising=False)


def extract(source: str, repo_id: str = "repo", file_path: str = "src/main.c") -> List[FunctionRecord]:
    return extract_functions(source, C_LIKE, repo_id, file_path)


def one(source: str, repo_id: str = "repo", file_path: str = "src/main.c") -> FunctionRecord:
    records = extract(source, repo_id, file_path)
    assert len(records) == 1
    return records[0]


def pool_of(records: List[FunctionRecord], values=None, n_lines: int = 4) -> GenePool:
    """Hand-assembled pool: one gene per record, the record as exemplar."""
    genes = []
    for i, record in enumerate(records):
        genes.append(Gene(
            fingerprint=fingerprint(record),
            exemplar=record.function_id,
            value=values[i] if values is not None else 100.0,
            frequency=1,
            repos=[record.repo_id],
        ))
    return GenePool(
        genes=sorted(genes, key=lambda g: g.fingerprint),
        functions=sorted(records, key=lambda r: r.function_id),
        windows=build_window_index(records, n_lines) if records else WindowIndex(n_lines=n_lines),
    )


@pytest.fixture
def util_records() -> List[FunctionRecord]:
    return extract(UTIL_SRC, repo_id="util", file_path="util.c")


@pytest.fixture
def small_corpus() -> Corpus:
    records = (
        extract(ADD_SRC, repo_id="alpha", file_path="add.c")
        + extract(UTIL_SRC, repo_id="alpha", file_path="util.c")
        + extract(ADD_SRC, repo_id="beta", file_path="math/add.c")
        + extract(RENAMED_CLAMP_SRC, repo_id="gamma", file_path="bound.c")
    )
    return Corpus(functions=records)


@pytest.fixture
def source_tree(tmp_path: Path) -> Path:
    """Two repos laid out as subdirectories, plus a file the profile ignores."""
    root = tmp_path / "corpus"
    (root / "alpha" / "src").mkdir(parents=True)
    (root / "beta").mkdir(parents=True)
    (root / "alpha" / "src" / "add.c").write_text(ADD_SRC, encoding="utf-8")
    (root / "alpha" / "src" / "util.c").write_text(UTIL_SRC, encoding="utf-8")
    (root / "alpha" / "README.md").write_text("# alpha\n", encoding="utf-8")
    (root / "beta" / "bound.c").write_text(RENAMED_CLAMP_SRC, encoding="utf-8")
    return root
