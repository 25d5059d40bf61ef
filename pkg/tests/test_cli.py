import json

import pytest
from typer.testing import CliRunner

from genome.analysis.extract import fingerprint
from genome.cli.router import app
from tests.conftest import RENAMED_CLAMP_SRC, one

runner = CliRunner()


def run(*args):
    return runner.invoke(app, [str(a) for a in args])


def run_json(*args, exit_code=0):
    result = run(*args)
    assert result.exit_code == exit_code, result.output
    return json.loads(result.stdout)


@pytest.fixture
def index_dir(tmp_path, source_tree):
    out = tmp_path / "index"
    summary = run_json("index", "--corpus", source_tree, "--out", out, "--tau", "1", "--f-common", "0", "--jobs", "1")
    assert (summary["functions"], summary["repos"], summary["genes"]) == (5, 2, 4)
    assert summary["diagnostics"] == []
    return out


@pytest.fixture
def target_dir(tmp_path):
    root = tmp_path / "target"
    (root / "app").mkdir(parents=True)
    (root / "app" / "bound.c").write_text(RENAMED_CLAMP_SRC, encoding="utf-8")
    return root


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# Gene pool
# ---------------------------------------------------------------------------


def test_index_is_byte_identical_across_runs(tmp_path, source_tree):
    outs = [tmp_path / "first", tmp_path / "second"]
    for out in outs:
        run_json("index", "--corpus", source_tree, "--out", out, "--tau", "1", "--f-common", "0", "--jobs", "1")

    def contents(root):
        return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}

    first, second = (contents(out) for out in outs)
    assert sorted(first) == sorted(second)
    assert first == second


def test_rank(index_dir):
    genes = run_json("rank", "--index", index_dir, "--top", 2)
    assert len(genes) == 2
    assert genes[0]["rank_score"] >= genes[1]["rank_score"]
    assert run_json("rank", "--index", index_dir, "--top", 0) == []


def test_rank_text_output(index_dir):
    result = run("rank", "--index", index_dir, "--top", 1, "--format", "text")
    assert result.exit_code == 0
    assert "score=" in result.stdout


def test_contrib(index_dir):
    repos = run_json("contrib", "--index", index_dir)
    assert sorted(r["repo_id"] for r in repos) == ["alpha", "beta"]
    assert repos[0]["contribution"] >= repos[1]["contribution"]


def test_diff_of_same_index_is_empty(index_dir):
    assert run_json("diff", "--old", index_dir, "--new", index_dir) == {"added": [], "removed": [], "replaced": []}


def test_cluster(index_dir):
    clusters = run_json("cluster", "--index", index_dir)
    members = [fp for c in clusters for fp in c["members"]]
    assert len(members) == len(set(members))


# ---------------------------------------------------------------------------
# Selection
# ---------------------------------------------------------------------------


def test_select_with_bare_threshold_config(tmp_path):
    metadata = write_jsonl(tmp_path / "repos.jsonl", [
        {"repo_id": "big", "stars": 500, "forks": 40, "issues": 20, "commits": 900, "contributors": 12},
        {"repo_id": "small", "stars": 3},
    ])
    config = tmp_path / "selection.json"
    config.write_text(json.dumps({"thresholds": {
        "stars": 100, "forks": 10, "issues": 5, "commits": 200, "contributors": 3,
    }}), encoding="utf-8")

    result = run_json("select", "--metadata", metadata, "--config", config)
    assert [r["repo_id"] for r in result["selected"]] == ["big"]
    assert [r["repo_id"] for r in result["excluded"]] == ["small"]
    assert result["lof"] == {}
    assert len(result["notices"]) == 1


# ---------------------------------------------------------------------------
# Composition analysis
# ---------------------------------------------------------------------------


def test_clone(index_dir, target_dir):
    pairs = run_json("clone", "--index", index_dir, "--target", target_dir)
    assert len(pairs) == 1
    assert pairs[0]["category"] in ("Type1", "Type2")

    links = run_json("clone", "--index", index_dir, "--target", target_dir, "--links")
    assert len(links) == 1
    assert "app:bound.c" in (links[0]["source"], links[0]["target"])


def test_clone_rejects_mismatched_n(index_dir, target_dir):
    result = run("clone", "--index", index_dir, "--target", target_dir, "--n-lines", 2)
    assert result.exit_code == 3
    assert "error[n_mismatch]" in result.output


def test_deps(tmp_path):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "ecosystem": "npm",
        "name": "app",
        "version": "1.0.0",
        "dependencies": [{"name": "a", "range": "^1.0.0"}],
    }), encoding="utf-8")
    registry = tmp_path / "registry.json"
    registry.write_text(json.dumps({
        "a": [{"version": "1.0.0", "dependencies": []}, {"version": "1.4.2", "dependencies": []}],
    }), encoding="utf-8")

    result = run_json("deps", "--manifest", manifest, "--registry", registry, "--lineage", "a")
    assert result["manifest_format"] == "canonical"
    assert result["graph"]["nodes"] == ["a@1.4.2", "app@1.0.0"]
    assert result["cycles"] == []
    assert result["lineage"] == [[{"node": "a@1.4.2", "range": "^1.0.0"}]]


def test_scan_exit_codes(tmp_path, index_dir, target_dir):
    clean = write_jsonl(tmp_path / "clean.jsonl", [
        {"id": "PKG-1", "kind": "Vulnerability", "package": "left-pad", "affected": ["<1.3.0"], "severity": 5},
    ])
    report = run_json("scan", "--target", target_dir, "--index", index_dir, "--advisories", clean)
    assert report["findings"] == []
    assert report["meta"]["notices"] == ["dependency analysis skipped: no manifest given"]
    assert "dependency_graph" not in report

    fp = fingerprint(one(RENAMED_CLAMP_SRC))
    listed = write_jsonl(tmp_path / "listed.jsonl", [
        {"id": "GENE-1", "kind": "Malicious", "gene_fingerprints": [fp], "severity": 8},
    ])
    out = tmp_path / "report.json"
    result = run("scan", "--target", target_dir, "--index", index_dir, "--advisories", listed, "--out", out)
    assert result.exit_code == 1
    report = json.loads(out.read_text(encoding="utf-8"))
    assert [f["advisory_id"] for f in report["findings"]] == ["GENE-1"]
    assert report["portrait"]["total"] == pytest.approx(0.32)


def test_scan_flags_genes_and_vulnerable_dependencies(tmp_path, index_dir, target_dir):
    manifest = tmp_path / "manifest.json"
    manifest.write_text(json.dumps({
        "ecosystem": "npm",
        "name": "app",
        "version": "1.0.0",
        "dependencies": [{"name": "left-pad", "range": "~1.2.0"}],
    }), encoding="utf-8")
    registry = tmp_path / "registry.json"
    registry.write_text(json.dumps({
        "left-pad": [{"version": "1.2.0", "dependencies": []}, {"version": "1.3.0", "dependencies": []}],
    }), encoding="utf-8")
    advisories = write_jsonl(tmp_path / "advisories.jsonl", [
        {"id": "GENE-1", "kind": "Malicious", "gene_fingerprints": [fingerprint(one(RENAMED_CLAMP_SRC))], "severity": 8},
        {"id": "PKG-1", "kind": "Vulnerability", "ecosystem": "npm", "package": "left-pad", "affected": ["<1.3.0"], "severity": 5},
    ])

    report = run_json(
        "scan", "--target", target_dir, "--index", index_dir, "--advisories", advisories,
        "--manifest", manifest, "--registry", registry,
        exit_code=1,
    )
    assert report["meta"]["notices"] == []
    assert report["dependency_graph"]["nodes"] == ["app@1.0.0", "left-pad@1.2.0"]
    assert sorted((f["advisory_id"], f["matched_via"]["kind"]) for f in report["findings"]) == [
        ("GENE-1", "GeneFingerprint"),
        ("PKG-1", "PackageRange"),
    ]


def test_scan_output_is_repeatable(tmp_path, index_dir, target_dir):
    advisories = write_jsonl(tmp_path / "advisories.jsonl", [
        {"id": "GENE-1", "kind": "Malicious", "gene_fingerprints": [fingerprint(one(RENAMED_CLAMP_SRC))], "severity": 8},
    ])
    reports = []
    for _ in range(2):
        report = run_json("scan", "--target", target_dir, "--index", index_dir, "--advisories", advisories, exit_code=1)
        del report["meta"]["generated_at"]
        reports.append(json.dumps(report))
    assert reports[0] == reports[1]


# ---------------------------------------------------------------------------
# Failures
# ---------------------------------------------------------------------------


def test_missing_corpus_exits_3(tmp_path):
    result = run("index", "--corpus", tmp_path / "nope", "--out", tmp_path / "index")
    assert result.exit_code == 3
    assert "error[" in result.output


def test_invalid_config_exits_3(tmp_path, index_dir):
    config = tmp_path / "bad.json"
    config.write_text('{"tau": 7}', encoding="utf-8")
    result = run("rank", "--index", index_dir, "--config", config)
    assert result.exit_code == 3
    assert "error[invalid_config]" in result.output


def test_bad_format_is_a_usage_error(index_dir):
    assert run("rank", "--index", index_dir, "--format", "xml").exit_code == 2


def test_missing_required_option_is_a_usage_error():
    assert run("rank").exit_code == 2
