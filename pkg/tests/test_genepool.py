import itertools
import math
import random
from collections import deque

import numpy as np
import pytest

from genome.analysis.extract import fingerprint
from genome.analysis.genepool import (
    build_call_graph,
    build_pool,
    centrality,
    cluster_genes,
    diff_pools,
    rank_genes,
    split_component,
)
from genome.analysis.metrics import corpus_metrics
from genome.analysis.profiles import C_LIKE
from genome.schemas.corpus import Corpus
from genome.schemas.gene import CallGraph, Gene, GenePool, RankWeights
from tests.conftest import extract, pool_of, random_function


# ---------------------------------------------------------------------------
# Call graphs
# ---------------------------------------------------------------------------


def by_name(records):
    return {r.name: r.function_id for r in records}


def test_call_edges_resolve_by_name(util_records):
    g = build_call_graph(util_records)
    ids = by_name(util_records)
    # twice calls add, which this repo does not define
    assert g.edges == [(ids["sum_to"], ids["clamp"])]
    assert g.nodes == sorted(ids.values())
    assert g.repo_id == "util"


def test_ambiguous_names_link_every_match():
    records = (
        extract("void g() { }", repo_id="r", file_path="a.c")
        + extract("void g() { }\n\nvoid f() { g(); }", repo_id="r", file_path="b.c")
    )
    g = build_call_graph(records)
    f_id = next(r.function_id for r in records if r.name == "f")
    g_ids = sorted(r.function_id for r in records if r.name == "g")
    assert g.edges == sorted((f_id, target) for target in g_ids)


def test_call_graph_rejects_several_repos(small_corpus):
    with pytest.raises(ValueError):
        build_call_graph(small_corpus.functions)


# ---------------------------------------------------------------------------
# Centrality
# ---------------------------------------------------------------------------


def test_path_centrality_anchors():
    scores = centrality(CallGraph(nodes=["a", "b", "c"], edges=[("a", "b"), ("b", "c")]))
    assert [scores[n].degree for n in "abc"] == [1, 2, 1]
    assert scores["b"].closeness == pytest.approx(1.0)
    assert scores["a"].closeness == pytest.approx(2 / 3)
    assert [scores[n].betweenness for n in "abc"] == pytest.approx([0.0, 1.0, 0.0])


def test_self_loops_and_direction_are_ignored():
    scores = centrality(CallGraph(nodes=["a", "b"], edges=[("a", "a"), ("b", "a"), ("a", "b")]))
    assert scores["a"].degree == 1
    assert scores["a"].closeness == pytest.approx(1.0)


def test_isolated_node_scores_zero():
    scores = centrality(CallGraph(nodes=["a", "b", "lonely"], edges=[("a", "b")]))
    assert scores["lonely"].closeness == 0.0
    assert scores["lonely"].degree == 0


def brute_force_centrality(nodes, edges):
    adj = {n: set() for n in nodes}
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)

    def bfs(src):
        dist, sigma = {src: 0}, {src: 1}
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in sorted(adj[u]):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    sigma[w] = 0
                    queue.append(w)
                if dist[w] == dist[u] + 1:
                    sigma[w] += sigma[u]
        return dist, sigma

    info = {n: bfs(n) for n in nodes}
    n = len(nodes)
    result = {}
    for v in nodes:
        dist = info[v][0]
        r = len(dist) - 1
        total = sum(dist.values())
        closeness = (r / (n - 1)) * (r / total) if r > 0 and n > 1 else 0.0
        between = 0.0
        for s, t in itertools.combinations([x for x in nodes if x != v], 2):
            ds, ss = info[s]
            if t not in ds or v not in ds:
                continue
            dv, sv = info[v]
            if t in dv and ds[v] + dv[t] == ds[t]:
                between += ss[v] * sv[t] / ss[t]
        result[v] = (float(len(adj[v])), closeness, between)
    return result


@pytest.mark.parametrize("seed", range(6))
def test_centrality_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 16))
    nodes = [f"n{i:02d}" for i in range(n)]
    edges = [
        (nodes[i], nodes[j])
        for i in range(n)
        for j in range(n)
        if i != j and rng.random() < 0.18
    ]
    expected = brute_force_centrality(nodes, edges)
    scores = centrality(CallGraph(nodes=nodes, edges=edges))
    for node in nodes:
        got = scores[node]
        assert (got.degree, got.closeness, got.betweenness) == pytest.approx(expected[node], abs=1e-9)


# ---------------------------------------------------------------------------
# Ranking and pools
# ---------------------------------------------------------------------------


def test_shared_fingerprint_becomes_one_gene(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    genes = rank_genes(small_corpus, RankWeights(), metrics)
    assert len(genes) == len({fingerprint(r) for r in small_corpus.functions})

    add_fp = fingerprint(next(r for r in small_corpus.functions if r.name == "add"))
    add_gene = next(g for g in genes if g.fingerprint == add_fp)
    assert add_gene.frequency == 2
    assert add_gene.repos == ["alpha", "beta"]

    # clamp (alpha) and bound (gamma) are renamed copies
    clamp_fp = fingerprint(next(r for r in small_corpus.functions if r.name == "clamp"))
    assert next(g for g in genes if g.fingerprint == clamp_fp).repos == ["alpha", "gamma"]


def test_exemplar_is_highest_value_then_lowest_id(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    genes = rank_genes(small_corpus, RankWeights(), metrics)
    adds = [r for r in small_corpus.functions if r.name == "add"]
    add_gene = next(g for g in genes if g.fingerprint == fingerprint(adds[0]))
    # identical bodies give identical values, so the id decides
    assert add_gene.exemplar == min(r.function_id for r in adds)


def test_rank_order_is_score_then_fingerprint(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    genes = rank_genes(small_corpus, RankWeights(), metrics)
    keys = [(-g.rank_score, g.fingerprint) for g in genes]
    assert keys == sorted(keys)


def test_value_only_weights_follow_value_order(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    genes = rank_genes(small_corpus, RankWeights(w_centrality=0.0, w_value=1.0), metrics)
    assert [g.value for g in genes] == sorted((g.value for g in genes), reverse=True)


def test_hand_ranked_fixture():
    source = (
        "int hub(int x) {\n  return leaf(x) + other(x);\n}\n\n"
        "int leaf(int x) {\n  return x;\n}\n\n"
        "int other(int x) {\n  return x * 2;\n}\n\n"
        "int top(int x) {\n  return hub(x);\n}\n\n"
        "int alone(int a, int b, int c) {\n  if (a) {\n    return b;\n  }\n  return c;\n}\n"
    )
    corpus = Corpus(functions=extract(source, repo_id="solo"))
    ids = by_name(corpus.functions)
    metrics = corpus_metrics(corpus.functions, C_LIKE)
    genes = rank_genes(corpus, RankWeights(w_centrality=1.0, w_value=0.0), metrics)
    exemplars = {g.exemplar: g for g in genes}

    # star around hub plus one isolated node: r=3 of n-1=4 reachable
    hub = exemplars[ids["hub"]]
    assert (hub.degree, hub.closeness, hub.betweenness) == pytest.approx((3.0, 0.75, 3.0))
    leaf = exemplars[ids["leaf"]]
    assert (leaf.degree, leaf.closeness, leaf.betweenness) == pytest.approx((1.0, 0.45, 0.0))
    # composite = (1/3 + 0.45/0.75 + 0) / 3
    assert leaf.rank_score == pytest.approx((1 / 3 + 0.6) / 3)
    assert hub.rank_score == pytest.approx(1.0)
    assert exemplars[ids["alone"]].rank_score == pytest.approx(0.0)
    assert genes[0].exemplar == ids["hub"]
    assert genes[-1].exemplar == ids["alone"]


def test_constant_metric_reports_degenerate_normalization():
    corpus = Corpus(functions=extract("int f() { return 1; }", repo_id="r"))
    metrics = corpus_metrics(corpus.functions, C_LIKE)
    diagnostics = []
    genes = rank_genes(corpus, RankWeights(), metrics, diagnostics=diagnostics)
    assert genes[0].rank_score == pytest.approx(0.5)
    assert {d.code for d in diagnostics} == {"degenerate_normalization"}
    assert len(diagnostics) == 4


def test_pool_with_full_quantile_keeps_every_fingerprint(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    pool = build_pool(small_corpus, metrics, tau=1.0, f_common=None, jobs=1)
    assert {g.fingerprint for g in pool.genes} == {fingerprint(r) for r in small_corpus.functions}
    assert [g.fingerprint for g in pool.genes] == sorted(g.fingerprint for g in pool.genes)
    assert {f.function_id for f in pool.functions} == {g.exemplar for g in pool.genes}
    assert [r.repo_id for r in pool.repos] == ["alpha", "beta", "gamma"]


def test_pool_quantile_cut(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    ranked = rank_genes(small_corpus, RankWeights(), metrics)
    pool = build_pool(small_corpus, metrics, tau=0.5, f_common=None, jobs=1)
    expected = {g.fingerprint for g in ranked[: math.ceil(0.5 * len(ranked))]}
    assert {g.fingerprint for g in pool.genes} == expected


def test_pool_common_cap_drops_shared_genes(small_corpus):
    metrics = corpus_metrics(small_corpus.functions, C_LIKE)
    pool = build_pool(small_corpus, metrics, tau=1.0, f_common=1, jobs=1)
    assert pool.genes
    assert all(g.frequency == 1 for g in pool.genes)


def test_pool_rejects_bad_quantile(small_corpus):
    with pytest.raises(ValueError):
        build_pool(small_corpus, {}, tau=1.5)


# ---------------------------------------------------------------------------
# Families and evolution
# ---------------------------------------------------------------------------


def gene(fp_digit, repos, exemplar="x"):
    return Gene(fingerprint=fp_digit * 16, exemplar=exemplar, value=1.0, frequency=len(repos), repos=repos)


def test_split_component():
    assert split_component("lib@1.2.0") == ("lib", "1.2.0")
    assert split_component("@scope/pkg@2.0.0") == ("@scope/pkg", "2.0.0")
    assert split_component("plain") == ("plain", None)


def test_clusters_by_co_existence():
    pool = GenePool(genes=[
        gene("1", ["app", "lib"]),
        gene("2", ["app", "lib"]),
        gene("3", ["tool"]),
    ])
    clusters = cluster_genes(pool, theta_co=0.5)
    assert [c.members for c in clusters] == [["1" * 16, "2" * 16], ["3" * 16]]
    assert clusters[0].repos == ["app", "lib"]


def test_clusters_by_dependency():
    pool = GenePool(genes=[gene("1", ["app@1.0.0"]), gene("2", ["util@2.0.0"]), gene("3", ["tool"])])
    clusters = cluster_genes(pool, dependency_edges=[("app", "mid"), ("mid", "util")], theta_co=1.0)
    assert [c.members for c in clusters] == [["1" * 16, "2" * 16], ["3" * 16]]


def test_identical_pools_diff_empty(small_corpus):
    pool = pool_of(small_corpus.functions[:3])
    assert diff_pools(pool, pool).is_empty


def test_diff_pairs_replacements():
    keep = extract("int keep(int a) { return a; }", repo_id="r", file_path="k.c")[0]
    old_fn = extract(
        "int walk(int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) {\n    s += i;\n  }\n  return s;\n}",
        repo_id="r", file_path="w.c",
    )[0]
    new_fn = extract(
        "int walk(int n) {\n  int s = 0;\n  for (int i = 0; i < n; i++) {\n    s -= i;\n  }\n  return s;\n}",
        repo_id="r", file_path="w.c",
    )[0]
    fresh = extract('void greet() { puts("hello"); }', repo_id="r", file_path="g.c")[0]

    diff = diff_pools(pool_of([keep, old_fn]), pool_of([keep, new_fn, fresh]), theta_repl=0.7)
    assert [(r.old, r.new) for r in diff.replaced] == [(fingerprint(old_fn), fingerprint(new_fn))]
    assert diff.replaced[0].similarity > 0.9
    assert diff.added == [fingerprint(fresh)]
    assert diff.removed == []


# ---------------------------------------------------------------------------
# Properties over generated corpora
# ---------------------------------------------------------------------------


def generated_corpus(seed, repos=4, per_repo=5):
    """Repos drawing from a shared set of functions, so some genes recur."""
    rng = random.Random(seed)
    shared = [random_function(rng, f"fn{i}") for i in range(repos * per_repo // 2)]
    records = []
    for r in range(repos):
        picks = rng.sample(shared, per_repo)
        for i, source in enumerate(picks):
            records.extend(extract(source, repo_id=f"repo{r}", file_path=f"f{i}.c"))
    return Corpus(functions=records)


@pytest.mark.parametrize("seed", range(5))
def test_raising_tau_never_drops_a_gene(seed):
    corpus = generated_corpus(seed)
    metrics = corpus_metrics(corpus.functions, C_LIKE)
    taus = sorted(random.Random(seed).random() for _ in range(5)) + [1.0]
    pools = [
        {g.fingerprint for g in build_pool(corpus, metrics, tau=tau, f_common=2, jobs=1).genes}
        for tau in taus
    ]
    for smaller, larger in zip(pools, pools[1:]):
        assert smaller <= larger


@pytest.mark.parametrize("seed", range(5))
def test_rank_is_stable_under_value_scaling(seed):
    corpus = generated_corpus(seed)
    metrics = corpus_metrics(corpus.functions, C_LIKE)
    factor = 2.0 ** random.Random(seed).randint(-4, 6)
    scaled = {fid: m.model_copy(update={"value": m.value * factor}) for fid, m in metrics.items()}

    before = rank_genes(corpus, RankWeights(), metrics)
    after = rank_genes(corpus, RankWeights(), scaled)
    assert [(g.fingerprint, g.exemplar, g.rank_score) for g in after] == [
        (g.fingerprint, g.exemplar, g.rank_score) for g in before
    ]


@pytest.mark.parametrize("seed", range(5))
def test_diff_accounts_for_every_fingerprint(seed):
    rng = random.Random(seed)
    records = generated_corpus(seed, repos=2, per_repo=6).functions
    # one record per fingerprint, as in a real pool
    unique = list({fingerprint(r): r for r in records}.values())
    old = pool_of(rng.sample(unique, len(unique) // 2))
    new = pool_of(rng.sample(unique, len(unique) // 2))
    diff = diff_pools(old, new, theta_repl=0.5)

    old_fps, new_fps = set(old.gene_map()), set(new.gene_map())
    kept = old_fps & new_fps
    parts = [set(diff.added), set(diff.removed), {r.old for r in diff.replaced}, {r.new for r in diff.replaced}, kept]
    assert sum(len(p) for p in parts) == len(old_fps | new_fps)
    assert set().union(*parts) == old_fps | new_fps
    assert {r.old for r in diff.replaced} <= old_fps - new_fps
    assert {r.new for r in diff.replaced} <= new_fps - old_fps
