"""Gene pool commands: index, rank, contrib, diff, cluster."""

from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError

from genome.analysis.depgraph import load_registry
from genome.analysis.genepool import build_pool, cluster_genes, diff_pools
from genome.analysis.metrics import corpus_metrics
from genome.analysis.profiles import get_profile
from genome.cli.common import (
    CONFIG_OPTION,
    FORMAT_OPTION,
    JOBS_OPTION,
    LOG_LEVEL_OPTION,
    emit,
    handle_errors,
    parse_weights,
    prepare,
)
from genome.core.config import override
from genome.db.corpus_store import load_corpus
from genome.db.index_store import load_pool, save_pool
from genome.schemas.common import Diagnostic
from genome.schemas.gene import RankWeights


# ---------------------------------------------------------------------------
# index
# ---------------------------------------------------------------------------


def index_command(
    corpus: Path = typer.Option(..., "--corpus", help="Corpus JSONL file or source directory (one repo per subdirectory)."),
    out: Path = typer.Option(..., "--out", help="Index directory to write."),
    n_lines: Optional[int] = typer.Option(None, "--n-lines", min=1, help="Lines per clone window."),
    profile: Optional[str] = typer.Option(None, "--profile", help="Language profile name."),
    tau: Optional[float] = typer.Option(None, "--tau", min=0.0, max=1.0, help="Top fraction of ranked genes to keep."),
    weights: Optional[str] = typer.Option(None, "--weights", help="Rank weights WC,WV summing to 1."),
    f_common: Optional[int] = typer.Option(None, "--f-common", help="Drop genes shared by more repos; 0 disables the cap."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Extract, rank and persist a gene pool."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    rank = None
    pair = parse_weights(weights)
    if pair is not None:
        try:
            rank = RankWeights(w_centrality=pair[0], w_value=pair[1])
        except ValidationError as exc:
            raise typer.BadParameter(exc.errors()[0]["msg"], param_hint="--weights") from None

    with handle_errors():
        config = override(ctx.config, profile=profile, tau=tau, rank=rank)
        config = override(config, clone=override(config.clone, n_lines=n_lines))
        cap = f_common if f_common is not None else config.selection.common_frequency_cap

        diagnostics: List[Diagnostic] = []
        lang = get_profile(config.profile)
        loaded = load_corpus(corpus, lang, jobs=ctx.jobs, diagnostics=diagnostics)
        metrics = corpus_metrics(loaded.functions, lang)
        pool = build_pool(
            loaded,
            metrics,
            weights=config.rank,
            tau=config.tau,
            f_common=cap if cap > 0 else None,
            n_lines=config.clone.n_lines,
            abstract_windows=config.clone.abstract_windows,
            jobs=ctx.jobs,
            diagnostics=diagnostics,
        )
        save_pool(pool, out)

    summary = {
        "out": str(out),
        "functions": len(loaded),
        "repos": len(loaded.repo_ids()),
        "genes": len(pool.genes),
        "windows": len(pool.windows.postings),
        "diagnostics": diagnostics,
    }
    emit(ctx, summary, lambda s: [
        f"indexed {s['functions']} function(s) from {s['repos']} repo(s) into {s['out']}",
        f"genes: {s['genes']}  windows: {s['windows']}  diagnostics: {len(s['diagnostics'])}",
    ])


# ---------------------------------------------------------------------------
# rank / contrib
# ---------------------------------------------------------------------------


def rank_command(
    index: Path = typer.Option(..., "--index", help="Index directory."),
    top: int = typer.Option(10, "--top", min=0, help="Number of genes to print."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Top-K genes by rank score."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        pool = load_pool(index)
    genes = sorted(pool.genes, key=lambda g: (-g.rank_score, g.fingerprint))[:top]
    emit(ctx, genes, lambda rows: [
        f"{g.fingerprint}  score={g.rank_score:.4f}  value={g.value:.2f}  freq={g.frequency}  exemplar={g.exemplar}"
        for g in rows
    ])


def contrib_command(
    index: Path = typer.Option(..., "--index", help="Index directory."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Per-repo code contribution, largest first."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        pool = load_pool(index)
    repos = sorted(pool.repos, key=lambda r: (-r.contribution, r.repo_id))
    emit(ctx, repos, lambda rows: [
        f"{r.repo_id}  contribution={r.contribution:.4f}  unique={r.unique_func_count}/{r.function_count}"
        for r in rows
    ])


# ---------------------------------------------------------------------------
# diff / cluster
# ---------------------------------------------------------------------------


def diff_command(
    old: Path = typer.Option(..., "--old", help="Earlier index directory."),
    new: Path = typer.Option(..., "--new", help="Later index directory."),
    theta_repl: Optional[float] = typer.Option(None, "--theta-repl", min=0.0, max=1.0, help="Similarity for a replacement."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Genes added, removed and replaced between two pools."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        config = override(ctx.config, theta_repl=theta_repl)
        result = diff_pools(load_pool(old), load_pool(new), config.theta_repl)

    def render(d):
        lines = [f"+ {fp}" for fp in d.added] + [f"- {fp}" for fp in d.removed]
        lines += [f"~ {r.old} -> {r.new} ({r.similarity:.3f})" for r in d.replaced]
        return lines or ["no changes"]

    emit(ctx, result, render)


def cluster_command(
    index: Path = typer.Option(..., "--index", help="Index directory."),
    registry: Optional[Path] = typer.Option(None, "--registry", help="Registry snapshot supplying package dependencies."),
    theta_co: Optional[float] = typer.Option(None, "--theta-co", min=0.0, max=1.0, help="Co-existence Jaccard threshold."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Gene families by co-existence and package dependencies."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        config = override(ctx.config, theta_co=theta_co)
        pool = load_pool(index)
        edges = load_registry(registry).package_edges() if registry is not None else []
        clusters = cluster_genes(pool, edges, config.theta_co)
    emit(ctx, clusters, lambda rows: [
        f"[{i}] {len(c.members)} gene(s) across {', '.join(c.repos) or '-'}: {' '.join(c.members)}"
        for i, c in enumerate(rows, start=1)
    ])
