from pathlib import Path
from typing import Optional

import typer

from genome.analysis.clone import align_to_index, clone_links, detect_clones
from genome.analysis.profiles import get_profile
from genome.cli.common import (
    CONFIG_OPTION,
    FORMAT_OPTION,
    JOBS_OPTION,
    LOG_LEVEL_OPTION,
    emit,
    handle_errors,
    prepare,
)
from genome.core.config import override
from genome.db.corpus_store import load_corpus
from genome.db.index_store import load_pool


def clone_command(
    index: Path = typer.Option(..., "--index", help="Index directory."),
    target: Path = typer.Option(..., "--target", help="Target corpus JSONL or source directory."),
    theta: Optional[float] = typer.Option(None, "--theta", min=0.0, max=1.0, help="Verification threshold."),
    theta_token: Optional[float] = typer.Option(None, "--theta-token", min=0.0, max=1.0, help="Token filter threshold."),
    min_shared: Optional[int] = typer.Option(None, "--min-shared", min=1, help="Shared windows needed for a candidate."),
    n_lines: Optional[int] = typer.Option(None, "--n-lines", min=1, help="Must match the index."),
    links: bool = typer.Option(False, "--links", help="Print file-level clone links instead of pairs."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Clones of pool genes inside a target."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        cfg = override(
            ctx.config.clone,
            theta_verify=theta,
            theta_token=theta_token,
            min_shared=min_shared,
            n_lines=n_lines,
        )
        pool = load_pool(index)
        corpus = load_corpus(target, get_profile(ctx.config.profile), jobs=ctx.jobs)
        cfg = align_to_index(cfg, pool.windows)
        pairs = detect_clones(corpus.functions, pool.function_map(), pool.windows, cfg)

    if links:
        emit(ctx, clone_links(pairs), lambda rows: [
            f"{l.source} <-> {l.target}  pairs={l.pairs}  mean={l.mean_similarity:.3f}" for l in rows
        ])
        return

    def render(rows):
        lines = []
        for p in rows:
            t, s = p.side("target"), p.side("pool")
            lines.append(
                f"{p.category.value}  {p.combined:.3f}  "
                f"{t.repo_id}:{t.file_path}:{t.start_line}-{t.end_line} {t.name}  ~  "
                f"{s.repo_id}:{s.file_path}:{s.start_line}-{s.end_line} {s.name}"
            )
        return lines

    emit(ctx, pairs, render)
