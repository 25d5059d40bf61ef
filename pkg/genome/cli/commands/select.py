from pathlib import Path
from typing import List, Optional

import typer
from pydantic import ValidationError

from genome.analysis.metrics import prioritize_excluded, select_repos
from genome.cli.common import (
    CONFIG_OPTION,
    FORMAT_OPTION,
    JOBS_OPTION,
    LOG_LEVEL_OPTION,
    emit,
    handle_errors,
    prepare,
)
from genome.core.errors import MalformedLine
from genome.schemas.metrics import RepoMetadata, SelectionResult
from genome.utils.jsonl import iter_jsonl


def load_metadata(path: Path) -> List[RepoMetadata]:
    repos = []
    for line_no, row in iter_jsonl(path):
        try:
            repos.append(RepoMetadata.model_validate(row))
        except ValidationError as exc:
            raise MalformedLine(line_no, str(exc.errors()[0]["msg"]), file_path=str(path)) from exc
    return repos


def select_command(
    metadata: Path = typer.Option(..., "--metadata", help="Repository metadata JSONL."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Partition repositories by thresholds and queue the excluded ones by outlierness."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    cfg = ctx.config.selection
    with handle_errors():
        repos = load_metadata(metadata)
        selected, excluded = select_repos(repos, cfg)
        ranked = prioritize_excluded(excluded, cfg.lof_k)

    notices = []
    if any(score is None for _, score in ranked) or not excluded:
        notices.append(
            f"LOF prioritization skipped: {len(excluded)} excluded repo(s) for k={cfg.lof_k}"
        )
    result = SelectionResult(
        selected=selected,
        excluded=excluded,
        prioritized=[repo for repo, _ in ranked],
        lof={repo.repo_id: score for repo, score in ranked if score is not None},
        notices=notices,
    )

    def render(r: SelectionResult) -> List[str]:
        lines = [f"selected ({len(r.selected)}): {' '.join(x.repo_id for x in r.selected)}"]
        lines.append(f"excluded ({len(r.excluded)}): {' '.join(x.repo_id for x in r.excluded)}")
        for repo in r.prioritized:
            score = r.lof.get(repo.repo_id)
            lines.append(f"  {repo.repo_id}  lof={score:.4f}" if score is not None else f"  {repo.repo_id}")
        return lines + [f"note: {n}" for n in r.notices]

    emit(ctx, result, render)
