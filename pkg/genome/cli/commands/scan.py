import json
from pathlib import Path
from typing import List, Optional

import typer

from genome.analysis.sca import scan
from genome.cli.common import (
    CONFIG_OPTION,
    EXIT_FINDINGS,
    FORMAT_OPTION,
    JOBS_OPTION,
    LOG_LEVEL_OPTION,
    handle_errors,
    prepare,
)
from genome.core.config import override
from genome.schemas.report import ScaReport


def _render_text(report: ScaReport) -> List[str]:
    lines = [f"target: {report.meta.target}  generated: {report.meta.generated_at}"]
    for c in report.components:
        version = f"@{c.version}" if c.version else ""
        lines.append(f"component {c.component}{version}  likelihood={c.likelihood:.3f}  genes={len(c.matched_genes)}")
    lines.append(f"clones: {len(report.clones)}")
    if report.dependency_graph is not None:
        lines.append(f"dependencies: {len(report.dependency_graph.nodes) - 1}")
    for f in report.findings:
        where = f.matched_via.node or f.matched_via.function_id
        lines.append(f"finding {f.advisory_id}  {f.dimension.value}  severity={f.severity}  via {f.matched_via.kind} {where}")
    lines.append(f"portrait: {report.portrait.total:.3f}")
    lines += [f"note: {n}" for n in report.meta.notices]
    return lines


def scan_command(
    target: Path = typer.Option(..., "--target", help="Target corpus JSONL or source directory."),
    index: Path = typer.Option(..., "--index", help="Index directory."),
    advisories: Path = typer.Option(..., "--advisories", help="Advisory JSONL."),
    manifest: Optional[Path] = typer.Option(None, "--manifest", help="Target manifest (enables dependency analysis)."),
    registry: Optional[Path] = typer.Option(None, "--registry", help="Registry snapshot JSON."),
    out: Optional[Path] = typer.Option(None, "--out", help="Write the report here instead of stdout."),
    theta_comp: Optional[float] = typer.Option(None, "--theta-comp", min=0.0, max=1.0, help="Minimum component likelihood."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Full composition analysis; exits 1 when findings are present."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        config = override(ctx.config, theta_comp=theta_comp)
        report = scan(
            target,
            index,
            advisories,
            manifest=manifest,
            registry=registry,
            config=config,
            jobs=ctx.jobs,
        )

    if ctx.output_format == "json":
        text = json.dumps(report.to_json_dict(), ensure_ascii=False, indent=2)
    else:
        text = "\n".join(_render_text(report))

    if out is not None:
        with handle_errors():
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text + "\n")
    else:
        typer.echo(text)

    if report.has_findings:
        raise typer.Exit(EXIT_FINDINGS)
