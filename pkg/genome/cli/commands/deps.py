from pathlib import Path
from typing import Optional

import typer

from genome.analysis.depgraph import detect_cycles, lineage_paths, load_manifest, load_registry, resolve
from genome.cli.common import (
    CONFIG_OPTION,
    FORMAT_OPTION,
    JOBS_OPTION,
    LOG_LEVEL_OPTION,
    emit,
    handle_errors,
    prepare,
)


def deps_command(
    manifest: Path = typer.Option(..., "--manifest", help="Canonical manifest, package.json or requirements file."),
    registry: Path = typer.Option(..., "--registry", help="Registry snapshot JSON."),
    lineage: Optional[str] = typer.Option(None, "--lineage", help="Package (name or name@version) to trace to the root."),
    ecosystem: Optional[str] = typer.Option(None, "--ecosystem", help="Manifest format hint: canonical, package.json, requirements."),
    config_path: Optional[Path] = CONFIG_OPTION,
    output_format: Optional[str] = FORMAT_OPTION,
    log_level: Optional[str] = LOG_LEVEL_OPTION,
    jobs: Optional[int] = JOBS_OPTION,
):
    """Resolve a manifest against a registry snapshot."""
    ctx = prepare(config_path, output_format, log_level, jobs)
    with handle_errors():
        root = load_manifest(manifest, ecosystem)
        graph = resolve(root, load_registry(registry))
        result = {
            "manifest_format": root.source_format,
            "graph": graph,
            "cycles": detect_cycles(graph),
        }
        if lineage is not None:
            result["lineage"] = lineage_paths(graph, lineage)

    def render(r):
        g = r["graph"]
        lines = [f"root {g.root} ({r['manifest_format']})"]
        lines += [f"  {e.source} -> {e.target}  [{e.range}]" for e in g.edges]
        lines += [f"cycle: {' -> '.join(c)}" for c in r["cycles"]]
        for path in r.get("lineage", []):
            lines.append("lineage: " + " -> ".join([g.root] + [f"{s.node} [{s.range}]" for s in path]))
        return lines

    emit(ctx, result, render)
