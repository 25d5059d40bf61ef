"""Options, context and output helpers shared by every command."""

import json
import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Callable, Iterator, List, Optional, Tuple

import typer
from pydantic import BaseModel

from genome.core.config import GlobalConfig, Settings, get_settings, load_config, override
from genome.core.errors import GenomeError
from genome.core.log import setup_logging
from genome.schemas.common import ErrorResponse

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_INPUT = 3


# ---------------------------------------------------------------------------
# Global options
# ---------------------------------------------------------------------------

CONFIG_OPTION = typer.Option(
    None,
    "--config",
    help="JSON config file (defaults to $SGP_CONFIG).",
    dir_okay=False,
)
FORMAT_OPTION = typer.Option(None, "--format", help="Output format: json or text.")
LOG_LEVEL_OPTION = typer.Option(None, "--log-level", help="Log level for stderr diagnostics.")
JOBS_OPTION = typer.Option(None, "--jobs", min=1, help="Worker cap (default: available parallelism).")


class CommandContext(BaseModel):
    config: GlobalConfig
    settings: Settings
    jobs: Optional[int] = None

    @property
    def output_format(self) -> str:
        return self.config.output_format


def prepare(
    config_path: Optional[Path],
    output_format: Optional[str],
    log_level: Optional[str],
    jobs: Optional[int],
) -> CommandContext:
    """Settings, logging and the layered config (defaults < file < flags)."""
    settings = get_settings()
    try:
        setup_logging(log_level or settings.LOG_LEVEL)
    except ValueError as exc:
        raise typer.BadParameter(str(exc), param_hint="--log-level") from exc
    if output_format is not None and output_format not in ("json", "text"):
        raise typer.BadParameter("must be json or text", param_hint="--format")

    with handle_errors():
        config = load_config(config_path, settings)
        config = override(config, output_format=output_format)
    return CommandContext(config=config, settings=settings, jobs=jobs or settings.JOBS)


def parse_weights(text: Optional[str]) -> Optional[Tuple[float, float]]:
    """``WC,WV`` → (w_centrality, w_value)."""
    if text is None:
        return None
    parts = text.split(",")
    try:
        wc, wv = (float(p) for p in parts)
    except ValueError:
        raise typer.BadParameter("expected two comma-separated numbers WC,WV", param_hint="--weights") from None
    return wc, wv


@contextmanager
def handle_errors() -> Iterator[None]:
    """GenomeError and OSError become exit 3 with the error on stderr."""
    try:
        yield
    except GenomeError as exc:
        _report(ErrorResponse(**exc.to_dict()))
        raise typer.Exit(EXIT_INPUT) from exc
    except OSError as exc:
        where = f"{exc.filename}: " if exc.filename else ""
        _report(ErrorResponse(error="io_error", message=f"{where}{exc.strerror or exc}"))
        raise typer.Exit(EXIT_INPUT) from exc


def _report(body: ErrorResponse) -> None:
    logger.debug("Command failed: %s", body.message)
    typer.echo(f"error[{body.error}]: {body.message}", err=True)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _to_plain(payload: Any) -> Any:
    if isinstance(payload, BaseModel):
        return payload.model_dump(mode="json")
    if isinstance(payload, list):
        return [_to_plain(item) for item in payload]
    if isinstance(payload, dict):
        return {k: _to_plain(v) for k, v in payload.items()}
    return payload


def emit(ctx: CommandContext, payload: Any, render_text: Callable[[Any], List[str]]) -> None:
    if ctx.output_format == "json":
        typer.echo(json.dumps(_to_plain(payload), ensure_ascii=False, indent=2))
    else:
        for line in render_text(payload):
            typer.echo(line)
