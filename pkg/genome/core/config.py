import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional, TypeVar

from pydantic import BaseModel, Field, ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from genome.core.errors import InvalidConfig
from genome.schemas.advisory import PortraitWeights
from genome.schemas.clone import CloneConfig
from genome.schemas.gene import RankWeights
from genome.schemas.metrics import SelectionConfig

logger = logging.getLogger(__name__)

M = TypeVar("M", bound=BaseModel)


class Settings(BaseSettings):
    # Default config file, used when --config is not given
    CONFIG: Optional[Path] = None
    LOG_LEVEL: str = "INFO"
    # Worker cap; unset means available parallelism
    JOBS: Optional[int] = Field(None, ge=1)

    model_config = SettingsConfigDict(
        env_prefix="SGP_",
        env_file=".env",
        case_sensitive=True,
        extra="ignore",
    )


def get_settings() -> Settings:
    return Settings()


class GlobalConfig(BaseModel):
    profile: str = "c-like"
    output_format: Literal["json", "text"] = "json"
    selection: SelectionConfig = SelectionConfig()
    rank: RankWeights = RankWeights()
    tau: float = Field(0.2, ge=0, le=1)
    clone: CloneConfig = CloneConfig()
    theta_comp: float = Field(0.1, ge=0, le=1)
    theta_co: float = Field(0.5, ge=0, le=1)
    theta_repl: float = Field(0.7, ge=0, le=1)
    portrait: PortraitWeights = PortraitWeights()
    portrait_aggregation: Literal["max", "sum"] = "max"


def override(model: M, **changes: Any) -> M:
    """Re-validate ``model`` with the non-None ``changes`` applied on top of what was set."""
    changes = {k: v for k, v in changes.items() if v is not None}
    if not changes:
        return model
    data = model.model_dump(exclude_unset=True)
    data.update(changes)
    try:
        return type(model).model_validate(data)
    except ValidationError as exc:
        raise InvalidConfig(_first_error(exc)) from exc


def _first_error(exc: ValidationError) -> str:
    error = exc.errors()[0]
    where = ".".join(str(p) for p in error["loc"])
    return f"{where}: {error['msg']}" if where else error["msg"]


def load_config(path: Optional[Path] = None, settings: Optional[Settings] = None) -> GlobalConfig:
    """
    Defaults < config file. The file is ``path``, else ``SGP_CONFIG``; a bare
    selection object (top-level ``thresholds``) is accepted as well.
    """
    settings = settings or get_settings()
    path = path or settings.CONFIG
    if path is None:
        return GlobalConfig()

    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise InvalidConfig(f"{path}: expected a JSON object")
    if "thresholds" in raw and "selection" not in raw:
        raw = {"selection": raw}

    try:
        config = GlobalConfig.model_validate(raw)
    except ValidationError as exc:
        raise InvalidConfig(f"{path}: {_first_error(exc)}") from exc
    logger.debug("Loaded config from %s", path)
    return config
