"""
Run configuration. Precedence: CLI flag, then REVSPY_* environment (and .env), then a
key=value config file, then the RunConfig defaults.
"""
import logging
from typing import Any, Dict, Optional

from dotenv import dotenv_values
from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from modules.schemas.messages import RunConfig

logger = logging.getLogger(__name__)

LIST_KEYS = {"graphs", "r_values"}


class Settings(BaseSettings):
    """
    Environment overrides. REVSPY_MAX_STATES caps the solver budget.
    """
    model_config = SettingsConfigDict(env_prefix="REVSPY_", env_file=".env", extra="ignore")

    max_states: int = 5_000_000
    seed: int = 0
    workers: int = 1
    log_level: str = "INFO"


def read_config_file(path: str) -> Dict[str, Any]:
    """Line-oriented key=value file; '#' comments and blank lines are ignored."""
    values: Dict[str, Any] = {}
    for key, raw in dotenv_values(path).items():
        key = key.strip().lower().replace("-", "_")
        if raw is None:
            continue
        raw = raw.strip()
        if key in LIST_KEYS:
            values[key] = [item.strip() for item in raw.split(",") if item.strip()]
        elif key in RunConfig.model_fields:
            values[key] = raw
        else:
            logger.warning(f"Ignoring unknown config key {key!r} in {path}")
    return values


def build_run_config(config_file: Optional[str] = None, settings: Optional[Settings] = None, **flags: Any) -> RunConfig:
    """
    Merges the sources into one validated RunConfig. Flags left as None do not override.
    Raises ValueError with the offending keys on invalid values.
    """
    settings = settings or Settings()
    merged: Dict[str, Any] = {}
    if config_file:
        merged.update(read_config_file(config_file))
    for key in settings.model_fields_set & set(RunConfig.model_fields):
        merged[key] = getattr(settings, key)
    merged.update({k: v for k, v in flags.items() if v is not None})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        bad = ", ".join(".".join(str(p) for p in err["loc"]) for err in e.errors())
        raise ValueError(f"invalid configuration value(s): {bad}") from e
