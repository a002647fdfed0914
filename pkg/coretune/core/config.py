"""
Configuration management for coretune
"""
import logging
from pathlib import Path
from typing import Dict, List, Union

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from coretune.core.exceptions import ConfigError
from coretune.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process-level settings"""

    model_config = SettingsConfigDict(env_file=".env", env_prefix="CORETUNE_", extra="ignore")

    # Application
    APP_NAME: str = "coretune"
    APP_ENV: str = "development"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_JSON: bool = True

    # Outputs
    OUTPUT_ROOT: str = "runs"

    @property
    def is_production(self) -> bool:
        """Check if running in production environment"""
        return self.APP_ENV.lower() in ["production", "prod"]

    @property
    def is_development(self) -> bool:
        """Check if running in development environment"""
        return self.APP_ENV.lower() in ["development", "dev"]


settings = Settings()


def parse_key_values(text: str, source: str = "<config>") -> Dict[str, str]:
    """Parse the flat key=value format: one assignment per line, '#' comments"""
    values: Dict[str, str] = {}
    errors: List[str] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            errors.append(f"line {lineno}: expected key=value, got {raw.strip()!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            errors.append(f"line {lineno}: empty key")
            continue
        if key in values:
            errors.append(f"line {lineno}: duplicate key {key!r}")
            continue
        values[key] = value

    if errors:
        raise ConfigError(f"Cannot parse {source}", errors=errors)
    return values


def build_run_config(values: Dict[str, object]) -> RunConfig:
    """Validate raw values into a RunConfig, turning pydantic errors into field messages"""
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        errors = []
        for err in e.errors():
            field = ".".join(str(part) for part in err["loc"]) or "<config>"
            errors.append(f"{field}: {err['msg']}")
        raise ConfigError("Invalid run configuration", errors=errors)


def load_run_config(path: Union[str, Path, None]) -> RunConfig:
    """Load a run configuration file; a missing path yields the defaults"""
    if path is None:
        return RunConfig()

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e.strerror}")

    values = parse_key_values(text, source=str(path))
    config = build_run_config(values)
    logger.info(f"Loaded run config from {path} ({len(values)} explicit keys)")
    return config


def dump_run_config(config: RunConfig) -> str:
    """Render a fully resolved config in the same key=value format"""
    lines = ["# resolved run configuration"]
    for key, value in config.model_dump(mode="json").items():
        if value is None:
            lines.append(f"# {key} =")
        elif isinstance(value, bool):
            lines.append(f"{key} = {'true' if value else 'false'}")
        elif isinstance(value, list):
            lines.append(f"{key} = {','.join(str(v) for v in value)}")
        else:
            lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"
