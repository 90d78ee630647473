"""Process-wide runtime settings.

Values come from the environment (prefix ``LFM_``) or a local ``.env``
file; CLI global flags override them per invocation.
"""

from __future__ import annotations

from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Runtime knobs that are not part of an experiment's config.

    Attributes:
        log_level: Root log level name.
        log_format: ``console`` for key/value lines, ``json`` for JSON lines.
        threads: Worker threads for gradient and ranking computation.
        deterministic: Serial, seed-reproducible execution.
        seed: Default master seed when a command is not given one.
    """

    model_config = SettingsConfigDict(
        env_prefix="LFM_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = Field(default="INFO")
    log_format: Literal["console", "json"] = Field(default="console")
    threads: int = Field(default=1, ge=1)
    deterministic: bool = Field(default=True)
    seed: int = Field(default=0, ge=0)


def get_settings(**overrides: object) -> RuntimeSettings:
    """Build settings from the environment, applying non-None overrides.

    Args:
        **overrides: Field values that take precedence (``None`` is skipped).

    Returns:
        Resolved RuntimeSettings.
    """
    values = {k: v for k, v in overrides.items() if v is not None}
    return RuntimeSettings(**values)  # type: ignore[arg-type]
