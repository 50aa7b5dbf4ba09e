"""Configuration settings for aoilab."""

from pathlib import Path

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from aoilab.exceptions import OutputError, ParameterError


class AoiLabSettings(BaseSettings):
    """Settings for aoilab.

    Attributes:
        workers: Default number of sweep worker processes
        warmup_fraction: Fraction of computed packets excluded from statistics
        num_batches: Number of batches for batch-means confidence intervals
        tolerance_threshold: Relative-error gate used by the single-point self-test
        fcfs_warning_rho: FCFS points at or above this utilization are capped and flagged
        fcfs_packet_cap: Packet cap applied to flagged FCFS points
        log_json: Emit structured JSON log records
    """

    workers: int = Field(default=1, ge=1)
    warmup_fraction: float = Field(default=0.01, ge=0.0, lt=1.0)
    num_batches: int = Field(default=20, ge=10)
    tolerance_threshold: float = Field(default=0.05, gt=0.0)
    fcfs_warning_rho: float = Field(default=0.95, gt=0.0)
    fcfs_packet_cap: int = Field(default=200_000, ge=10)
    log_json: bool = False

    model_config = SettingsConfigDict(
        env_prefix="aoilab_",
        case_sensitive=False,
    )


# Global settings instance
_settings: AoiLabSettings | None = None


def get_settings() -> AoiLabSettings:
    """Get global settings instance.

    Returns:
        Global AoiLabSettings instance
    """
    global _settings
    if _settings is None:
        _settings = AoiLabSettings()
    return _settings


def reload_settings() -> AoiLabSettings:
    """Reload settings from environment.

    Returns:
        New AoiLabSettings instance
    """
    global _settings
    _settings = AoiLabSettings()
    return _settings


def read_key_value_config(path: Path) -> dict[str, str]:
    """Read a plain-text key=value run configuration.

    Blank lines and lines starting with # are skipped. Keys are lower-cased
    and dashes become underscores, so "warmup-frac" and "warmup_frac" match.

    Args:
        path: Config file path

    Returns:
        Mapping of key to raw string value, last occurrence winning

    Raises:
        OutputError: If the file cannot be read
        ParameterError: On a line without "="
    """
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise OutputError(f"Cannot read config file {path}: {e}") from e

    entries: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep or not key.strip():
            raise ParameterError(f"{path}:{lineno}: expected key=value, got {raw!r}", field="config")
        entries[key.strip().lower().replace("-", "_")] = value.strip()
    return entries
