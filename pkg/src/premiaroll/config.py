"""Flat key=value run configuration with environment and flag overrides."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

ENV_PREFIX = "PREMIAROLL_"


class ConfigError(ValueError):
    pass


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; blank lines and # comments are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"config line {lineno}: empty key")
        out[key] = value.strip()
    return out


def _env_overrides(values: dict[str, str], environ: Mapping[str, str]) -> None:
    # PREMIAROLL_WINDOW=600 overrides key "window"; for dotted keys the env
    # name uses underscores and matches any key already present in the file.
    normalized = {k.lower().replace(".", "_"): k for k in values}
    for name, value in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        stem = name[len(ENV_PREFIX):].lower()
        key = normalized.get(stem, stem)
        values[key] = value


@dataclass
class RunConfig:
    """Merged run settings; precedence is file < environment < overrides."""

    values: dict[str, str] = field(default_factory=dict)

    def get(self, key: str, default: str | None = None) -> str | None:
        return self.values.get(key, default)

    def require(self, key: str) -> str:
        if key not in self.values:
            raise ConfigError(f"missing required config key {key!r}")
        return self.values[key]

    def get_int(self, key: str, default: int) -> int:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be an integer, got {raw!r}") from None

    def get_float(self, key: str, default: float) -> float:
        raw = self.values.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be a number, got {raw!r}") from None

    def get_bool(self, key: str, default: bool) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"config key {key!r} must be a boolean, got {raw!r}")

    def get_list(self, key: str) -> list[str]:
        raw = self.values.get(key, "")
        return [item.strip() for item in raw.split(",") if item.strip()]

    def keys_with_prefix(self, prefix: str) -> dict[str, str]:
        return {k: v for k, v in self.values.items() if k.startswith(prefix)}


def load_config(
    path: str | Path | None = None,
    environ: Mapping[str, str] | None = None,
    overrides: Mapping[str, str] | None = None,
) -> RunConfig:
    """Build the effective configuration from file, environment, and overrides."""
    values: dict[str, str] = {}
    if path is not None:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        values.update(parse_config_text(file_path.read_text(encoding="utf-8")))
    if environ is not None:
        _env_overrides(values, environ)
    if overrides:
        values.update({k: str(v) for k, v in overrides.items()})
    return RunConfig(values)
