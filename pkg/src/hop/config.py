"""Runtime configuration: packaged defaults, config file, environment overrides.

Precedence, lowest to highest: packaged data files, JSON config file,
``HOP_``-prefixed environment variables (e.g. ``HOP_TICK_RATE=200``).
Input paths must resolve at load time so failures surface at startup, not
mid-run.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional

from .errors import ConfigError

ENV_PREFIX = "HOP_"
_DATA_DIR = Path(__file__).resolve().parent / "data"

_PATH_KEYS = ("model_path", "gait_path", "calibration_path")
_ALL_KEYS = _PATH_KEYS + ("tick_rate", "log_dir", "bind_address", "port")


@dataclass(frozen=True)
class RuntimeConfig:
    model_path: Path
    gait_path: Path
    calibration_path: Path
    tick_rate: float = 100.0
    log_dir: Path = Path("logs")
    bind_address: str = "127.0.0.1"
    port: int = 8008

    def __post_init__(self):
        if not (math.isfinite(self.tick_rate) and 10.0 <= self.tick_rate <= 1000.0):
            raise ConfigError(f"tick_rate must lie in [10, 1000] Hz, got {self.tick_rate}")
        if not (isinstance(self.port, int) and 0 <= self.port <= 65535):
            raise ConfigError(f"port must lie in [0, 65535], got {self.port}")
        if not self.bind_address:
            raise ConfigError("bind_address must be non-empty")


def default_config() -> RuntimeConfig:
    return RuntimeConfig(
        model_path=_DATA_DIR / "model.json",
        gait_path=_DATA_DIR / "gait.json",
        calibration_path=_DATA_DIR / "calibration.json",
    )


def _coerce(key: str, value) -> object:
    if key in _PATH_KEYS or key == "log_dir":
        if not isinstance(value, (str, Path)) or str(value) == "":
            raise ConfigError(f"{key} must be a non-empty path, got {value!r}")
        return Path(value)
    if key == "tick_rate":
        try:
            return float(value)
        except (TypeError, ValueError):
            raise ConfigError(f"tick_rate must be a number, got {value!r}") from None
    if key == "port":
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ConfigError(f"port must be an integer, got {value!r}") from None
    if key == "bind_address":
        if not isinstance(value, str):
            raise ConfigError(f"bind_address must be a string, got {value!r}")
        return value
    raise ConfigError(f"unknown config key {key!r}")


def load_runtime_config(
    path: Optional[os.PathLike] = None,
    env: Optional[Mapping[str, str]] = None,
) -> RuntimeConfig:
    """Layer config file and HOP_ environment variables over the defaults."""
    cfg = default_config()

    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"config file {path} must hold a JSON object")
        unknown = set(doc) - set(_ALL_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)} in {path}")
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in doc.items()})

    env = os.environ if env is None else env
    overrides = {}
    for key in _ALL_KEYS:
        raw = env.get(ENV_PREFIX + key.upper())
        if raw is not None:
            overrides[key] = _coerce(key, raw)
    if overrides:
        cfg = replace(cfg, **overrides)

    for key in _PATH_KEYS:
        p = getattr(cfg, key)
        if not Path(p).is_file():
            raise ConfigError(f"{key} does not resolve to a file: {p}")
    return cfg
