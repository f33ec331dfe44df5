import hashlib
import logging
import math
import os
from typing import Any, Dict, List, Optional, Self

import tomllib

from .channel import SystemConfig
from .training_schemes import is_known_scheme

SWEEP_KINDS = ("snr", "distance", "single")

# Every accepted key with its default; the defaults reproduce the reference setup
DEFAULTS: Dict[str, Any] = {
    # Array and link
    "num_antennas": 256,
    "carrier_freq_ghz": 100.0,
    "ref_gain_db": -72.0,
    "tx_power_dbm": 30.0,
    "noise_power_dbm": -70.0,
    "coherence_param": 1.2,
    "gain_threshold": 1 / math.sqrt(2),
    "num_candidates": 3,
    "distance_samples": 6,
    "distance_samples_per_angle": [],
    "min_distance_m": 0.0,
    "universal_max_region": 1,

    # Experiment
    "sweep": "distance",
    "snr_points_db": [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
    "snr_distance_m": 10.0,
    "distances_m": [3.0, 13.0, 23.0, 33.0, 43.0, 53.0, 63.0, 73.0, 83.0, 93.0, 103.0],
    "single_theta": 0.6,
    "single_distance_m": 5.0,
    "trials": 1000,
    "seed": 0,
    "schemes": ["perfect-csi", "exhaustive", "two-phase", "far-field"],
    "output_dir": "results",
    "codebook_import": "",
    "codebook_export": "",

    # Logging
    "stdout_debug": False,
    "log_to_file": False,
    "file_debug": False,
    "journal_debug": False,
}

_POSITIVE = ("num_antennas", "carrier_freq_ghz", "coherence_param", "num_candidates", "distance_samples",
             "universal_max_region", "snr_distance_m", "single_distance_m", "trials")


class ConfigError(Exception):
    """Base class of all configuration problems."""

class ConfigNotFoundError(ConfigError):
    pass

class ConfigParseError(ConfigError):
    pass

class ConfigValidationError(ConfigError):
    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


def _check_type(key: str, value: Any) -> Any:
    """Check value against the type of the key's default; ints are accepted where floats are expected."""

    default = DEFAULTS[key]

    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigValidationError(key, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigValidationError(key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigValidationError(key, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigValidationError(key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigValidationError(key, f"expected a list, got {value!r}")
        if key == "schemes":
            if not all(isinstance(v, str) for v in value):
                raise ConfigValidationError(key, "expected a list of scheme names")
            return list(value)
        if key == "distance_samples_per_angle":
            if not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
                raise ConfigValidationError(key, "expected a list of integers")
            return list(value)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            raise ConfigValidationError(key, "expected a list of numbers")
        return [float(v) for v in value]

    return value


class ExperimentConfig:
    """Validated experiment settings: the physical setup plus sweep, output and logging options."""

    def __init__(self, values: Optional[Dict[str, Any]] = None) -> None:
        values = dict(values) if values else {}

        unknown = sorted(set(values) - set(DEFAULTS))
        if unknown:
            raise ConfigValidationError(unknown[0], "unknown key")

        resolved: Dict[str, Any] = {}
        for key, default in DEFAULTS.items():
            resolved[key] = _check_type(key, values[key]) if key in values else (list(default) if isinstance(default, list) else default)

        for key in _POSITIVE:
            if not resolved[key] > 0:
                raise ConfigValidationError(key, f"must be positive, got {resolved[key]}")
        if resolved["num_antennas"] < 2:
            raise ConfigValidationError("num_antennas", "needs at least 2 antennas")
        if resolved["seed"] < 0:
            raise ConfigValidationError("seed", "must not be negative")
        if not 0 < resolved["gain_threshold"] < 1:
            raise ConfigValidationError("gain_threshold", f"must lie in (0, 1), got {resolved['gain_threshold']}")
        if resolved["num_candidates"] > resolved["num_antennas"]:
            raise ConfigValidationError("num_candidates", "must not exceed num_antennas")
        if resolved["min_distance_m"] < 0:
            raise ConfigValidationError("min_distance_m", "must not be negative")
        per_angle = resolved["distance_samples_per_angle"]
        if per_angle and (len(per_angle) != resolved["num_antennas"] or min(per_angle) < 1):
            raise ConfigValidationError("distance_samples_per_angle", "needs one positive count per antenna")
        if resolved["sweep"] not in SWEEP_KINDS:
            raise ConfigValidationError("sweep", f"must be one of {', '.join(SWEEP_KINDS)}")
        if any(not r > 0 for r in resolved["distances_m"]):
            raise ConfigValidationError("distances_m", "distances must be positive")
        if not -1 <= resolved["single_theta"] <= 1:
            raise ConfigValidationError("single_theta", "must lie in [-1, 1]")
        if not resolved["schemes"]:
            raise ConfigValidationError("schemes", "select at least one scheme")
        for name in resolved["schemes"]:
            if not is_known_scheme(name):
                raise ConfigValidationError("schemes", f"unknown scheme '{name}'")

        self.values = resolved

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def override(self, **changes) -> Self:
        """Copy with some keys replaced (CLI flags); None values are ignored."""

        values = dict(self.values)
        values.update({k: v for k, v in changes.items() if v is not None})
        return type(self)(values)

    def system_config(self) -> SystemConfig:
        """Physical parameters in linear units."""

        v = self.values
        return SystemConfig(
            num_antennas=v["num_antennas"],
            carrier_freq=v["carrier_freq_ghz"] * 1e9,
            ref_gain=10 ** (v["ref_gain_db"] / 10),
            tx_power=10 ** ((v["tx_power_dbm"] - 30) / 10),
            noise_power=10 ** ((v["noise_power_dbm"] - 30) / 10),
            coherence_param=v["coherence_param"],
            gain_threshold=v["gain_threshold"],
            num_candidates=v["num_candidates"],
            distance_samples=v["distance_samples"],
            distance_samples_per_angle=v["distance_samples_per_angle"],
            min_distance=v["min_distance_m"],
            universal_max_region=v["universal_max_region"],
        )

    def config_hash(self) -> str:
        """SHA-256 over the sorted key=value lines of the resolved config."""

        canonical = "\n".join(f"{key}={self.values[key]!r}" for key in sorted(self.values))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def logging_options(self) -> Dict[str, Dict[str, Any]]:
        """Logging keys in the shape set_logging_config expects."""

        return {"logging": {k: self.values[k] for k in ("stdout_debug", "log_to_file", "file_debug", "journal_debug")}}


def load_config(path: Optional[str] = None) -> ExperimentConfig:
    """Read a flat TOML config file; no path means all defaults."""

    if path is None:
        logging.debug("No config file given, using defaults")
        return ExperimentConfig()

    if not os.path.exists(path):
        raise ConfigNotFoundError(f"Couldn't find config file '{path}'")

    logging.debug(f"Reading config file {path}")
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as e:
        raise ConfigParseError(f"{path}: {e}") from e

    tables: List[str] = [k for k, v in data.items() if isinstance(v, dict)]
    if tables:
        raise ConfigValidationError(tables[0], f"tables are not supported, use flat keys (in {path})")

    try:
        return ExperimentConfig(data)
    except ConfigValidationError as e:
        raise ConfigValidationError(e.field, f"{e.message} (in {path})") from e
