"""Flat key = value configuration files for the experiment CLI.

One `key = value` pair per line; blank lines and `#` comments are ignored.
Unknown keys are rejected. Grids accept either a comma list ("6,8,10") or an
inclusive range "start:stop:step" ("6:16:0.5").
"""

from __future__ import annotations

import os

from pydantic import ValidationError

from .errors import ConfigError
from .models import (CountRequest, FresnelSweepConfig, JitterSweepConfig,
                     PitDepthSweepConfig, ProfileConfig, TerSweepConfig)

_GEOMETRY_KEYS = {
    "n": "int",
    "pitch_m": "float",
    "width_m": "float",
    "wavelength_m": "float",
    "depth_m": "float",
    "sensor_distance_m": "float",
}

_EXPERIMENT_SPECS: dict[str, tuple[type, dict[str, str], bool]] = {
    "ter": (TerSweepConfig,
            {"seed": "int", "trits_per_point": "int", "snr_db_grid": "grid"},
            True),
    "jitter": (JitterSweepConfig,
               {"seed": "int", "frames_per_point": "int",
                "rows_per_frame": "int", "pulse_width_m": "float",
                "jitter_sigma_m": "float", "snr_db_grid": "grid"},
               True),
    "pitdepth": (PitDepthSweepConfig,
                 {"seed": "int", "n": "int", "wavelengths_nm": "grid",
                  "depth_nm_grid": "grid", "snr_at_optimal_db": "float",
                  "trits_per_point": "int"},
                 False),
    "fresnel": (FresnelSweepConfig,
                {"seed": "int", "trits_per_point": "int",
                 "fresnel_grid": "grid", "snr_db": "float",
                 "oversample": "int"},
                True),
    "profile": (ProfileConfig,
                {"preset": "str", "bits": "str", "theta_max_rad": "float",
                 "n_points": "int", "include_kirchhoff": "bool"},
                True),
    "count": (CountRequest, {"n": "int", "method": "str"}, False),
}


def _parse_grid(raw: str, key: str) -> list[float]:
    raw = raw.strip()
    if ":" in raw:
        parts = raw.split(":")
        if len(parts) != 3:
            raise ConfigError(f"{key}: range syntax is start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError:
            raise ConfigError(f"{key}: non-numeric range bound in {raw!r}")
        if step == 0.0:
            raise ConfigError(f"{key}: range step must be nonzero")
        values = []
        count = int(round((stop - start) / step))
        for i in range(count + 1):
            v = start + i * step
            if (step > 0 and v > stop + 1e-9 * abs(step)) or \
               (step < 0 and v < stop - 1e-9 * abs(step)):
                break
            values.append(v)
        return values
    try:
        return [float(p) for p in raw.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"{key}: expected a comma list of numbers, got {raw!r}")


def _parse_value(kind: str, raw: str, key: str):
    raw = raw.strip()
    if kind == "int":
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}")
    if kind == "float":
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}")
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"{key}: expected true/false, got {raw!r}")
    if kind == "grid":
        return _parse_grid(raw, key)
    return raw


def load_config_file(path: str) -> dict[str, str]:
    """Read a key = value file into a raw string mapping."""
    if not os.path.isfile(path):
        raise ConfigError(f"config file not found: {path}")
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = text.split("=", 1)
            key = key.strip()
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            values[key] = raw.strip()
    return values


def experiment_names() -> list[str]:
    return sorted(_EXPERIMENT_SPECS)


def build_config(experiment: str, values: dict[str, str]):
    """Turn raw key/value strings into the experiment's config model."""
    if experiment not in _EXPERIMENT_SPECS:
        raise ConfigError(f"unknown experiment {experiment!r}")
    model_cls, own_keys, has_geometry = _EXPERIMENT_SPECS[experiment]
    payload: dict = {}
    geometry: dict = {}
    for key, raw in values.items():
        if key in own_keys:
            payload[key] = _parse_value(own_keys[key], raw, key)
        elif has_geometry and key in _GEOMETRY_KEYS:
            geometry[key] = _parse_value(_GEOMETRY_KEYS[key], raw, key)
        else:
            raise ConfigError(f"unknown config key {key!r} for {experiment}")
    if geometry:
        payload["geometry"] = geometry
    try:
        return model_cls(**payload)
    except ValidationError as exc:
        raise ConfigError(f"invalid {experiment} configuration: {exc}") from exc
