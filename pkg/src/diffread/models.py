"""Request/response models for experiments, shared by the service and CLI."""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

from .physics import ArrayGeometry


def _check_grid(values: list[float], positive: bool = False) -> list[float]:
    if not values:
        raise ValueError("sweep grid must be nonempty")
    if positive and any(v <= 0.0 for v in values):
        raise ValueError("sweep grid entries must be positive")
    if len(values) > 1:
        diffs = np.diff(values)
        if not ((diffs > 0).all() or (diffs < 0).all()):
            raise ValueError("sweep grid must be strictly monotone")
    return values


class GeometryParams(BaseModel):
    """Array geometry knobs; `depth_m` defaults to wavelength/8."""

    n: int = Field(default=10, ge=1)
    pitch_m: float = Field(default=20e-6, gt=0.0)
    width_m: float = Field(default=13.9e-6, gt=0.0)
    wavelength_m: float = Field(default=635e-9, gt=0.0)
    depth_m: Optional[float] = Field(default=None, ge=0.0)
    sensor_distance_m: float = Field(default=0.93, gt=0.0)

    def resolved_depth_m(self) -> float:
        if self.depth_m is None:
            return self.wavelength_m / 8.0
        return self.depth_m

    def to_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(
            n_cantilevers=self.n,
            pitch_m=self.pitch_m,
            width_m=self.width_m,
            wavelength_m=self.wavelength_m,
            depth_m=self.resolved_depth_m(),
            sensor_distance_m=self.sensor_distance_m,
        )


def _require_even_n(geometry: GeometryParams) -> GeometryParams:
    if geometry.n % 2:
        raise ValueError("detection experiments require an even cantilever count")
    return geometry


class TerSweepConfig(BaseModel):
    """Trit-error-rate versus SNR for both detectors."""

    experiment: Literal["ter"] = "ter"
    geometry: GeometryParams = Field(default_factory=GeometryParams)
    snr_db_grid: list[float] = Field(
        default_factory=lambda: [6.0 + 0.5 * i for i in range(21)])
    trits_per_point: int = Field(default=1_000_000, ge=1)
    seed: int = 0

    @field_validator("snr_db_grid")
    @classmethod
    def _grid(cls, v):
        return _check_grid(v)

    @model_validator(mode="after")
    def _even(self):
        _require_even_n(self.geometry)
        return self


class JitterSweepConfig(BaseModel):
    """LLN versus genie detection under a global positioning error."""

    experiment: Literal["jitter"] = "jitter"
    geometry: GeometryParams = Field(default_factory=GeometryParams)
    snr_db_grid: list[float] = Field(default_factory=lambda: [8.0, 10.0, 12.0])
    frames_per_point: int = Field(default=20_000, ge=1)
    rows_per_frame: int = Field(default=400, ge=1)
    pulse_width_m: float = Field(default=2e-8, gt=0.0)
    jitter_sigma_m: float = Field(default=2e-9, ge=0.0)
    seed: int = 0

    @field_validator("snr_db_grid")
    @classmethod
    def _grid(cls, v):
        return _check_grid(v)

    @model_validator(mode="after")
    def _even(self):
        _require_even_n(self.geometry)
        return self


class PitDepthSweepConfig(BaseModel):
    """Sequence-detector TER over nanometer pit depths per laser source.

    The noise deviation is fixed so that the SNR at the optimal depth
    (wavelength/8) equals `snr_at_optimal_db`.
    """

    experiment: Literal["pitdepth"] = "pitdepth"
    n: int = Field(default=10, ge=2)
    wavelengths_nm: list[float] = Field(
        default_factory=lambda: [780.0, 650.0, 405.0])
    depth_nm_grid: list[float] = Field(
        default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0,
                                 30.0, 50.0, 80.0, 100.0])
    snr_at_optimal_db: float = 22.0
    trits_per_point: int = Field(default=1_000_000, ge=1)
    seed: int = 0

    @field_validator("depth_nm_grid")
    @classmethod
    def _grid(cls, v):
        return _check_grid(v, positive=True)

    @field_validator("wavelengths_nm")
    @classmethod
    def _wavelengths(cls, v):
        if not v or any(w <= 0.0 for w in v):
            raise ValueError("wavelengths_nm must be nonempty and positive")
        return v

    @model_validator(mode="after")
    def _even(self):
        if self.n % 2:
            raise ValueError("detection experiments require an even cantilever count")
        return self


class FresnelSweepConfig(BaseModel):
    """TER against the Fresnel number, intensity synthesized by direct
    Kirchhoff quadrature; rows at parameter 0 are the far-field baseline."""

    experiment: Literal["fresnel"] = "fresnel"
    geometry: GeometryParams = Field(default_factory=GeometryParams)
    fresnel_grid: list[float] = Field(
        default_factory=lambda: [0.001, 0.01, 0.03, 0.1, 0.3, 1.0])
    snr_db: float = 13.0
    trits_per_point: int = Field(default=200_000, ge=1)
    oversample: int = Field(default=16, ge=2)
    seed: int = 0

    @field_validator("fresnel_grid")
    @classmethod
    def _grid(cls, v):
        return _check_grid(v, positive=True)

    @model_validator(mode="after")
    def _even(self):
        _require_even_n(self.geometry)
        return self


PROFILE_PRESETS: dict[str, dict] = {
    # Five undeflected strips, 13.9 um wide on a 20 um pitch, 635 nm source,
    # observed where the Fresnel number is 0.1.
    "paper-fig4": {
        "geometry": {
            "n": 5,
            "pitch_m": 20e-6,
            "width_m": 13.9e-6,
            "wavelength_m": 635e-9,
            "sensor_distance_m": 0.2181,
        },
        "bits": "00000",
    },
}


class ProfileConfig(BaseModel):
    """Tabulate the diffraction profile over an angle window."""

    experiment: Literal["profile"] = "profile"
    preset: Optional[str] = None
    geometry: Optional[GeometryParams] = None
    bits: Optional[str] = None
    theta_max_rad: float = Field(default=0.05, gt=0.0, lt=1.5)
    n_points: int = Field(default=2001, ge=2)
    include_kirchhoff: bool = False

    @model_validator(mode="after")
    def _resolve_preset(self):
        if self.preset is not None:
            if self.preset not in PROFILE_PRESETS:
                known = ", ".join(sorted(PROFILE_PRESETS))
                raise ValueError(f"unknown preset {self.preset!r} (known: {known})")
            entry = PROFILE_PRESETS[self.preset]
            if self.geometry is None:
                self.geometry = GeometryParams(**entry["geometry"])
            if self.bits is None:
                self.bits = entry["bits"]
        if self.geometry is None:
            self.geometry = GeometryParams()
        if self.bits is None:
            self.bits = "0" * self.geometry.n
        if len(self.bits) != self.geometry.n or set(self.bits) - {"0", "1"}:
            raise ValueError("bits must be a 0/1 string of length n")
        return self

    def bit_array(self) -> np.ndarray:
        return np.array([int(c) for c in self.bits], dtype=np.uint8)


class CountRequest(BaseModel):
    """Count distinct diffraction patterns for an N-cantilever array."""

    n: int = Field(ge=1)
    method: Literal["formula", "brute_force"] = "formula"


class CountResult(BaseModel):
    n: int
    method: str
    count: int


class CurveRow(BaseModel):
    """One sweep point of one detector variant with its Wilson interval."""

    parameter: float
    trials: int
    errors: int
    ter: float
    ci_low: float
    ci_high: float
    detector: str


class ExperimentResult(BaseModel):
    experiment: str
    columns: list[str]
    rows: list[CurveRow]
    meta: dict[str, str]


class ProfileResult(BaseModel):
    experiment: str
    columns: list[str]
    rows: list[list[float]]
    meta: dict[str, str]


def config_hash(cfg: BaseModel) -> str:
    """Stable short hash of a canonicalized configuration."""
    payload = json.dumps(cfg.model_dump(mode="json"), sort_keys=True,
                         separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
