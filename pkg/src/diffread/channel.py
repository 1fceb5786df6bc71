"""Noise and jitter impairments of the Fourier-domain read signal.

The received values are the imaginary parts of the intensity coefficients
plus white Gaussian noise: R_n = sin(two_ks) * sum_{p<n} t_p + sigma * W_n
for n = 1 .. N/2, with the implicit anchor R_0 = 0. A whole-array read may
additionally suffer one global positioning error that shrinks the effective
indentation depth for every row of the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ZeroNoise
from .modem import as_trit_sequence
from .physics import ArrayGeometry


@dataclass(frozen=True)
class NoiseParams:
    """White Gaussian noise of deviation `sigma` on each received value."""

    sigma: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0.0:
            raise ValueError("sigma must be nonnegative")


@dataclass(frozen=True)
class JitterParams:
    """Global positioning error: deviation `sigma_j_m` against the read-back
    pulse width `pulse_width_m` (both in meters)."""

    sigma_j_m: float
    pulse_width_m: float

    def __post_init__(self):
        if self.sigma_j_m < 0.0:
            raise ValueError("sigma_j_m must be nonnegative")
        if self.pulse_width_m <= 0.0:
            raise ValueError("pulse_width_m must be positive")


@dataclass(frozen=True)
class ReceivedVector:
    """Noisy observations R_1 .. R_{N/2}; R_0 = 0 is implicit."""

    r: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.r, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("received vector must be nonempty and 1-D")
        if not np.isfinite(vals).all():
            raise ValueError("received values must be finite")
        object.__setattr__(self, "r", vals)

    def increments(self) -> np.ndarray:
        """r_n = R_{n+1} - R_n for n = 0 .. N/2-1 (with R_0 = 0)."""
        return np.diff(self.r, prepend=0.0)


@dataclass(frozen=True)
class ArrayReadFrame:
    """One multi-row array read sharing a single positioning error.

    `rows` has shape (n_rows, N/2). The hidden truth of the read is kept for
    genie-mode evaluation: `effective_depth_m` and the corresponding phase
    `two_ks_eff` (genie detectors use sin(two_ks_eff))."""

    rows: np.ndarray
    effective_depth_m: float
    two_ks_eff: float

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=float)
        if rows.ndim != 2:
            raise ValueError("rows must form a 2-D array")
        object.__setattr__(self, "rows", rows)

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def genie_scale(self) -> float:
        return float(np.sin(self.two_ks_eff))

    def row(self, index: int) -> ReceivedVector:
        return ReceivedVector(self.rows[index])


def transmit(trits, two_ks_eff: float, noise: NoiseParams,
             rng: np.random.Generator | None = None) -> ReceivedVector:
    """R_n = sin(two_ks_eff) * sum_{p<n} t_p + sigma * W_n, deterministic
    for a given seed (a fresh generator is derived from `noise.seed` unless
    `rng` is supplied)."""
    t = as_trit_sequence(trits)
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    signal = math.sin(two_ks_eff) * np.cumsum(t, dtype=float)
    w = rng.standard_normal(t.size)
    return ReceivedVector(signal + noise.sigma * w)


def snr_db(depth_m: float, wavenumber: float, sigma: float) -> float:
    """SNR in dB of the increment signal: 10 log10(sin^2(2ks) / (3 sigma^2))."""
    if sigma <= 0.0:
        raise ZeroNoise("SNR undefined for sigma <= 0")
    sig = math.sin(2.0 * wavenumber * depth_m)
    if sig == 0.0:
        return -math.inf
    return 10.0 * math.log10(sig * sig / (3.0 * sigma * sigma))


def sigma_for_snr_db(target_snr_db: float, depth_m: float,
                     wavenumber: float) -> float:
    """Noise deviation giving the requested SNR at the given depth."""
    sig = abs(math.sin(2.0 * wavenumber * depth_m))
    return sig / math.sqrt(3.0 * 10.0 ** (target_snr_db / 10.0))


def optimal_pit_depth(wavelength_m: float) -> float:
    """Depth maximizing the SNR at fixed noise: wavelength / 8."""
    if wavelength_m <= 0.0:
        raise ValueError("wavelength must be positive")
    return wavelength_m / 8.0


def effective_depth(depth_m: float, j_m: float, jitter: JitterParams) -> float:
    """Depth seen by a read offset by j: s * exp(-(j/PW)^2) <= s."""
    if depth_m < 0.0:
        raise ValueError("depth must be nonnegative")
    ratio = j_m / jitter.pulse_width_m
    return depth_m * math.exp(-ratio * ratio)


def simulate_array_read(rows_of_trits, geom: ArrayGeometry,
                        noise: NoiseParams, jitter: JitterParams,
                        rng: np.random.Generator | None = None) -> ArrayReadFrame:
    """Read a stack of trit rows under one shared positioning error.

    Draws a single J ~ N(0, sigma_j^2) for the frame, shrinks the depth to
    s_i = s * exp(-(J/PW)^2), then transmits every row at
    two_ks_eff = 2 k s_i with independent per-row noise."""
    trits = np.atleast_2d(np.asarray(rows_of_trits))
    if not np.isin(trits, (-1, 0, 1)).all():
        raise ValueError("trit entries must be -1, 0 or +1")
    if rng is None:
        rng = np.random.default_rng(noise.seed)
    j = rng.normal(0.0, jitter.sigma_j_m) if jitter.sigma_j_m > 0.0 else 0.0
    s_eff = effective_depth(geom.depth_m, j, jitter)
    two_ks_eff = 2.0 * geom.wavenumber * s_eff
    signal = math.sin(two_ks_eff) * np.cumsum(trits, axis=1, dtype=float)
    rows = signal + noise.sigma * rng.standard_normal(trits.shape)
    return ArrayReadFrame(rows=rows, effective_depth_m=s_eff,
                          two_ks_eff=two_ks_eff)
