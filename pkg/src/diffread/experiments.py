"""Seeded Monte Carlo experiments over the read channel.

Each sweep point draws its random trits and noise from a generator keyed by
(master seed, point index, chunk index), so results are reproducible and
independent of evaluation order. Every curve row carries the trial count and
a 95% Wilson interval alongside the trit error rate.
"""

from __future__ import annotations

import logging
import math
from dataclasses import replace

import numpy as np

from . import __version__ as _version
from . import detect, physics
from .channel import sigma_for_snr_db
from .errors import DegenerateDepth
from .models import (CountRequest, CountResult, CurveRow, ExperimentResult,
                     FresnelSweepConfig, JitterSweepConfig, PitDepthSweepConfig,
                     ProfileConfig, ProfileResult, TerSweepConfig, config_hash)
from .modem import (count_distinct_patterns, sampling_grid,
                    trits_to_indentations)

logger = logging.getLogger(__name__)

CURVE_COLUMNS = ["parameter", "trials", "errors", "ter", "ci_low", "ci_high",
                 "detector"]

# Detection rows (respectively frames) processed per Monte Carlo batch. Part
# of the reproducibility contract: changing these reshuffles the streams.
CHUNK_ROWS = 1 << 17
CHUNK_FRAMES = 250

_Z95 = 1.959963984540054


def wilson_interval(errors: int, trials: int,
                    z: float = _Z95) -> tuple[float, float]:
    """95% Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= errors <= trials:
        raise ValueError("errors must lie in [0, trials]")
    p = errors / trials
    zz = z * z / trials
    center = (p + 0.5 * zz) / (1.0 + zz)
    half = z * math.sqrt(p * (1.0 - p) / trials + 0.25 * zz / trials) / (1.0 + zz)
    low = 0.0 if errors == 0 else max(0.0, center - half)
    high = 1.0 if errors == trials else min(1.0, center + half)
    return low, high


def _point_rng(master_seed: int, point_index: int,
               chunk_index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=master_seed,
                                 spawn_key=(point_index, chunk_index))
    return np.random.default_rng(seq)


def _curve_row(parameter: float, trials: int, errors: int,
               detector: str) -> CurveRow:
    lo, hi = wilson_interval(errors, trials)
    return CurveRow(parameter=float(parameter), trials=int(trials),
                    errors=int(errors), ter=errors / trials,
                    ci_low=lo, ci_high=hi, detector=detector)


def _base_meta(cfg) -> dict[str, str]:
    meta = {
        "experiment": cfg.experiment,
        "tool_version": _version,
        "config_hash": config_hash(cfg),
    }
    seed = getattr(cfg, "seed", None)
    if seed is not None:
        meta["master_seed"] = str(seed)
    return meta


def _chunk_sizes(total: int, chunk: int) -> list[int]:
    sizes = [chunk] * (total // chunk)
    if total % chunk:
        sizes.append(total % chunk)
    return sizes


def _scale_or_raise(two_ks: float) -> float:
    scale = math.sin(two_ks)
    if scale < detect.MIN_SCALE:
        raise DegenerateDepth(
            f"sin(two_ks) = {scale:.2g} too small for detection")
    return scale


def _simulate_awgn_point(scale: float, sigma: float, n_trits: int,
                         trits_per_row: int, master_seed: int,
                         point_index: int) -> tuple[dict[str, int], int]:
    """Monte Carlo errors of both detectors at one (scale, sigma) point."""
    n_rows = -(-n_trits // trits_per_row)
    errors = {"threshold": 0, "ml": 0}
    for ci, rows in enumerate(_chunk_sizes(n_rows, CHUNK_ROWS)):
        rng = _point_rng(master_seed, point_index, ci)
        trits = rng.integers(-1, 2, size=(rows, trits_per_row), dtype=np.int8)
        partial = np.cumsum(trits, axis=1, dtype=np.float64)
        received = scale * partial + sigma * rng.standard_normal(partial.shape)
        y_inc = np.diff(received, axis=1, prepend=0.0) / scale
        errors["threshold"] += int(
            np.count_nonzero(detect.threshold_detect_rows(y_inc) != trits))
        errors["ml"] += int(np.count_nonzero(
            detect.ml_sequence_detect_rows(received, scale) != trits))
    return errors, n_rows * trits_per_row


def run_ter_sweep(cfg: TerSweepConfig) -> ExperimentResult:
    """Trit error rate of threshold and sequence detection over an SNR grid."""
    geom = cfg.geometry.to_geometry()
    scale = _scale_or_raise(geom.two_ks)
    trits_per_row = geom.n_cantilevers // 2
    rows: list[CurveRow] = []
    for pi, snr in enumerate(cfg.snr_db_grid):
        sigma = sigma_for_snr_db(snr, geom.depth_m, geom.wavenumber)
        errors, trials = _simulate_awgn_point(
            scale, sigma, cfg.trits_per_point, trits_per_row, cfg.seed, pi)
        for det in ("threshold", "ml"):
            rows.append(_curve_row(snr, trials, errors[det], det))
        logger.info("ter point %g dB done (%d trits)", snr, trials)
    return ExperimentResult(experiment=cfg.experiment, columns=CURVE_COLUMNS,
                            rows=rows, meta=_base_meta(cfg))


def run_jitter_experiment(cfg: JitterSweepConfig) -> ExperimentResult:
    """LLN- and genie-scaled detection under one global positioning error
    per frame; the LLN scale is pooled over all rows of the frame."""
    geom = cfg.geometry.to_geometry()
    _scale_or_raise(geom.two_ks)
    k = geom.wavenumber
    m = geom.n_cantilevers // 2
    n_rows = cfg.rows_per_frame
    variants = ("threshold-genie", "ml-genie", "threshold-lln", "ml-lln")
    rows: list[CurveRow] = []
    clamped_low_frames = 0
    clamped_high_frames = 0
    for pi, snr in enumerate(cfg.snr_db_grid):
        sigma = sigma_for_snr_db(snr, geom.depth_m, k)
        errors = dict.fromkeys(variants, 0)
        trials = 0
        for ci, frames in enumerate(_chunk_sizes(cfg.frames_per_point,
                                                 CHUNK_FRAMES)):
            rng = _point_rng(cfg.seed, pi, ci)
            jitter = rng.normal(0.0, cfg.jitter_sigma_m, size=frames)
            depth_eff = geom.depth_m * np.exp(
                -(jitter / cfg.pulse_width_m) ** 2)
            genie = np.sin(2.0 * k * depth_eff)
            trits = rng.integers(-1, 2, size=(frames, n_rows, m),
                                 dtype=np.int8)
            partial = np.cumsum(trits, axis=2, dtype=np.float64)
            received = (genie[:, None, None] * partial
                        + sigma * rng.standard_normal(partial.shape))
            increments = np.diff(received, axis=2, prepend=0.0)
            rr_mean = np.mean(increments * increments, axis=(1, 2))
            lln, low, high = detect.lln_scale_from_mean_square(rr_mean, sigma)
            clamped_low_frames += int(np.count_nonzero(low))
            clamped_high_frames += int(np.count_nonzero(high))
            flat_trits = trits.reshape(-1, m)
            flat_received = received.reshape(-1, m)
            flat_increments = increments.reshape(-1, m)
            scales = {
                "genie": np.repeat(genie, n_rows)[:, None],
                "lln": np.repeat(np.maximum(lln, detect.MIN_SCALE),
                                 n_rows)[:, None],
            }
            for kind, col in scales.items():
                thr = detect.threshold_detect_rows(flat_increments / col)
                ml = detect.ml_sequence_detect_rows(flat_received, col)
                errors[f"threshold-{kind}"] += int(
                    np.count_nonzero(thr != flat_trits))
                errors[f"ml-{kind}"] += int(
                    np.count_nonzero(ml != flat_trits))
            trials += frames * n_rows * m
        for det in variants:
            rows.append(_curve_row(snr, trials, errors[det], det))
        logger.info("jitter point %g dB done (%d trits)", snr, trials)
    meta = _base_meta(cfg)
    meta["lln_clamped_low_frames"] = str(clamped_low_frames)
    meta["lln_clamped_high_frames"] = str(clamped_high_frames)
    return ExperimentResult(experiment=cfg.experiment, columns=CURVE_COLUMNS,
                            rows=rows, meta=meta)


def run_pit_depth_sweep(cfg: PitDepthSweepConfig) -> ExperimentResult:
    """Sequence-detector TER over pit depth for each laser source, with the
    noise pinned to `snr_at_optimal_db` at depth wavelength/8."""
    m = cfg.n // 2
    rows: list[CurveRow] = []
    point_index = 0
    for wl_nm in cfg.wavelengths_nm:
        wavenumber = 2.0 * math.pi / (wl_nm * 1e-9)
        sigma = sigma_for_snr_db(cfg.snr_at_optimal_db, wl_nm * 1e-9 / 8.0,
                                 wavenumber)
        detector = f"ml-{wl_nm:g}nm"
        for depth_nm in cfg.depth_nm_grid:
            scale = _scale_or_raise(2.0 * wavenumber * depth_nm * 1e-9)
            errors, trials = _simulate_awgn_point(
                scale, sigma, cfg.trits_per_point, m, cfg.seed, point_index)
            rows.append(_curve_row(depth_nm, trials, errors["ml"], detector))
            point_index += 1
        logger.info("pit-depth sweep for %g nm done", wl_nm)
    return ExperimentResult(experiment=cfg.experiment, columns=CURVE_COLUMNS,
                            rows=rows, meta=_base_meta(cfg))


def enumerate_trit_patterns(length: int) -> np.ndarray:
    """All 3^length trit sequences, shape (3^length, length), fixed order."""
    count = 3 ** length
    values = np.arange(count)
    out = np.empty((count, length), dtype=np.int8)
    for i in range(length):
        out[:, i] = (values // 3 ** i) % 3 - 1
    return out


def kirchhoff_signal_table(geom: physics.ArrayGeometry,
                           oversample: int) -> np.ndarray:
    """Imaginary-part signal vectors for every trit pattern, synthesized by
    Kirchhoff quadrature and the sampling/demodulation chain.

    The intensity is evaluated on an `oversample`-times finer grid than the
    q_m sampling grid, low-pass filtered to the information band |n| <= N-1,
    decimated to the q_m grid, envelope-normalized and demodulated. Returns
    Im f(1..N/2) per pattern, shape (3^(N/2), N/2).
    """
    n = geom.n_cantilevers
    m = n // 2
    pitch = geom.pitch_m
    dq = 2.0 * math.pi / ((2 * n - 1) * pitch)
    total = oversample * (2 * n - 1)
    j = np.arange(total) - total // 2
    q_fine = j * dq / oversample
    theta = q_fine / geom.wavenumber
    offsets = geom.sensor_distance_m * np.tan(theta)

    table = physics.kirchhoff_strip_fields(geom, offsets)
    patterns = enumerate_trit_patterns(m)
    bit_patterns = np.stack([trits_to_indentations(t) for t in patterns])
    fields = table[np.arange(n)[None, :], bit_patterns, :].sum(axis=1)
    intensity = np.abs(fields) ** 2

    # Brick-wall low-pass to |band| <= N-1, evaluated back on the q_m grid.
    bands = np.arange(-(n - 1), n)
    project = np.exp(2j * math.pi * np.outer(j, bands) / total) / total
    coeffs = intensity @ project
    q_grid = sampling_grid(n, pitch)
    rebuild = np.exp(-1j * np.outer(bands, q_grid) * pitch)
    filtered = (coeffs @ rebuild).real

    normalized = filtered / physics.envelope(geom, q_grid)[None, :]
    demod_n = np.arange(-(n - 1), n)
    kernel = np.exp(2j * math.pi * np.outer(demod_n, demod_n) / (2 * n - 1))
    coeffs_hat = normalized @ kernel.T / (2 * n - 1)
    return coeffs_hat[:, (n - 1) + 1:(n - 1) + 1 + m].imag.copy()


def _simulate_table_point(signal_table: np.ndarray, patterns: np.ndarray,
                          scale: float, sigma: float, n_trits: int,
                          master_seed: int, point_index: int
                          ) -> tuple[dict[str, int], int]:
    """Monte Carlo detection errors when each pattern's noiseless received
    vector comes from a precomputed signal table."""
    m = patterns.shape[1]
    n_rows = -(-n_trits // m)
    errors = {"threshold": 0, "ml": 0}
    for ci, rows in enumerate(_chunk_sizes(n_rows, CHUNK_ROWS)):
        rng = _point_rng(master_seed, point_index, ci)
        idx = rng.integers(0, patterns.shape[0], size=rows)
        trits = patterns[idx]
        received = signal_table[idx] + sigma * rng.standard_normal((rows, m))
        y_inc = np.diff(received, axis=1, prepend=0.0) / scale
        errors["threshold"] += int(
            np.count_nonzero(detect.threshold_detect_rows(y_inc) != trits))
        errors["ml"] += int(np.count_nonzero(
            detect.ml_sequence_detect_rows(received, scale) != trits))
    return errors, n_rows * m


def run_fresnel_sweep(cfg: FresnelSweepConfig) -> ExperimentResult:
    """TER against the Fresnel number at fixed SNR.

    Rows at parameter 0.0 are the far-field baseline (ideal synthesis); the
    other rows use intensities from direct Kirchhoff quadrature at the
    observation distance matching each Fresnel number.
    """
    geom = cfg.geometry.to_geometry()
    scale = _scale_or_raise(geom.two_ks)
    sigma = sigma_for_snr_db(cfg.snr_db, geom.depth_m, geom.wavenumber)
    m = geom.n_cantilevers // 2
    patterns = enumerate_trit_patterns(m)
    rows: list[CurveRow] = []

    ideal_table = scale * np.cumsum(patterns, axis=1, dtype=np.float64)
    errors, trials = _simulate_table_point(
        ideal_table, patterns, scale, sigma, cfg.trits_per_point, cfg.seed, 0)
    for det in ("threshold", "ml"):
        rows.append(_curve_row(0.0, trials, errors[det], det))

    for pi, fresnel in enumerate(cfg.fresnel_grid, start=1):
        distance = physics.sensor_distance_for_fresnel(geom, fresnel)
        geom_f = replace(geom, sensor_distance_m=distance)
        table = kirchhoff_signal_table(geom_f, cfg.oversample)
        errors, trials = _simulate_table_point(
            table, patterns, scale, sigma, cfg.trits_per_point, cfg.seed, pi)
        for det in ("threshold", "ml"):
            rows.append(_curve_row(fresnel, trials, errors[det], det))
        logger.info("fresnel point F=%g done (V=%g m)", fresnel, distance)
    return ExperimentResult(experiment=cfg.experiment, columns=CURVE_COLUMNS,
                            rows=rows, meta=_base_meta(cfg))


def emit_diffraction_profile(cfg: ProfileConfig) -> ProfileResult:
    """Tabulate the far-field intensity (and optionally the Kirchhoff
    intensity) over a symmetric angle window."""
    geom = cfg.geometry.to_geometry()
    bits = cfg.bit_array()
    theta = np.linspace(-cfg.theta_max_rad, cfg.theta_max_rad, cfg.n_points)
    q = geom.wavenumber * theta
    intensity = physics.fraunhofer_intensity(geom, bits, q, normalized=False)
    columns = ["theta_rad", "intensity"]
    data = [theta, intensity]
    if cfg.include_kirchhoff:
        offsets = geom.sensor_distance_m * np.tan(theta)
        table = physics.kirchhoff_strip_fields(geom, offsets)
        fields = table[np.arange(geom.n_cantilevers), bits, :].sum(axis=0)
        data.append(np.abs(fields) ** 2)
        columns.append("kirchhoff_intensity")
    rows = [[float(col[i]) for col in data] for i in range(theta.size)]
    return ProfileResult(experiment=cfg.experiment, columns=columns,
                         rows=rows, meta=_base_meta(cfg))


def run_count(req: CountRequest) -> CountResult:
    return CountResult(n=req.n, method=req.method,
                       count=count_distinct_patterns(req.n, req.method))
