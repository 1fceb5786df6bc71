"""Trit detection from noisy received vectors.

Two detectors operate on the received values divided by the signal scale
sin(two_ks): a symbol-by-symbol threshold slicer on the increments, and a
maximum-likelihood sequence detector that finds the random-walk path of
partial trit sums closest (in squared distance) to the observations. The
sequence detector runs a forward surviving-path-metric recursion over a
trellis whose states at slice n are the possible partial sums -n .. +n,
followed by a traceback, at total cost O(N^2).

A law-of-large-numbers estimator recovers the jitter-degraded signal scale
from the squared increments pooled over all rows of an array read.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ArrayReadFrame, ReceivedVector
from .errors import DegenerateScale

MIN_SCALE = 1e-6


def _received_1d(received) -> np.ndarray:
    if isinstance(received, ReceivedVector):
        return received.r
    vals = np.asarray(received, dtype=float)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("received vector must be nonempty and 1-D")
    return vals


def _check_scale(scale) -> None:
    if np.min(scale) < MIN_SCALE:
        raise DegenerateScale(f"scale below {MIN_SCALE:g}")


def threshold_detect(received, scale: float) -> np.ndarray:
    """Slice each scaled increment into {-1, 0, +1}.

    y_n = (R_{n+1} - R_n) / scale; the middle decision interval is closed,
    so y = +-1/2 maps to 0.
    """
    _check_scale(scale)
    r = np.diff(_received_1d(received), prepend=0.0)
    return threshold_detect_rows(r[None, :] / scale)[0]


def threshold_detect_rows(y_rows: np.ndarray) -> np.ndarray:
    """Vectorized slicer on pre-scaled increment rows."""
    y = np.asarray(y_rows, dtype=float)
    return (y > 0.5).astype(np.int8) - (y < -0.5).astype(np.int8)


@dataclass
class TrellisColumn:
    """One slice of the sequence-detector trellis.

    `states` lists the reachable partial sums -n..+n at slice n, `spm` the
    surviving path metric per state and `backpointers` the predecessor state
    chosen for each (smallest state on ties)."""

    slice_index: int
    states: np.ndarray
    spm: np.ndarray
    backpointers: np.ndarray


def build_trellis(y) -> list[TrellisColumn]:
    """Forward surviving-path-metric pass over the scaled observations."""
    obs = np.asarray(y, dtype=float)
    cols = [TrellisColumn(0, np.array([0]), np.array([0.0]), np.array([0]))]
    for n in range(1, obs.size + 1):
        prev = cols[-1]
        states = np.arange(-n, n + 1)
        spm = np.empty(states.size)
        back = np.empty(states.size, dtype=int)
        for i, state in enumerate(states):
            best = np.inf
            best_pred = 0
            for pred in (state - 1, state, state + 1):
                if abs(pred) > n - 1:
                    continue
                val = prev.spm[pred + n - 1]
                # Strict comparison keeps the smallest predecessor on ties.
                if val < best:
                    best = val
                    best_pred = pred
            spm[i] = best + (obs[n - 1] - state) ** 2
            back[i] = best_pred
        cols.append(TrellisColumn(n, states, spm, back))
    return cols


def ml_sequence_detect(received, scale: float) -> np.ndarray:
    """Maximum-likelihood trit sequence for one received vector.

    Minimizes sum_n (R_n/scale - T_n)^2 over all partial-sum paths with
    T_0 = 0; ties are broken toward the smaller state value both at the
    final slice and during traceback.
    """
    _check_scale(scale)
    obs = _received_1d(received) / scale
    cols = build_trellis(obs)
    m = obs.size
    path = np.empty(m + 1, dtype=int)
    path[0] = 0
    path[m] = cols[m].states[np.argmin(cols[m].spm)]
    for n in range(m - 1, 0, -1):
        nxt = path[n + 1]
        best = np.inf
        best_state = 0
        for state in (nxt - 1, nxt, nxt + 1):
            if abs(state) > n:
                continue
            val = cols[n].spm[state + n]
            if val < best:
                best = val
                best_state = state
        path[n] = best_state
    return np.diff(path).astype(np.int8)


def path_metric(y, trits) -> float:
    """Squared distance of observations to a candidate trit path."""
    obs = np.asarray(y, dtype=float)
    partial = np.cumsum(np.asarray(trits, dtype=float))
    return float(((obs - partial) ** 2).sum())


def ml_sequence_detect_rows(r_rows: np.ndarray, scale) -> np.ndarray:
    """Vectorized sequence detection over many received rows.

    `r_rows` has shape (rows, M); `scale` is a scalar or a (rows, 1) column.
    Implements the same recursion and tie-breaks as `ml_sequence_detect`.
    """
    _check_scale(scale)
    y = np.asarray(r_rows, dtype=float) / scale
    rows, m = y.shape
    width = 2 * m + 1
    states = np.arange(width, dtype=float) - m
    history = np.empty((m + 1, rows, width))
    history[0] = np.inf
    history[0][:, m] = 0.0
    buf = np.empty((rows, width))
    for n in range(1, m + 1):
        prev = history[n - 1]
        cur = history[n]
        # Minimum over the left-connected predecessors T-1, T, T+1.
        np.minimum(prev[:, :-2], prev[:, 1:-1], out=cur[:, 1:-1])
        np.minimum(cur[:, 1:-1], prev[:, 2:], out=cur[:, 1:-1])
        np.minimum(prev[:, 0], prev[:, 1], out=cur[:, 0])
        np.minimum(prev[:, -2], prev[:, -1], out=cur[:, -1])
        np.subtract(y[:, n - 1:n], states[None, :], out=buf)
        buf *= buf
        cur += buf
        cur[:, :m - n] = np.inf
        cur[:, m + n + 1:] = np.inf
    path = np.empty((rows, m + 1), dtype=np.int64)
    path[:, 0] = 0
    # argmin returns the first minimum, i.e. the smallest state on ties.
    path[:, m] = np.argmin(history[m], axis=1) - m
    row_idx = np.arange(rows)
    for n in range(m - 1, 0, -1):
        nxt = path[:, n + 1]
        cand = np.stack([nxt - 1, nxt, nxt + 1], axis=1)
        valid = np.abs(cand) <= n
        idx = np.clip(cand + m, 0, width - 1)
        vals = history[n][row_idx[:, None], idx]
        vals[~valid] = np.inf
        pick = np.argmin(vals, axis=1)
        path[:, n] = cand[row_idx, pick]
    return np.diff(path, axis=1).astype(np.int8)


@dataclass(frozen=True)
class ScaleEstimate:
    """Pooled estimate of the signal scale sin(two_ks_eff), in [0, 1]."""

    scale: float
    sample_count: int
    clamped: bool


def lln_scale_from_mean_square(rr_mean, sigma: float):
    """Scale estimate sqrt(3 (mean(r^2) - 2 sigma^2) / 2), clamped to [0, 1].

    Works elementwise on arrays; returns (scale, clamped_low, clamped_high).
    """
    radicand = 1.5 * (np.asarray(rr_mean, dtype=float) - 2.0 * sigma * sigma)
    clamped_low = radicand < 0.0
    scale = np.sqrt(np.maximum(radicand, 0.0))
    clamped_high = scale > 1.0
    return np.minimum(scale, 1.0), clamped_low, clamped_high


def estimate_scale(frame, sigma: float) -> ScaleEstimate:
    """Estimate the frame's hidden signal scale from squared increments.

    Pools (R_{n+1} - R_n)^2 over every row and position of the frame; the
    population mean is (2/3) scale^2 + 2 sigma^2, so the plug-in estimate is
    sqrt(3 (mean - 2 sigma^2) / 2). Clamping to [0, 1] substitutes for
    failure on small samples and is reported via `clamped`.
    """
    rows = frame.rows if isinstance(frame, ArrayReadFrame) else np.atleast_2d(
        np.asarray(frame, dtype=float))
    if rows.size == 0:
        raise ValueError("frame must be nonempty")
    increments = np.diff(rows, axis=1, prepend=0.0)
    rr_mean = float(np.mean(increments * increments))
    scale, low, high = lln_scale_from_mean_square(rr_mean, sigma)
    return ScaleEstimate(scale=float(scale), sample_count=increments.size,
                         clamped=bool(low or high))
