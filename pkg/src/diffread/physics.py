"""Diffraction physics of a deflected-cantilever array.

Models the intensity of monochromatic light reflected by a linear array of
N reflective strips, each either flush with the array plane or deflected
downward by the indentation depth. Two routes are provided:

* the far-field (Fraunhofer) closed form, which is the workhorse of the
  signal chain, and
* direct numerical quadrature of the Kirchhoff diffraction integral over
  every strip, used as an independent reference when the far-field
  approximation is stressed.

Conventions: the incident amplitude is 1 and all intensities are defined up
to that global scale. Angles are measured from the array normal; the angle
parameter is q = k*theta with k = 2*pi/wavelength.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FarFieldViolation, GeometryError, QuadratureNonConvergence

# Sampling points must keep clear of envelope zeros by this relative factor.
ENVELOPE_FLOOR = 1e-3

# Far-field guards: k * (distance to observation point) and k * half-width.
MIN_K_DISTANCE = 1e3
MIN_KA = 10.0

QUADRATURE_RTOL = 1e-6
_GL_PANEL_NODES = 32
_MAX_REFINEMENTS = 16


def as_bit_pattern(bits, expected_length: int | None = None) -> np.ndarray:
    """Validate and return a 0/1 indentation pattern as a uint8 array."""
    b = np.asarray(bits)
    if b.ndim != 1 or b.size == 0:
        raise ValueError("bit pattern must be a nonempty 1-D sequence")
    if not np.isin(b, (0, 1)).all():
        raise ValueError("bit pattern entries must be 0 or 1")
    if expected_length is not None and b.size != expected_length:
        raise ValueError(
            f"bit pattern has length {b.size}, expected {expected_length}")
    return b.astype(np.uint8)


@dataclass(frozen=True)
class ArrayGeometry:
    """Physical description of the cantilever array and read-out optics.

    All lengths are in meters: `n_cantilevers` strips of width `width_m`
    on a pitch of `pitch_m`, illuminated at `wavelength_m`; a recorded bit
    deflects its strip by `depth_m`; the observation plane lies
    `sensor_distance_m` away.
    """

    n_cantilevers: int
    pitch_m: float
    width_m: float
    wavelength_m: float
    depth_m: float
    sensor_distance_m: float

    def __post_init__(self):
        n = self.n_cantilevers
        if int(n) != n or n < 1:
            raise GeometryError("n_cantilevers must be a positive integer")
        if not (self.pitch_m > self.width_m > 0.0):
            raise GeometryError("require pitch_m > width_m > 0")
        if not (self.wavelength_m > 0.0):
            raise GeometryError("wavelength_m must be positive")
        if self.depth_m < 0.0:
            raise GeometryError("depth_m must be nonnegative")
        if not (self.sensor_distance_m > 0.0):
            raise GeometryError("sensor_distance_m must be positive")
        # Reject geometries where a sampling point sits on (or near) a zero
        # of the envelope: the normalization gain would blow up there.
        m = np.arange(-(n - 1), n)
        grid = 2.0 * np.pi * m / ((2 * n - 1) * self.pitch_m)
        env = _envelope_values(grid, self.wavenumber, self.width_m,
                               self.sensor_distance_m)
        if env.min() < ENVELOPE_FLOOR * env.max():
            raise GeometryError(
                "resonant geometry: a sampling point falls too close to an "
                "envelope zero (width/pitch alignment)")

    @property
    def half_width_m(self) -> float:
        return 0.5 * self.width_m

    @property
    def wavenumber(self) -> float:
        """k = 2*pi / wavelength, in rad/m."""
        return 2.0 * np.pi / self.wavelength_m

    @property
    def two_ks(self) -> float:
        """Round-trip phase 2*k*s of a deflected strip at normal incidence."""
        return 2.0 * self.wavenumber * self.depth_m

    def strip_centers_m(self) -> np.ndarray:
        """Transverse strip centers, symmetric about the array axis."""
        n = self.n_cantilevers
        return (np.arange(n) - 0.5 * (n - 1)) * self.pitch_m


@dataclass(frozen=True)
class ObservationPoint:
    """A point in the observation plane, with its derived angle bookkeeping.

    `offset_m` is the transverse offset H from the array axis,
    `distance_m` = sqrt(H^2 + V^2), `angle_rad` = atan(H/V) and
    `q` = k * angle_rad.
    """

    offset_m: float
    distance_m: float
    angle_rad: float
    q: float

    def __post_init__(self):
        if not abs(self.angle_rad) < 0.5 * np.pi:
            raise ValueError("observation angle must satisfy |theta| < pi/2")

    @staticmethod
    def from_offset(geom: ArrayGeometry, offset_m: float) -> "ObservationPoint":
        v = geom.sensor_distance_m
        theta = float(np.arctan2(offset_m, v))
        return ObservationPoint(
            offset_m=float(offset_m),
            distance_m=float(np.hypot(offset_m, v)),
            angle_rad=theta,
            q=geom.wavenumber * theta,
        )

    @staticmethod
    def from_angle(geom: ArrayGeometry, angle_rad: float) -> "ObservationPoint":
        if not abs(angle_rad) < 0.5 * np.pi:
            raise ValueError("observation angle must satisfy |theta| < pi/2")
        return ObservationPoint.from_offset(
            geom, geom.sensor_distance_m * float(np.tan(angle_rad)))

    @staticmethod
    def from_q(geom: ArrayGeometry, q: float) -> "ObservationPoint":
        return ObservationPoint.from_angle(geom, q / geom.wavenumber)


@dataclass(frozen=True)
class FourierCoefficients:
    """Complex intensity coefficients indexed n = -(N-1) .. N-1.

    Coefficients of a genuine (real) intensity are Hermitian:
    f(-n) = conj(f(n)).
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficients must form a 1-D array of odd length")
        object.__setattr__(self, "coeffs", c)

    @property
    def n_max(self) -> int:
        return (self.coeffs.size - 1) // 2

    def __getitem__(self, n: int) -> complex:
        if abs(n) > self.n_max:
            raise IndexError(f"coefficient index {n} outside +-{self.n_max}")
        return complex(self.coeffs[n + self.n_max])

    def imag_head(self, count: int) -> np.ndarray:
        """Im f(n) for n = 0 .. count-1."""
        if count > self.n_max + 1:
            raise IndexError("not enough coefficients")
        return self.coeffs[self.n_max:self.n_max + count].imag.copy()

    def hermitian_residue(self) -> float:
        """Max |f(-n) - conj(f(n))| relative to max |f|."""
        c = self.coeffs
        res = np.abs(c[::-1] - np.conj(c)).max()
        return float(res / max(np.abs(c).max(), 1e-300))


def structure_factor(bits, two_ks: float) -> FourierCoefficients:
    """Intensity coefficients f(n) of the pattern written on the medium.

    f(n) = sum_{p=0..N-1-n} exp(i * two_ks * (b[n+p] - b[p])) for n >= 0 and
    f(-n) = conj(f(n)); f(0) = N exactly.
    """
    b = as_bit_pattern(bits).astype(np.int64)
    n = b.size
    coeffs = np.empty(2 * n - 1, dtype=complex)
    coeffs[n - 1] = float(n)
    for lag in range(1, n):
        step = np.exp(1j * two_ks * (b[lag:] - b[:n - lag]))
        val = step.sum()
        coeffs[n - 1 + lag] = val
        coeffs[n - 1 - lag] = np.conj(val)
    return FourierCoefficients(coeffs)


def _envelope_values(q, k: float, width: float, v: float) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    theta = q / k
    if np.any(np.abs(theta) >= 0.5 * np.pi):
        raise ValueError("envelope undefined for |q/k| >= pi/2")
    r = v / np.cos(theta)
    sinc = np.sinc(0.5 * q * width / np.pi)
    return (k * width * width / (2.0 * np.pi * r)) * sinc * sinc


def envelope(geom: ArrayGeometry, q) -> float | np.ndarray:
    """Data-independent envelope |C(q)|^2 of the diffraction pattern.

    |C(q)|^2 = (k w^2 / (2 pi R)) * sinc^2(q w / 2) with R = sqrt(H^2 + V^2)
    evaluated at theta = q/k.
    """
    vals = _envelope_values(q, geom.wavenumber, geom.width_m,
                            geom.sensor_distance_m)
    return vals if np.ndim(q) else float(vals)


def band_intensity(coeffs: FourierCoefficients, pitch_m: float, q) -> np.ndarray:
    """Band-limited intensity sum_n f(n) exp(-i q n d), real by symmetry."""
    qa = np.atleast_1d(np.asarray(q, dtype=float))
    n = np.arange(1, coeffs.n_max + 1)
    tail = coeffs.coeffs[coeffs.n_max + 1:]
    phases = np.exp(-1j * np.outer(qa, n) * pitch_m)
    vals = coeffs.coeffs[coeffs.n_max].real + 2.0 * (phases * tail).real.sum(axis=1)
    return np.maximum(vals, 0.0)


def fraunhofer_intensity(geom: ArrayGeometry, bits, q,
                         normalized: bool = False) -> float | np.ndarray:
    """Far-field intensity |C(q)|^2 * sum_n f(n) exp(-i q n d).

    With `normalized=True` the envelope factor is replaced by 1, leaving the
    band-limited sum that the sampling/demodulation chain operates on.
    """
    b = as_bit_pattern(bits, geom.n_cantilevers)
    coeffs = structure_factor(b, geom.two_ks)
    vals = band_intensity(coeffs, geom.pitch_m, q)
    if not normalized:
        vals = vals * np.atleast_1d(
            _envelope_values(q, geom.wavenumber, geom.width_m,
                             geom.sensor_distance_m))
    return vals if np.ndim(q) else float(vals[0])


def fresnel_number(geom: ArrayGeometry) -> float:
    """F = k * ((N-1) d / 2 + w / 2)^2 / V; far field requires F << 1."""
    half_extent = (0.5 * (geom.n_cantilevers - 1) * geom.pitch_m
                   + geom.half_width_m)
    return geom.wavenumber * half_extent * half_extent / geom.sensor_distance_m


def sensor_distance_for_fresnel(geom: ArrayGeometry, fresnel: float) -> float:
    """Observation distance V that gives the requested Fresnel number."""
    if fresnel <= 0.0:
        raise ValueError("Fresnel number must be positive")
    return fresnel_number(geom) * geom.sensor_distance_m / fresnel


def _check_far_field(geom: ArrayGeometry, offsets: np.ndarray) -> None:
    k = geom.wavenumber
    a = geom.half_width_m
    if k * a < MIN_KA:
        raise FarFieldViolation(
            f"k*a = {k * a:.3g} below the far-field floor {MIN_KA:g}")
    centers = geom.strip_centers_m()
    # Undeflected strips are the closest possible reflectors.
    v = geom.sensor_distance_m
    dx = np.abs(offsets[:, None] - centers[None, :])
    lateral = np.maximum(dx - a, 0.0)
    dmin = np.hypot(lateral, v).min()
    if k * dmin < MIN_K_DISTANCE:
        raise FarFieldViolation(
            f"k*distance = {k * dmin:.3g} below the far-field floor "
            f"{MIN_K_DISTANCE:g}")


def _composite_gl_rule(lo: float, hi: float, panels: int,
                       base: tuple[np.ndarray, np.ndarray]):
    """Nodes/weights of a composite Gauss-Legendre rule on [lo, hi]."""
    bx, bw = base
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * (edges[1] - edges[0])
    mids = 0.5 * (edges[:-1] + edges[1:])
    x = (mids[:, None] + half * bx[None, :]).ravel()
    w = np.tile(half * bw, panels)
    return x, w


def _strip_fields_at(geom: ArrayGeometry, offsets: np.ndarray,
                     panels: int, base) -> np.ndarray:
    """Kirchhoff field of each strip for both bit states.

    Returns a complex array of shape (N, 2, len(offsets)): entry [n, b, j]
    is the field contribution of strip n holding bit b at observation
    offset offsets[j]. The integrand per strip is
    sqrt(2k / (pi rho)) * (1 + V/rho) * exp(i (k rho - pi/4)) with
    rho = |r(x) - r0|, weighted by the incident phase exp(i k V_n) / 4.
    """
    k = geom.wavenumber
    a = geom.half_width_m
    v = geom.sensor_distance_m
    centers = geom.strip_centers_m()
    out = np.empty((geom.n_cantilevers, 2, offsets.size), dtype=complex)
    for idx, cx in enumerate(centers):
        x, w = _composite_gl_rule(cx - a, cx + a, panels, base)
        dx = x[:, None] - offsets[None, :]
        for bit in (0, 1):
            v_n = v + bit * geom.depth_m
            rho = np.hypot(dx, v_n)
            amp = np.sqrt(2.0 * k / (np.pi * rho)) * (1.0 + v / rho)
            vals = (w[:, None] * amp * np.exp(1j * (k * rho - 0.25 * np.pi))).sum(axis=0)
            out[idx, bit] = 0.25 * np.exp(1j * k * v_n) * vals
    return out


def _initial_panels(geom: ArrayGeometry, offsets: np.ndarray) -> int:
    v = geom.sensor_distance_m
    sin_theta = np.abs(offsets) / np.hypot(offsets, v)
    swing = geom.wavenumber * geom.width_m * float(sin_theta.max(initial=0.0))
    nodes = max(64, int(np.ceil(20.0 * swing / (2.0 * np.pi))))
    return max(1, int(np.ceil(nodes / _GL_PANEL_NODES)))


def kirchhoff_strip_fields(geom: ArrayGeometry, offsets) -> np.ndarray:
    """Converged per-strip Kirchhoff fields, shape (N, 2, len(offsets)).

    Panel count doubles until the largest entry change falls below
    QUADRATURE_RTOL relative to the table maximum.
    """
    offs = np.atleast_1d(np.asarray(offsets, dtype=float))
    _check_far_field(geom, offs)
    base = np.polynomial.legendre.leggauss(_GL_PANEL_NODES)
    panels = _initial_panels(geom, offs)
    prev = _strip_fields_at(geom, offs, panels, base)
    for _ in range(_MAX_REFINEMENTS):
        panels *= 2
        cur = _strip_fields_at(geom, offs, panels, base)
        scale = np.abs(cur).max()
        if np.abs(cur - prev).max() <= QUADRATURE_RTOL * scale:
            return cur
        prev = cur
    raise QuadratureNonConvergence(
        f"strip quadrature stalled at {panels} panels")


def kirchhoff_field(geom: ArrayGeometry, bits, obs: ObservationPoint) -> complex:
    """Field at `obs` by direct quadrature of the Kirchhoff strip integrals.

    Each strip n sits at (H_n, -(V + b_n s)) and is weighted by its incident
    phase exp(i k V_n). Refinement doubles the panel count until the total
    field changes by less than QUADRATURE_RTOL (relative; an absolute
    fallback scaled to the summed strip magnitudes guards near-null points).
    """
    b = as_bit_pattern(bits, geom.n_cantilevers)
    offs = np.array([obs.offset_m], dtype=float)
    _check_far_field(geom, offs)
    base = np.polynomial.legendre.leggauss(_GL_PANEL_NODES)
    panels = _initial_panels(geom, offs)

    def total(p: int) -> tuple[complex, float]:
        table = _strip_fields_at(geom, offs, p, base)
        picked = table[np.arange(geom.n_cantilevers), b, 0]
        return picked.sum(), float(np.abs(picked).sum())

    prev, _ = total(panels)
    for _ in range(_MAX_REFINEMENTS):
        panels *= 2
        cur, strip_scale = total(panels)
        tol = QUADRATURE_RTOL * max(abs(cur), 1e-2 * strip_scale)
        if abs(cur - prev) <= tol:
            return cur
        prev = cur
    raise QuadratureNonConvergence(
        f"field quadrature stalled at {panels} panels")


def closed_form_field(geom: ArrayGeometry, bits, theta: float) -> complex:
    """Analytic far-field limit of the Kirchhoff integral at angle theta.

    Includes the (1 + cos(theta)) obliquity and the data-independent phase;
    at small angles its squared modulus matches `fraunhofer_intensity`.
    """
    b = as_bit_pattern(bits, geom.n_cantilevers)
    obs = ObservationPoint.from_angle(geom, theta)
    _check_far_field(geom, np.array([obs.offset_m]))
    k = geom.wavenumber
    a = geom.half_width_m
    d = geom.pitch_m
    s = geom.depth_m
    v = geom.sensor_distance_m
    n = geom.n_cantilevers
    r = obs.distance_m
    sin_t = np.sin(theta)
    obliquity = 1.0 + np.cos(theta)
    sinc = np.sinc(k * a * sin_t / np.pi)
    mu = k * (v + r + 0.5 * (n - 1) * d * sin_t) - 0.25 * np.pi
    idx = np.arange(n)
    terms = np.exp(1j * (k * s * b * obliquity - idx * k * d * sin_t))
    amp = np.sqrt(k * a * a / (2.0 * np.pi * r))
    return complex(amp * obliquity * sinc * np.exp(1j * mu) * terms.sum())
