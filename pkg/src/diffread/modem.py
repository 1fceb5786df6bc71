"""Ternary modulation layer.

User bits are carried by balanced-ternary symbols ("trits", values -1/0/+1)
that map onto mirror-paired indentations of the cantilever array. The trits
ride on the imaginary parts of the intensity coefficients, sampled on the
Nyquist-minimal grid and recovered by a discrete Fourier transform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import physics
from .errors import (DegenerateDepth, MalformedHeader, NotNormalized,
                     OddLength, OutOfRangeBlock, TooLarge)
from .physics import ArrayGeometry, FourierCoefficients, as_bit_pattern

BITS_PER_BLOCK = 7
TRITS_PER_BLOCK = 5
_BLOCK_SPACE = 3 ** TRITS_PER_BLOCK            # 243 representable blocks
_MAX_BLOCK_VALUE = 2 ** BITS_PER_BLOCK - 1     # 127
_MAX_PAD = BITS_PER_BLOCK - 1

BRUTE_FORCE_CAP = 12
FORMULA_CAP = 20

MIN_SIN_TWO_KS = 1e-6


def as_trit_sequence(trits, expected_length: int | None = None) -> np.ndarray:
    """Validate and return a -1/0/+1 sequence as an int8 array."""
    t = np.asarray(trits)
    if t.ndim != 1:
        raise ValueError("trit sequence must be 1-D")
    if not np.isin(t, (-1, 0, 1)).all():
        raise ValueError("trit entries must be -1, 0 or +1")
    if expected_length is not None and t.size != expected_length:
        raise ValueError(
            f"trit sequence has length {t.size}, expected {expected_length}")
    return t.astype(np.int8)


def _int_to_balanced(value: int) -> np.ndarray:
    """Digits d_0..d_4 in {-1,0,1} with sum(d_i 3^i) == value (mod 243).

    The centered residue in [-121, 121] is used, so every 7-bit value has a
    unique 5-digit representation and 0 maps to all-zero digits.
    """
    half = (_BLOCK_SPACE - 1) // 2
    v = (value + half) % _BLOCK_SPACE - half
    digits = np.zeros(TRITS_PER_BLOCK, dtype=np.int8)
    for i in range(TRITS_PER_BLOCK):
        r = v % 3
        if r == 2:
            digits[i] = -1
            v = (v + 1) // 3
        else:
            digits[i] = r
            v = (v - r) // 3
    return digits


def _balanced_to_int(digits) -> int:
    total = sum(int(d) * 3 ** i for i, d in enumerate(digits))
    return total % _BLOCK_SPACE


def encode_bits_to_trits(payload_bits) -> np.ndarray:
    """Encode a bit stream into 5-trit blocks (7 payload bits per block).

    The first block is a header holding the zero-pad length of the final
    partial block; `decode_trits_to_bits` is its exact inverse.
    """
    bits = np.asarray(payload_bits)
    if bits.ndim != 1:
        raise ValueError("payload must be a 1-D bit sequence")
    if bits.size and not np.isin(bits, (0, 1)).all():
        raise ValueError("payload entries must be 0 or 1")
    bits = bits.astype(np.uint8)
    pad = (-bits.size) % BITS_PER_BLOCK
    padded = np.concatenate([bits, np.zeros(pad, dtype=np.uint8)])
    blocks = [_int_to_balanced(pad)]
    weights = 1 << np.arange(BITS_PER_BLOCK - 1, -1, -1)
    for start in range(0, padded.size, BITS_PER_BLOCK):
        value = int((padded[start:start + BITS_PER_BLOCK] * weights).sum())
        blocks.append(_int_to_balanced(value))
    return np.concatenate(blocks)


def decode_trits_to_bits(trits) -> np.ndarray:
    """Invert `encode_bits_to_trits`.

    Raises MalformedHeader when the stream is not whole blocks with a valid
    pad header, and OutOfRangeBlock when a payload block decodes above 127
    (which signals an upstream detection error).
    """
    t = as_trit_sequence(trits)
    if t.size < TRITS_PER_BLOCK or t.size % TRITS_PER_BLOCK:
        raise MalformedHeader(
            "trit stream must consist of whole 5-trit blocks with a header")
    pad = _balanced_to_int(t[:TRITS_PER_BLOCK])
    if pad > _MAX_PAD:
        raise MalformedHeader(f"header pad length {pad} exceeds {_MAX_PAD}")
    n_blocks = t.size // TRITS_PER_BLOCK - 1
    if n_blocks == 0 and pad:
        raise MalformedHeader("nonzero pad with no payload blocks")
    bits = np.empty(n_blocks * BITS_PER_BLOCK, dtype=np.uint8)
    for i in range(n_blocks):
        block = t[(i + 1) * TRITS_PER_BLOCK:(i + 2) * TRITS_PER_BLOCK]
        value = _balanced_to_int(block)
        if value > _MAX_BLOCK_VALUE:
            raise OutOfRangeBlock(f"block {i} decodes to {value} > 127")
        for j in range(BITS_PER_BLOCK):
            bits[i * BITS_PER_BLOCK + j] = (value >> (BITS_PER_BLOCK - 1 - j)) & 1
    return bits[:bits.size - pad] if pad else bits


def trits_to_indentations(trits) -> np.ndarray:
    """Map N/2 trits to the length-N indentation pattern.

    Trit t_n controls the mirror pair (b[N-1-n], b[n]):
    -1 -> (0, 1), 0 -> (0, 0), +1 -> (1, 0), so b[N-1-n] - b[n] = t_n.
    """
    t = as_trit_sequence(trits)
    m = t.size
    bits = np.zeros(2 * m, dtype=np.uint8)
    idx = np.arange(m)
    bits[2 * m - 1 - idx] = t == 1
    bits[idx] |= t == -1
    return bits


def central_trits(bits) -> np.ndarray:
    """Trits t_p = b[N-1-p] - b[p] for p = 0 .. N/2-1 (N must be even)."""
    b = as_bit_pattern(bits)
    if b.size % 2:
        raise OddLength("central trits are defined for even-length patterns")
    m = b.size // 2
    return (b[::-1][:m].astype(np.int8) - b[:m].astype(np.int8))


def mirror_complement(bits) -> np.ndarray:
    """The intensity-preserving transform b_n -> 1 - b[N-1-n]."""
    b = as_bit_pattern(bits)
    return (1 - b[::-1]).astype(np.uint8)


def sampling_grid(n: int, pitch_m: float) -> np.ndarray:
    """The 2N-1 sampling points q_m = 2 pi m / ((2N-1) d), m = -(N-1)..N-1.

    This is the most economical uniform grid that resolves all 2N-1
    intensity coefficients.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if pitch_m <= 0.0:
        raise ValueError("pitch must be positive")
    m = np.arange(-(n - 1), n)
    return 2.0 * np.pi * m / ((2 * n - 1) * pitch_m)


@dataclass(frozen=True)
class SampledIntensity:
    """Intensity samples on the q_m grid; `normalized` marks that the
    envelope |C(q_m)|^2 has been divided out."""

    samples: np.ndarray
    normalized: bool

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size % 2 == 0:
            raise ValueError("samples must form a 1-D array of odd length")
        if not np.isfinite(s).all():
            raise ValueError("samples must be finite")
        if not self.normalized and (s < 0.0).any():
            raise ValueError("raw intensity samples must be nonnegative")
        object.__setattr__(self, "samples", s)

    @property
    def n_cantilevers(self) -> int:
        return (self.samples.size + 1) // 2


def sample_fraunhofer(geom: ArrayGeometry, bits,
                      normalized: bool = True) -> SampledIntensity:
    """Far-field intensity sampled on the geometry's q_m grid."""
    grid = sampling_grid(geom.n_cantilevers, geom.pitch_m)
    vals = physics.fraunhofer_intensity(geom, bits, grid, normalized=normalized)
    return SampledIntensity(samples=vals, normalized=normalized)


def demodulate(samples: SampledIntensity) -> FourierCoefficients:
    """Recover f(n) = (1/(2N-1)) sum_m I(q_m) exp(i n q_m d) by DFT.

    Requires envelope-normalized samples. Exact (to rounding) on any
    band-limited intensity: demodulate(sample(f)) == f.
    """
    if not samples.normalized:
        raise NotNormalized("divide out the envelope before demodulating")
    vals = samples.samples
    count = vals.size
    n = np.arange(-(count // 2), count // 2 + 1)
    # q_m * d = 2 pi m / (2N-1), so the kernel needs no geometry.
    kernel = np.exp(2j * np.pi * np.outer(n, n) / count)
    return FourierCoefficients(kernel @ vals / count)


def recover_trit_values(coeffs: FourierCoefficients, two_ks: float) -> np.ndarray:
    """Pre-rounding trit estimates [Im f(n+1) - Im f(n)] / sin(two_ks)."""
    s = np.sin(two_ks)
    if abs(s) < MIN_SIN_TWO_KS:
        raise DegenerateDepth(
            f"|sin(two_ks)| = {abs(s):.2g} leaves no imaginary-part signal")
    n = coeffs.n_max + 1
    if n % 2:
        raise OddLength("trit recovery needs an even cantilever count")
    imag = coeffs.imag_head(n // 2 + 1)
    return np.diff(imag) / s


def recover_trits_noiseless(coeffs: FourierCoefficients,
                            two_ks: float) -> np.ndarray:
    """Round the recovered trit values to {-1, 0, +1}, ties toward 0."""
    y = recover_trit_values(coeffs, two_ks)
    rounded = np.sign(y) * np.ceil(np.abs(y) - 0.5)
    return np.clip(rounded, -1, 1).astype(np.int8)


def count_distinct_patterns(n: int, method: str = "formula") -> int:
    """Number of distinct intensity patterns over all 2^N bit strings.

    Patterns coincide exactly in mirror-complement pairs, so the count is
    2^(N-1) for odd N and 2^(N-1) + 2^(N/2-1) for even N. The brute-force
    mode counts orbits of the transform directly (N <= 12).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    if method == "formula":
        if n > FORMULA_CAP:
            raise TooLarge(f"formula supported for n <= {FORMULA_CAP}")
        count = 2 ** (n - 1)
        if n % 2 == 0:
            count += 2 ** (n // 2 - 1)
        return count
    if method == "brute_force":
        if n > BRUTE_FORCE_CAP:
            raise TooLarge(f"brute force supported for n <= {BRUTE_FORCE_CAP}")
        values = np.arange(2 ** n, dtype=np.uint32)
        reversed_bits = np.zeros_like(values)
        for i in range(n):
            reversed_bits |= ((values >> i) & 1) << (n - 1 - i)
        transformed = reversed_bits ^ (2 ** n - 1)
        # The transform is an involution: orbits have size 1 or 2, counted
        # once via their smallest representative.
        return int(np.count_nonzero(values <= transformed))
    raise ValueError(f"unknown method {method!r}")
