"""Modulation layer: ternary codec, trit maps, sampling and demodulation."""

import math

import numpy as np
import pytest

from diffread import (ArrayGeometry, DegenerateDepth, MalformedHeader,
                      NotNormalized, OddLength, OutOfRangeBlock,
                      SampledIntensity, TooLarge, central_trits,
                      count_distinct_patterns, decode_trits_to_bits,
                      demodulate, encode_bits_to_trits, recover_trit_values,
                      recover_trits_noiseless, sample_fraunhofer,
                      sampling_grid, structure_factor, trits_to_indentations)
from diffread.modem import (BITS_PER_BLOCK, TRITS_PER_BLOCK, _balanced_to_int,
                            _int_to_balanced, mirror_complement)
from diffread.physics import FourierCoefficients


def brute_force_block_digits(value):
    """Oracle: the unique 5-digit balanced-ternary block for a value mod 243."""
    matches = []
    for code in range(3 ** TRITS_PER_BLOCK):
        digits = [(code // 3 ** i) % 3 - 1 for i in range(TRITS_PER_BLOCK)]
        total = sum(d * 3 ** i for i, d in enumerate(digits))
        if total % 3 ** TRITS_PER_BLOCK == value % 3 ** TRITS_PER_BLOCK:
            matches.append(digits)
    assert len(matches) == 1
    return np.array(matches[0], dtype=np.int8)


class TestBlockCode:
    def test_zero_block(self):
        assert np.array_equal(_int_to_balanced(0), np.zeros(5, dtype=np.int8))

    def test_value_127_unique_digits(self):
        digits = _int_to_balanced(127)
        assert np.array_equal(digits, brute_force_block_digits(127))
        assert np.array_equal(digits, [1, 0, -1, -1, -1])
        assert _balanced_to_int(digits) == 127

    def test_every_block_value_roundtrips(self):
        for value in range(128):
            assert _balanced_to_int(_int_to_balanced(value)) == value

    def test_stream_roundtrip(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            payload = rng.integers(0, 2, int(rng.integers(0, 130)))
            trits = encode_bits_to_trits(payload)
            assert trits.size % TRITS_PER_BLOCK == 0
            assert np.array_equal(decode_trits_to_bits(trits), payload)

    def test_seventy_bit_payload(self):
        rng = np.random.default_rng(11)
        payload = rng.integers(0, 2, 70)
        assert np.array_equal(
            decode_trits_to_bits(encode_bits_to_trits(payload)), payload)

    def test_zero_block_decodes_to_zero_bits(self):
        trits = np.concatenate([_int_to_balanced(0), _int_to_balanced(0)])
        assert np.array_equal(decode_trits_to_bits(trits),
                              np.zeros(BITS_PER_BLOCK, dtype=np.uint8))

    def test_out_of_range_block(self):
        trits = np.concatenate([_int_to_balanced(0),
                                brute_force_block_digits(200)])
        with pytest.raises(OutOfRangeBlock):
            decode_trits_to_bits(trits)

    def test_malformed_streams(self):
        with pytest.raises(MalformedHeader):
            decode_trits_to_bits(np.zeros(3, dtype=np.int8))
        with pytest.raises(MalformedHeader):
            decode_trits_to_bits(np.zeros(0, dtype=np.int8))
        with pytest.raises(MalformedHeader):  # pad length 7 is impossible
            decode_trits_to_bits(np.concatenate(
                [_int_to_balanced(7), _int_to_balanced(0)]))
        with pytest.raises(MalformedHeader):  # pad but no payload blocks
            decode_trits_to_bits(_int_to_balanced(3))

    def test_rate_below_ceiling(self):
        rate = BITS_PER_BLOCK / (2 * TRITS_PER_BLOCK)
        assert rate < math.log2(3) / 2


class TestTritMaps:
    def test_pair_table(self):
        assert np.array_equal(trits_to_indentations([1, -1]), [0, 1, 0, 1])
        assert np.array_equal(trits_to_indentations([0, 0]), [0, 0, 0, 0])
        assert np.array_equal(trits_to_indentations([-1]), [1, 0])
        assert np.array_equal(trits_to_indentations([1]), [0, 1])

    def test_central_trits_examples(self):
        assert np.array_equal(central_trits([0, 1, 0, 1]), [1, -1])
        assert np.array_equal(central_trits([1, 1, 1, 1]), [0, 0])
        assert np.array_equal(central_trits([1, 0, 0, 0, 0, 0]), [-1, 0, 0])

    def test_central_trits_odd_length(self):
        with pytest.raises(OddLength):
            central_trits([0, 1, 0])

    def test_map_consistency_exhaustive(self):
        for m in (1, 2, 3, 4):
            for value in range(3 ** m):
                trits = np.array([(value // 3 ** i) % 3 - 1 for i in range(m)],
                                 dtype=np.int8)
                assert np.array_equal(
                    central_trits(trits_to_indentations(trits)), trits)

    def test_mirror_complement_involution(self):
        rng = np.random.default_rng(12)
        bits = rng.integers(0, 2, 9)
        assert np.array_equal(mirror_complement(mirror_complement(bits)), bits)


class TestSamplingGrid:
    def test_three_points(self):
        grid = sampling_grid(2, 20e-6)
        assert np.allclose(grid, [-2 * np.pi / 60e-6, 0.0, 2 * np.pi / 60e-6])

    def test_single_point(self):
        assert np.array_equal(sampling_grid(1, 1e-6), [0.0])

    def test_nine_points_spacing(self):
        grid = sampling_grid(5, 20e-6)
        assert grid.size == 9
        assert np.allclose(np.diff(grid), 2 * np.pi / (9 * 20e-6))

    def test_nyquist_margin(self):
        for n in (2, 5, 10):
            d = 20e-6
            sampling_rate = (2 * n - 1) * d / (2 * np.pi)
            max_frequency = (n - 1) * d / (2 * np.pi)
            assert sampling_rate > 2 * max_frequency


def geometry(n):
    return ArrayGeometry(n, 20e-6, 13.9e-6, 635e-9, 635e-9 / 8, 0.93)


class TestDemodulate:
    def test_requires_normalized(self):
        with pytest.raises(NotNormalized):
            demodulate(SampledIntensity(np.ones(5), normalized=False))

    def test_constant_samples(self):
        coeffs = demodulate(SampledIntensity(3.5 * np.ones(7), normalized=True))
        assert coeffs[0] == pytest.approx(3.5)
        for n in (1, 2, 3):
            assert abs(coeffs[n]) < 1e-12
            assert abs(coeffs[-n]) < 1e-12

    def test_roundtrip_all_zero_two_cantilevers(self):
        geom = geometry(2)
        coeffs = demodulate(sample_fraunhofer(geom, [0, 0]))
        assert np.allclose(coeffs.coeffs, [1, 2, 1], atol=1e-12)

    def test_closed_loop_matches_structure_factor(self):
        rng = np.random.default_rng(13)
        geom = geometry(4)
        for _ in range(20):
            bits = rng.integers(0, 2, 4)
            expected = structure_factor(bits, geom.two_ks).coeffs
            got = demodulate(sample_fraunhofer(geom, bits)).coeffs
            assert np.abs(got - expected).max() <= 1e-9 * np.abs(expected).max()

    def test_hermitian_after_demodulation(self):
        rng = np.random.default_rng(14)
        for n in (2, 6, 10):
            geom = geometry(n)
            bits = rng.integers(0, 2, n)
            coeffs = demodulate(sample_fraunhofer(geom, bits))
            assert coeffs.hermitian_residue() < 1e-9


class TestRecoverTrits:
    def test_alternating_pattern(self):
        coeffs = structure_factor([0, 1, 0, 1], np.pi / 2)
        assert np.allclose(coeffs.imag_head(3), [0, 1, 0], atol=1e-15)
        assert np.array_equal(recover_trits_noiseless(coeffs, np.pi / 2),
                              [1, -1])

    def test_all_zero(self):
        coeffs = structure_factor([0, 0, 0, 0], np.pi / 2)
        assert np.array_equal(recover_trits_noiseless(coeffs, np.pi / 2),
                              [0, 0])

    def test_degenerate_depth(self):
        coeffs = structure_factor([0, 1, 0, 1], np.pi)
        with pytest.raises(DegenerateDepth):
            recover_trits_noiseless(coeffs, np.pi)

    def test_rounding_ties_toward_zero(self):
        coeffs = FourierCoefficients(np.array(
            [1, 3 - 0.5j, 3 + 0.5j, 4, 3 - 0.5j, 3 + 0.5j, 1], dtype=complex))
        # Im f(0..2) = (0, -0.5, 0.5): pre-rounding (-0.5, +1.0) -> (0, +1)
        assert np.array_equal(recover_trits_noiseless(coeffs, np.pi / 2),
                              [0, 1])

    def test_odd_length_rejected(self):
        coeffs = structure_factor([0, 1, 0], np.pi / 2)
        with pytest.raises(OddLength):
            recover_trit_values(coeffs, np.pi / 2)

    def test_pre_rounding_values_near_integers(self):
        rng = np.random.default_rng(15)
        for n in (4, 8, 12):
            geom = geometry(n)
            trits = rng.integers(-1, 2, n // 2)
            coeffs = demodulate(
                sample_fraunhofer(geom, trits_to_indentations(trits)))
            values = recover_trit_values(coeffs, geom.two_ks)
            assert np.abs(values - trits).max() < 1e-6


class TestIdentities:
    def test_imag_telescopes_to_central_trit_sums(self):
        # Exhaustive over all patterns for N <= 10.
        for n in (2, 4, 6, 8, 10):
            two_ks = 1.1
            for value in range(2 ** n):
                bits = np.array([(value >> i) & 1 for i in range(n)])
                coeffs = structure_factor(bits, two_ks)
                trits = central_trits(bits)
                partial = np.concatenate([[0], np.cumsum(trits)])
                for idx in range(1, n // 2 + 1):
                    expected = math.sin(two_ks) * partial[idx]
                    assert coeffs[idx].imag == pytest.approx(expected, abs=1e-10)

    def test_real_part_identity(self):
        for n in range(1, 11):
            two_ks = 0.77
            rng = np.random.default_rng(16 + n)
            for _ in range(min(2 ** n, 64)):
                bits = rng.integers(0, 2, n)
                coeffs = structure_factor(bits, two_ks)
                for lag in range(n):
                    trits = bits[lag:] - bits[:n - lag]
                    expected = (1 + (math.cos(two_ks) - 1) * trits ** 2).sum()
                    assert coeffs[lag].real == pytest.approx(expected, abs=1e-10)


class TestPatternCount:
    def test_known_values(self):
        assert count_distinct_patterns(5) == 16
        assert count_distinct_patterns(4) == 10
        assert count_distinct_patterns(2, "brute_force") == 3

    def test_formula_matches_brute_force(self):
        for n in range(1, 13):
            assert (count_distinct_patterns(n, "formula")
                    == count_distinct_patterns(n, "brute_force"))

    def test_caps(self):
        with pytest.raises(TooLarge):
            count_distinct_patterns(13, "brute_force")
        with pytest.raises(TooLarge):
            count_distinct_patterns(21, "formula")
        with pytest.raises(ValueError):
            count_distinct_patterns(0)
        with pytest.raises(ValueError):
            count_distinct_patterns(4, "magic")


class TestNoiselessRoundtrip:
    def test_payload_through_intensity_chain(self):
        rng = np.random.default_rng(17)
        for n in (4, 8, 14, 20):
            geom = geometry(n)
            m = n // 2
            for _ in range(5):
                payload = rng.integers(0, 2, int(rng.integers(1, 100)))
                stream = encode_bits_to_trits(payload)
                padded = np.concatenate(
                    [stream, np.zeros((-stream.size) % m, dtype=np.int8)])
                recovered = []
                for start in range(0, padded.size, m):
                    bits = trits_to_indentations(padded[start:start + m])
                    coeffs = demodulate(sample_fraunhofer(geom, bits))
                    values = recover_trit_values(coeffs, geom.two_ks)
                    assert np.abs(values - padded[start:start + m]).max() < 1e-6
                    recovered.append(recover_trits_noiseless(coeffs, geom.two_ks))
                detected = np.concatenate(recovered)[:stream.size]
                assert np.array_equal(decode_trits_to_bits(detected), payload)
