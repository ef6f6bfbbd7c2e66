"""Tests for equivalent weight distribution spectra."""

from fractions import Fraction
from math import comb

import numpy as np
import pytest

from hqam_bicm.app.error_handler import ConfigError, SpectrumSearchError
from hqam_bicm.core.convcode import ConvCode, PuncturePattern, build_trellis
from hqam_bicm.core.mux import DMuxPattern, RandomMuxTable, enumerate_canonical
from hqam_bicm.core.spectrum import compute_ewds, dmux_route, expected_ewds, scalar_spectrum, table_route

# input-weight spectrum of the (5,7) code: (d - 4) 2^(d - 5)
SCALAR_57 = {5: Fraction(1), 6: Fraction(4), 7: Fraction(12), 8: Fraction(32), 9: Fraction(80)}


class TestDeterministicSpectrum:
    """compute_ewds with D-MUX patterns."""

    @pytest.mark.parametrize("text", ["1,2,2/1,3,3", "1:1,2:2,2:1/1:2,3:2,3:1"])
    def test_worked_example(self, trellis57, text):
        spectrum = compute_ewds(trellis57, DMuxPattern.from_text(text), 5)
        assert spectrum.entries[(2, 1, 2)] == Fraction(2, 3)
        assert spectrum.entries[(1, 2, 2)] == Fraction(1, 3)
        assert spectrum.phases == 3
        assert spectrum.free_weight == 5
        assert set(spectrum.entries) == {(2, 1, 2), (1, 2, 2)}

    def test_scalar_reduction(self, trellis57):
        spectrum = compute_ewds(trellis57, DMuxPattern.identity(2, 1), 9)
        assert spectrum.entries == {(d,): b for d, b in SCALAR_57.items()}

    def test_scalar_spectrum(self, trellis57):
        assert scalar_spectrum(trellis57, 9) == SCALAR_57

    @pytest.mark.parametrize("text", ["2,2/1,1", "1,2/2,1", "1,2,3/3,2,1", "2,3,3/2,1,1"])
    def test_marginal_matches_scalar(self, trellis57, text):
        spectrum = compute_ewds(trellis57, DMuxPattern.from_text(text), 9)
        assert spectrum.marginal() == SCALAR_57

    def test_one_stream_per_output(self, trellis57):
        # output 0 of every (5,7) event carries d_0 bits with d_0 + d_1 = d
        spectrum = compute_ewds(trellis57, DMuxPattern.from_text("1,1/2,2"), 6)
        assert spectrum.entries[(2, 3)] == Fraction(1)
        assert sum(spectrum.marginal().values()) == SCALAR_57[5] + SCALAR_57[6]

    @pytest.mark.parametrize("index", range(10))
    def test_invariant_under_column_rotation(self, trellis57, index):
        pattern = enumerate_canonical(2, 3, 3)[index]
        reference = compute_ewds(trellis57, pattern, 8).entries
        for r in range(1, pattern.J):
            assert compute_ewds(trellis57, pattern.rotate(r), 8).entries == reference

    def test_empty_below_free_distance(self, trellis57):
        spectrum = compute_ewds(trellis57, DMuxPattern.from_text("2,2/1,1"), 4)
        assert spectrum.empty
        assert spectrum.free_weight is None
        assert spectrum.last_shell == 0

    def test_rows_and_arrays(self, trellis57):
        spectrum = compute_ewds(trellis57, DMuxPattern.from_text("1,2,2/1,3,3"), 5)
        rows = spectrum.to_rows()
        assert rows[0] == {"w_1": 1, "w_2": 2, "w_3": 2, "beta_numerator": 1, "beta_denominator": 3}
        weights, log_beta = spectrum.arrays()
        np.testing.assert_array_equal(weights, [[1, 2, 2], [2, 1, 2]])
        np.testing.assert_allclose(np.exp(log_beta), [1 / 3, 2 / 3])

    def test_route_rejects_mismatched_rows(self):
        with pytest.raises(ConfigError):
            dmux_route(DMuxPattern.from_text("1,2,3/3,2,1"), 3)

    def test_wmax_must_be_positive(self, trellis57):
        with pytest.raises(ConfigError):
            compute_ewds(trellis57, DMuxPattern.from_text("2,2/1,1"), 0)

    def test_catastrophic_code(self):
        trellis = build_trellis(ConvCode.from_octal("6,5"))
        with pytest.raises(SpectrumSearchError):
            compute_ewds(trellis, DMuxPattern.from_text("2,2/1,1"), 10, max_steps=200)

    def test_parallel_phases_match_serial(self, trellis57):
        pattern = DMuxPattern.from_text("1,2,3/3,2,1")
        serial = compute_ewds(trellis57, pattern, 8)
        parallel = compute_ewds(trellis57, pattern, 8, jobs=2)
        assert serial.entries == parallel.entries

    def test_large_wmax_stays_exact(self, trellis57):
        spectrum = compute_ewds(trellis57, DMuxPattern.identity(2, 1), 70)
        assert spectrum.entries[(70,)] == Fraction(66 * 2 ** 65)


class TestExpectedSpectrum:
    """expected_ewds with random multiplexers and puncturing."""

    def test_s_interleaver_binomial_split(self, trellis57):
        spectrum = expected_ewds(trellis57, RandomMuxTable.s_interleaver(2, 2), 7)
        for d in (5, 6, 7):
            for w1 in range(d + 1):
                assert spectrum.entries[(w1, d - w1)] == SCALAR_57[d] * Fraction(comb(d, w1), 2 ** d)

    def test_rmux_marginal_matches_scalar(self, trellis57):
        table = RandomMuxTable.from_text("0,1/3,2/3;2/3,1/3,0")
        spectrum = expected_ewds(trellis57, table, 8)
        assert spectrum.marginal() == {d: b for d, b in SCALAR_57.items() if d <= 8}

    def test_route_denominator(self):
        route, D = table_route(RandomMuxTable.from_text("0,1/3,2/3;2/3,1/3,0"), 2)
        assert D == 3
        assert len(route) == 1

    def test_trivial_puncturing_is_identity(self, trellis57):
        table = RandomMuxTable.s_interleaver(2, 2)
        plain = expected_ewds(trellis57, table, 7)
        kept = expected_ewds(trellis57, table, 7, puncture=PuncturePattern.from_text("11"))
        assert plain.entries == kept.entries

    def test_punctured_phases(self, trellis57):
        spectrum = expected_ewds(trellis57, RandomMuxTable.s_interleaver(2, 2), 6,
                                 puncture=PuncturePattern.from_text("10,11,01"))
        assert spectrum.phases == 3
        assert not spectrum.empty
        assert spectrum.free_weight < 5

    def test_table_rows_must_match_code(self, trellis57):
        with pytest.raises(ConfigError):
            expected_ewds(trellis57, RandomMuxTable.s_interleaver(3, 3), 6)
