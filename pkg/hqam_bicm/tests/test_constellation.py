"""Tests for hierarchical PAM construction, Gray labels and the mu table."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hqam_bicm.app.error_handler import ConfigError, RegionError
from hqam_bicm.core.constellation import (amplitudes, bits_per_symbol, build, build_unchecked, closed_form_mu,
                                          gray_code, inverse_gray_code, mu_table, nearest_competitor,
                                          region_mask, to_json, validate_region)
from hqam_bicm.tests.conftest import in_region

SQRT5 = np.sqrt(5.0)
SQRT21 = np.sqrt(21.0)


class TestHelpers:
    """Bit and Gray-code helpers."""

    @pytest.mark.parametrize("M,q", [(2, 1), (4, 2), (8, 3), (16, 4)])
    def test_bits_per_symbol(self, M, q):
        assert bits_per_symbol(M) == q

    @pytest.mark.parametrize("M", [0, 1, 3, 6, 12])
    def test_bits_per_symbol_rejects_non_powers(self, M):
        with pytest.raises(ConfigError):
            bits_per_symbol(M)

    def test_gray_roundtrip(self):
        j = np.arange(64)
        np.testing.assert_array_equal(inverse_gray_code(gray_code(j)), j)

    def test_amplitudes_unit_energy(self):
        d = amplitudes(np.array([[0.5, 0.25], [0.3, 0.0]]))
        np.testing.assert_allclose((d ** 2).sum(axis=1), 1.0)
        np.testing.assert_allclose(d[0], np.array([4.0, 2.0, 1.0]) / SQRT21)


class TestBuild:
    """Constellation points and labels."""

    def test_bpsk(self):
        c = build([], 2)
        np.testing.assert_allclose(c.points, [-1.0, 1.0])
        assert c.label_strings == ["0", "1"]

    def test_equally_spaced_4pam(self, pam4):
        np.testing.assert_allclose(pam4.points, np.array([-3.0, -1.0, 1.0, 3.0]) / SQRT5)
        assert pam4.label_strings == ["00", "01", "11", "10"]

    def test_equally_spaced_8pam(self, pam8):
        np.testing.assert_allclose(pam8.points, np.arange(-7.0, 8.0, 2.0) / SQRT21)
        assert pam8.label_strings == ["000", "001", "011", "010", "110", "111", "101", "100"]

    @pytest.mark.parametrize("M,alphas", [(4, [0.2]), (8, [0.44, 0.0]), (16, [0.5, 0.25, 0.125])])
    def test_unit_energy_and_sorted(self, M, alphas):
        c = build(alphas, M)
        assert c.energy == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(c.points) >= 0)

    @pytest.mark.parametrize("M", [2, 4, 8, 16])
    def test_gray_adjacency(self, M):
        c = build(in_region([0.3] * (bits_per_symbol(M) - 1)), M)
        flips = np.abs(np.diff(c.labels.astype(int), axis=0)).sum(axis=1)
        np.testing.assert_array_equal(flips, 1)

    def test_region_violation_names_inequality(self):
        with pytest.raises(RegionError) as info:
            build([0.2, 0.3], 8)
        assert "alpha_1 >= alpha_2" in str(info.value)

    def test_dimension_mismatch(self):
        with pytest.raises(ConfigError):
            build([0.5, 0.25], 4)

    def test_unchecked_allows_out_of_region(self):
        c = build_unchecked([0.2, 0.3], 8)
        assert c.M == 8
        assert not validate_region(c.alphas).valid


class TestRegion:
    """Region check, scalar and vectorized."""

    def test_boundary_is_valid(self):
        assert validate_region([0.5, 0.5]).valid
        assert validate_region([0.0]).valid

    def test_sum_violation(self):
        report = validate_region([0.7, 0.4])
        assert not report
        assert any("sum of alphas" in v for v in report.violations)

    def test_mask_matches_scalar(self, rng):
        grid = rng.random((500, 2))
        expected = [validate_region(row).valid for row in grid]
        np.testing.assert_array_equal(region_mask(grid), expected)


class TestMuTable:
    """Closed-form and geometric mu values."""

    def test_4pam_values(self, pam4):
        positive = closed_form_mu(pam4.d)
        np.testing.assert_allclose(positive[0], [16 / 5, 4 / 5])
        np.testing.assert_allclose(positive[1], [4 / 5])

    def test_signs_follow_labels(self, pam8):
        table = mu_table(pam8)
        np.testing.assert_array_equal(table.mu > 0, pam8.labels.T == 0)

    def test_xi_weights(self, pam8):
        np.testing.assert_allclose(mu_table(pam8).xi, [0.25, 0.5, 1.0])

    def test_signed_8pam_table(self):
        c = build([0.37, 0.11], 8)
        d1, d2, d3 = c.d
        outer = [d1 ** 2, (d1 - d3) ** 2, (d1 - d2) ** 2, (d1 - d2 - d3) ** 2]
        middle = [d2 ** 2, (d2 - d3) ** 2]
        expected = 4 * np.array([
            outer + [-v for v in reversed(outer)],
            middle + [-v for v in reversed(middle)] + [-v for v in middle] + list(reversed(middle)),
            [d3 ** 2, -d3 ** 2, -d3 ** 2, d3 ** 2, d3 ** 2, -d3 ** 2, -d3 ** 2, d3 ** 2],
        ])
        np.testing.assert_allclose(mu_table(c).mu, expected, rtol=0, atol=1e-12)

    def test_nearest_competitor_tie_goes_low(self):
        c = build([1.0], 4)
        assert nearest_competitor(c, 2, 1) == 0

    @settings(max_examples=100, deadline=None)
    @given(q=st.integers(min_value=1, max_value=4), raw=st.lists(st.floats(0.0, 1.0), min_size=3, max_size=3))
    def test_closed_form_matches_geometric(self, q, raw):
        c = build(in_region(raw[:q - 1]), 2 ** q)
        table = mu_table(c)
        for k in range(1, q + 1):
            geometric = np.sort(table.mu[k - 1][c.bit_mask(k, 0)])
            expected = np.sort(np.tile(table.positive_mu[k - 1], 2 ** (k - 1)))
            np.testing.assert_allclose(geometric, expected, rtol=0, atol=1e-12)

    def test_to_json_card(self, pam4):
        card = to_json(pam4)
        assert card["labels"] == ["00", "01", "11", "10"]
        assert len(card["mu"]) == 8
        assert card["region"]["valid"]
        assert to_json(pam4, with_mu=False)["mu"] == []
