"""Tests for convolutional encoding, trellis construction, Viterbi decoding and puncturing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hqam_bicm.app.error_handler import ConfigError
from hqam_bicm.core.convcode import (ConvCode, PuncturePattern, build_trellis, depuncture, encode, free_distance,
                                     puncture, viterbi_decode)

LLR_SCALE = 4.0


def _noiseless_llrs(code_bits: np.ndarray) -> np.ndarray:
    return LLR_SCALE * (1.0 - 2.0 * code_bits)


def _terminated_info(code: ConvCode, info: np.ndarray) -> np.ndarray:
    return np.concatenate([info, np.zeros((code.k_c, code.memory), dtype=np.int64)], axis=1)


class TestConvCode:
    """Generator parsing and code parameters."""

    def test_from_octal(self, code57):
        assert code57.generators == ((5, 7),)
        assert (code57.k_c, code57.n, code57.K, code57.memory) == (1, 2, 3, 2)
        assert code57.rate == pytest.approx(0.5)
        assert code57.octal == "5,7"

    def test_rate_two_thirds(self):
        code = ConvCode.from_octal("23,35,0;0,5,13")
        assert (code.k_c, code.n) == (2, 3)

    @pytest.mark.parametrize("text", ["5,9", "5,7;3", ""])
    def test_invalid_text(self, text):
        with pytest.raises(ConfigError):
            ConvCode.from_octal(text)

    @pytest.mark.parametrize("text,dfree", [("5,7", 5), ("133,171", 10), ("15,17", 6)])
    def test_free_distance(self, text, dfree):
        assert free_distance(ConvCode.from_octal(text)) == dfree

    def test_free_distance_cap(self, code57):
        assert free_distance(code57, cap=4) is None


class TestTrellis:
    """Trellis tables and encoding."""

    def test_shapes(self, trellis57):
        assert trellis57.num_states == 4
        assert trellis57.num_inputs == 2
        assert trellis57.outputs.shape == (4, 2, 2)

    def test_leaving_zero_state(self, trellis57):
        assert trellis57.next_state[0, 0] == 0
        assert trellis57.output_index[0, 0] == 0
        assert trellis57.output_index[0, 1] == 3

    def test_impulse_response(self, code57):
        out = encode(code57, np.array([[1, 0, 0, 0]]))
        np.testing.assert_array_equal(out, [[1, 0, 1, 0], [1, 1, 1, 0]])

    def test_encode_matches_trellis(self, code57, trellis57, rng):
        info = rng.integers(0, 2, size=40)
        out = encode(code57, info[None, :])
        state = 0
        for t, u in enumerate(info):
            np.testing.assert_array_equal(out[:, t], trellis57.outputs[state, u])
            state = trellis57.next_state[state, u]

    @settings(max_examples=30, deadline=None)
    @given(a=st.lists(st.integers(0, 1), min_size=24, max_size=24),
           b=st.lists(st.integers(0, 1), min_size=24, max_size=24))
    def test_encode_is_linear(self, a, b):
        code = ConvCode.from_octal("23,35,0;0,5,13")
        u = np.array(a).reshape(2, 12)
        v = np.array(b).reshape(2, 12)
        np.testing.assert_array_equal(encode(code, u ^ v), encode(code, u) ^ encode(code, v))

    def test_wrong_info_rows(self, code57):
        with pytest.raises(ConfigError):
            encode(code57, np.zeros((2, 5), dtype=int))


class TestViterbi:
    """Soft-input Viterbi decoding."""

    @settings(max_examples=25, deadline=None)
    @given(bits=st.lists(st.integers(0, 1), min_size=1, max_size=60))
    def test_noiseless_identity(self, bits):
        code = ConvCode.from_octal("5,7")
        info = np.array([bits])
        framed = _terminated_info(code, info)
        decoded = viterbi_decode(build_trellis(code), _noiseless_llrs(encode(code, framed)), terminated=True)
        np.testing.assert_array_equal(decoded[:, :info.shape[1]], info)

    def test_corrects_single_error(self, code57, trellis57, rng):
        info = rng.integers(0, 2, size=(1, 50))
        llrs = _noiseless_llrs(encode(code57, _terminated_info(code57, info)))
        llrs[1, 20] = -llrs[1, 20]
        decoded = viterbi_decode(trellis57, llrs, terminated=True)
        np.testing.assert_array_equal(decoded[:, :50], info)

    def test_batch_matches_single(self, code57, trellis57, rng):
        blocks = [rng.normal(size=(2, 30)) for _ in range(3)]
        batch = viterbi_decode(trellis57, np.stack(blocks))
        for b, llrs in enumerate(blocks):
            np.testing.assert_array_equal(batch[b], viterbi_decode(trellis57, llrs))

    def test_ties_resolve_to_zero_path(self, trellis57):
        decoded = viterbi_decode(trellis57, np.zeros((2, 12)), terminated=True)
        np.testing.assert_array_equal(decoded, 0)

    def test_rate_two_thirds_roundtrip(self, rng):
        code = ConvCode.from_octal("23,35,0;0,5,13")
        info = rng.integers(0, 2, size=(2, 30))
        llrs = _noiseless_llrs(encode(code, _terminated_info(code, info)))
        decoded = viterbi_decode(build_trellis(code), llrs, terminated=True)
        np.testing.assert_array_equal(decoded[:, :30], info)

    def test_wrong_llr_rows(self, trellis57):
        with pytest.raises(ConfigError):
            viterbi_decode(trellis57, np.zeros((3, 10)))


class TestPuncturing:
    """Column-major puncturing."""

    @pytest.fixture
    def rate34(self) -> PuncturePattern:
        return PuncturePattern.from_text("10,11,01")

    def test_pattern_properties(self, rate34):
        np.testing.assert_array_equal(rate34.mask, [[1, 1, 0], [0, 1, 1]])
        assert (rate34.n, rate34.period, rate34.survivors) == (2, 3, 4)
        assert rate34.rate() == pytest.approx(0.75)
        assert rate34.text == "10,11,01"

    def test_serialization_order(self, rate34):
        bits = np.arange(12).reshape(2, 6)
        np.testing.assert_array_equal(puncture(bits, rate34), [0, 1, 7, 8, 3, 4, 10, 11])

    def test_depuncture_inverts(self, rate34, rng):
        bits = rng.normal(size=(2, 9))
        restored = depuncture(puncture(bits, rate34), rate34)
        keep = rate34.full_mask(9)
        np.testing.assert_array_equal(restored[keep], bits[keep])
        np.testing.assert_array_equal(restored[~keep], 0.0)

    @pytest.mark.parametrize("text", ["", "12,01", "10,1", "00,00"])
    def test_invalid_patterns(self, text):
        with pytest.raises(ConfigError):
            PuncturePattern.from_text(text)

    def test_block_not_multiple_of_period(self, rate34):
        with pytest.raises(ConfigError):
            rate34.full_mask(10)

    def test_punctured_noiseless_decoding(self, code57, trellis57, rate34, rng):
        info = rng.integers(0, 2, size=(1, 58))
        code_bits = encode(code57, _terminated_info(code57, info))
        llrs = depuncture(_noiseless_llrs(puncture(code_bits, rate34)), rate34)
        decoded = viterbi_decode(trellis57, llrs, terminated=True)
        np.testing.assert_array_equal(decoded[:, :58], info)
