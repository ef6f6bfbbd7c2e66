"""Tests for the end-to-end BER simulator."""

import math

import numpy as np
import pytest
from scipy.special import erfc

from hqam_bicm.app.error_handler import ConfigError
from hqam_bicm.app.events import EventManager, EventTypes
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import build, mu_table
from hqam_bicm.core.convcode import ConvCode, PuncturePattern
from hqam_bicm.core.lvalues import maxlog_llr
from hqam_bicm.core.montecarlo import BerPoint, LinkChain, SimConfig, run_ber_sweep, transmit_block
from hqam_bicm.core.mux import DMuxPattern, RandomMuxTable

QUIET_DB = 40.0
RMUX_Q3 = "0,1/3,2/3;2/3,1/3,0"


def _config(code57, **overrides):
    values = dict(code=code57, mux=DMuxPattern.from_text("2,2/1,1"), constellation=build([0.5], 4),
                  channel=Channel.awgn(QUIET_DB), block_length=60, min_errors=1, max_blocks=2, seed=5)
    values.update(overrides)
    return SimConfig(**values)


class TestNoiselessChain:
    """At very high SNR the chain must return the transmitted bits."""

    def test_dmux(self, code57):
        points = run_ber_sweep(_config(code57), [QUIET_DB])
        assert points[0].errors == 0
        assert points[0].bits == 2 * 58

    def test_rmux_8pam(self, code57):
        cfg = _config(code57, mux=RandomMuxTable.from_text(RMUX_Q3), constellation=build([0.5, 0.25], 8))
        assert run_ber_sweep(cfg, [QUIET_DB])[0].errors == 0

    def test_punctured(self, code57):
        cfg = _config(code57, mux=RandomMuxTable.s_interleaver(1, 2),
                      puncture=PuncturePattern.from_text("10,11,01"))
        assert run_ber_sweep(cfg, [QUIET_DB])[0].errors == 0

    def test_fading(self, code57):
        cfg = _config(code57, channel=Channel.nakagami(2.0, 60.0))
        assert run_ber_sweep(cfg, [60.0])[0].errors == 0

    def test_decoder_input_signs(self, code57):
        cfg = _config(code57, all_zero=True)
        info, llrs = transmit_block(cfg, np.random.default_rng(0))
        assert not info.any()
        assert llrs.shape == (2, 60)
        assert np.all(llrs > 0)


class TestAllZeroTransmission:
    """Scrambled all-zero blocks stand in for random information."""

    def test_stream_means_follow_mixture(self, code57):
        c = build([0.5, 0.25], 8)
        cfg = _config(code57, mux=RandomMuxTable.from_text(RMUX_Q3), constellation=c, channel=Channel.awgn(13.0),
                      block_length=30000, all_zero=True)
        stream_llrs = LinkChain(cfg).transmit(np.random.default_rng(0)).stream_llrs
        table = mu_table(c)
        expected = []
        for k in range(1, c.q + 1):
            mu, xi = table.components(k)
            expected.append(10 ** 1.3 * np.average(mu, weights=xi))
        np.testing.assert_allclose(stream_llrs.mean(axis=1), expected, rtol=0.05)

    def test_ber_matches_random_information(self, code57):
        noisy = dict(channel=Channel.awgn(2.0), block_length=600, min_errors=10 ** 9, max_blocks=60)
        random_info = run_ber_sweep(_config(code57, **noisy), [2.0])[0]
        all_zero = run_ber_sweep(_config(code57, all_zero=True, seed=9, **noisy), [2.0])[0]
        assert random_info.errors > 300
        assert all_zero.ber == pytest.approx(random_info.ber, rel=0.25)

    def test_hash_tracks_time_placement(self, code57):
        default = DMuxPattern.from_text("2,2/1,1")
        swapped = DMuxPattern(default.assign, q=2, time_fill=default.time_fill[:, ::-1])
        assert _config(code57, mux=swapped).config_hash != _config(code57, mux=default).config_hash


class TestChannelDraws:
    def test_small_m_draws_stay_positive(self):
        gamma = Channel.nakagami(1e-3, 0.0).sample_snr(np.random.default_rng(0), size=10_000)
        assert np.all(gamma > 0)
        llrs = maxlog_llr(np.zeros(gamma.size), gamma, build([0.5], 4))
        assert np.all(np.isfinite(llrs))

    def test_awgn_is_constant(self):
        gamma = Channel.awgn(10.0).sample_snr(np.random.default_rng(0), size=5)
        np.testing.assert_allclose(gamma, 10.0)


class TestUncoded:
    def test_bpsk_matches_q_function(self):
        gamma_db = 4.0
        cfg = SimConfig(code=None, mux=None, constellation=build([], 2), channel=Channel.awgn(gamma_db),
                        block_length=20000, min_errors=10 ** 9, max_blocks=5, seed=3)
        point = run_ber_sweep(cfg, [gamma_db])[0]
        expected = 0.5 * erfc(math.sqrt(10 ** (gamma_db / 10)))
        assert point.bits == 100000
        assert point.ber == pytest.approx(expected, rel=0.15)


class TestDeterminism:
    """Per-block seeding makes results independent of batching and workers."""

    @pytest.fixture
    def noisy(self, code57):
        return _config(code57, channel=Channel.awgn(4.0), min_errors=10 ** 9, max_blocks=6)

    def test_same_seed_same_result(self, noisy):
        assert run_ber_sweep(noisy, [3.0, 4.0]) == run_ber_sweep(noisy, [3.0, 4.0])

    def test_batch_size_invariance(self, noisy):
        assert run_ber_sweep(noisy, [3.0], batch_blocks=1) == run_ber_sweep(noisy, [3.0], batch_blocks=3)

    def test_worker_invariance(self, noisy):
        assert run_ber_sweep(noisy, [3.0], jobs=2, batch_blocks=2) == run_ber_sweep(noisy, [3.0], batch_blocks=2)


class TestStopRule:
    def test_stops_after_min_errors(self, code57):
        cfg = _config(code57, channel=Channel.awgn(0.0), min_errors=5, max_blocks=100)
        point = run_ber_sweep(cfg, [0.0], batch_blocks=1)[0]
        assert point.errors >= 5
        assert point.blocks < 100

    def test_events(self, code57):
        events = EventManager()
        seen = []
        events.subscribe(EventTypes.BER_POINT_DONE, seen.append)
        run_ber_sweep(_config(code57), [QUIET_DB, QUIET_DB + 1], events=events)
        assert [p.gamma_db for p in seen] == [QUIET_DB, QUIET_DB + 1]


class TestSimConfig:
    """Construction-time validation."""

    def test_block_not_multiple_of_period(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, mux=DMuxPattern.from_text("1,1/2,2", q=2), block_length=61)

    def test_mux_shape_mismatch(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, mux=DMuxPattern.from_text("2,2/1,1"), constellation=build([0.5, 0.25], 8))

    def test_table_shape_mismatch(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, mux=RandomMuxTable.from_text(RMUX_Q3))

    def test_puncture_needs_single_row_table(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, puncture=PuncturePattern.from_text("10,11,01"))

    def test_puncture_survivors_fill_streams(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, mux=RandomMuxTable.s_interleaver(1, 3), constellation=build([0.5, 0.25], 8),
                    puncture=PuncturePattern.from_text("10,11,01"), block_length=60)

    def test_nonpositive_counts(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, min_errors=0)

    def test_coded_needs_mux(self, code57):
        with pytest.raises(ConfigError):
            _config(code57, mux=None)

    def test_hash_tracks_configuration(self, code57):
        assert _config(code57).config_hash == _config(code57).config_hash
        assert _config(code57).config_hash != _config(code57, seed=6).config_hash
        assert len(_config(code57).config_hash) == 16


class TestBerPoint:
    def test_interval_and_row(self):
        point = BerPoint(gamma_db=5.0, errors=100, bits=10000, blocks=3)
        lo, hi = point.ci
        assert point.ber == 0.01
        assert lo < 0.01 < hi
        assert hi - lo == pytest.approx(2 * 1.96 * math.sqrt(0.01 * 0.99 / 10000))
        row = point.row("abc")
        assert row["config_hash"] == "abc"
        assert row["errors"] == 100

    def test_zero_bits(self):
        assert BerPoint(1.0, 0, 0, 0).ci == (0.0, 0.0)
