"""Tests for the alpha grid, the joint pattern/constellation search and puncturing design."""

import numpy as np
import pytest

from hqam_bicm.app.error_handler import ConfigError
from hqam_bicm.app.events import EventManager, EventTypes
from hqam_bicm.core.bounds import union_bound_grid
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import amplitudes, region_mask
from hqam_bicm.core.mux import RandomMuxTable
from hqam_bicm.core.optimizer import (DesignSpace, alpha_grid, best_puncture_pattern, default_period, default_w_max,
                                      enumerate_puncture_patterns, optimize, optimize_fading_fixed,
                                      optimize_rmux)

SMALL_WMAX = 8
COARSE_STEP = 0.05


class TestAlphaGrid:
    def test_counts(self):
        assert alpha_grid(2).shape == (101, 1)
        assert alpha_grid(3).shape == (2601, 2)
        assert alpha_grid(1).shape == (1, 0)

    def test_in_region_and_ordered(self):
        grid = alpha_grid(3, 0.1)
        assert region_mask(grid).all()
        assert [tuple(r) for r in grid] == sorted(tuple(r) for r in grid)
        assert grid[0].tolist() == [0.0, 0.0]

    @pytest.mark.parametrize("step", [0.0, -0.1, 0.03])
    def test_bad_step(self, step):
        with pytest.raises(ConfigError):
            alpha_grid(2, step)

    @pytest.mark.parametrize("n,q,J", [(2, 2, 2), (2, 3, 3), (2, 4, 2), (1, 2, 2), (3, 2, 2)])
    def test_default_period(self, n, q, J):
        assert default_period(n, q) == J

    @pytest.mark.parametrize("channel,q,w_max", [(Channel.awgn(10.0), 2, 125), (Channel.awgn(10.0), 3, 30),
                                                 (Channel.nakagami(1.0, 10.0), 2, 30),
                                                 (Channel.nakagami(5.0, 10.0), 3, 30)])
    def test_default_w_max(self, channel, q, w_max):
        assert default_w_max(channel, q) == w_max

    def test_design_space_default_w_max(self, code57):
        assert DesignSpace(code57, 4).w_max == 125
        assert DesignSpace(code57, 8).w_max == 30
        assert DesignSpace(code57, 8, w_max=45).w_max == 45


class TestDesignSpace:
    """Joint search over canonical D-MUX patterns and the alpha grid."""

    @pytest.fixture
    def space(self, code57):
        return DesignSpace(code57, 4, w_max=SMALL_WMAX, grid_step=COARSE_STEP)

    def test_patterns_and_grid(self, space):
        assert space.J == 2
        assert len(space.patterns) == 4
        assert space.alphas.shape == (21, 1)
        assert len(space.spectra) == 4

    def test_optimum_is_table_minimum(self, space):
        channel = Channel.awgn(10.0)
        result = space.optimize(channel, ranked=True)
        assert result.ub == pytest.approx(space.ub_table(channel).min())
        assert result.pattern_id in range(1, 5)
        assert result.mux == space.patterns[result.pattern_id - 1].text
        assert len(result.ranked) == 4
        assert [r["ub"] for r in result.ranked] == sorted(r["ub"] for r in result.ranked)
        assert result.ranked[0]["ub"] == pytest.approx(result.ub)

    def test_frozen_curve(self, space):
        result = space.optimize(Channel.awgn(10.0))
        curve = result.frozen_curve([8.0, 10.0, 12.0])
        assert curve[1] == pytest.approx(result.ub)
        assert curve[0] > curve[1] > curve[2]

    def test_card(self, space):
        card = space.optimize(Channel.nakagami(2.0, 12.0)).card()
        assert card["channel"] == "nakagami"
        assert card["m"] == 2.0
        assert card["gamma_dB"] == pytest.approx(12.0)
        assert set(card) >= {"mux", "pattern_id", "alphas", "ub", "wmax", "grid_step", "M"}

    def test_functional_entry_reuses_space(self, space, code57):
        a = optimize(Channel.awgn(0.0), 10.0, code57, 4, space=space)
        assert a == space.optimize(Channel.awgn(10.0))

    def test_events(self, code57):
        events = EventManager()
        seen = []
        events.subscribe(EventTypes.DESIGN_POINT_DONE, seen.append)
        space = DesignSpace(code57, 4, w_max=SMALL_WMAX, grid_step=0.25, events=events)
        space.optimize(Channel.awgn(10.0))
        assert len(seen) == 1

    def test_parallel_spectra(self, code57):
        serial = DesignSpace(code57, 4, w_max=SMALL_WMAX, grid_step=0.25)
        parallel = DesignSpace(code57, 4, w_max=SMALL_WMAX, grid_step=0.25, jobs=2)
        assert [s.entries for s in serial.spectra] == [s.entries for s in parallel.spectra]


class TestFixedTargetFading:
    def test_bound_meets_target(self, code57):
        space = DesignSpace(code57, 4, w_max=10, grid_step=0.1)
        result = optimize_fading_fixed(1.0, 1e-5, code57, 4, space=space)
        assert result.channel.is_fading
        assert result.channel.m == 1.0
        assert result.ub == pytest.approx(1e-5, rel=0.1)


class TestRandomMuxDesign:
    def test_best_alphas(self, code57):
        table = RandomMuxTable.from_text("0,1/3,2/3;2/3,1/3,0")
        result = optimize_rmux(Channel.awgn(0.0), 10.0, code57, 8, table, grid_step=0.1, w_max=SMALL_WMAX)
        assert result.pattern_id is None
        assert result.mux.startswith("r-mux:")
        grid = alpha_grid(3, 0.1)
        ub = union_bound_grid(result.spectrum, amplitudes(grid), Channel.awgn(10.0))
        assert result.ub == pytest.approx(ub.min())

    def test_table_stream_mismatch(self, code57):
        with pytest.raises(ConfigError):
            optimize_rmux(Channel.awgn(0.0), 10.0, code57, 4, RandomMuxTable.s_interleaver(2, 3))


class TestPuncturing:
    def test_enumeration(self):
        patterns = enumerate_puncture_patterns(2, 3, 4)
        assert len(patterns) == 12
        assert all(p.survivors == 4 for p in patterns)
        assert all(p.mask.sum(axis=0).min() > 0 for p in patterns)
        assert len({p.text for p in patterns}) == 12

    def test_ranking(self, code57):
        ranked = best_puncture_pattern(code57, 3, 4, 4, [0.5], Channel.awgn(0.0), 10.0, w_max=10)
        assert ranked
        values = [ub for _, ub in ranked]
        assert values == sorted(values)
        assert all(ub > 0 for ub in values)
        assert all(np.isfinite(values))
