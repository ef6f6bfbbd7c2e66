# hqam_bicm/core/optimizer.py
"""
Exhaustive joint search over canonical D-MUX patterns and the alpha grid,
minimizing the union bound at a given channel and SNR.
"""

import itertools
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError, SpectrumSearchError
from hqam_bicm.app.events import EventManager, EventTypes
from hqam_bicm.core.bounds import snr_for_bound, union_bound_grid
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import amplitudes, bits_per_symbol, build, region_mask
from hqam_bicm.core.convcode import ConvCode, PuncturePattern, build_trellis
from hqam_bicm.core.mux import DMuxPattern, RandomMuxTable, enumerate_canonical
from hqam_bicm.core.spectrum import WeightSpectrum, compute_ewds, expected_ewds

LOGGER = logging.getLogger(__name__)


def alpha_grid(q: int, step: float = Config.DEFAULT_GRID_STEP) -> np.ndarray:
    """
    In-region alpha vectors on a uniform grid, in lexicographic order.

    Returns:
        (G, q-1) array; a single empty row when q = 1.
    """
    if q == 1:
        return np.zeros((1, 0))
    if not step > 0:
        raise ConfigError("grid step must be positive")
    ticks = int(round(1.0 / step))
    if not math.isclose(ticks * step, 1.0, rel_tol=1e-9):
        raise ConfigError(f"grid step {step} must divide 1")
    axes = np.meshgrid(*([np.arange(ticks + 1)] * (q - 1)), indexing="ij")
    points = np.stack([a.ravel() for a in axes], axis=-1)
    points = points[region_mask(points.astype(float), tol=0.0)]
    if points.size == 0:
        raise ConfigError("the alpha grid is empty")
    return points / ticks


def default_period(n: int, q: int) -> int:
    """Shortest period used for the pattern search, at least 2."""
    return max(2, q // math.gcd(n, q))


def default_w_max(channel: Channel, q: int) -> int:
    """Spectrum truncation used when none is given."""
    if channel.is_fading:
        return Config.DEFAULT_WMAX_FADING
    return Config.DEFAULT_WMAX_AWGN if q <= 2 else Config.DEFAULT_WMAX_MULTILEVEL


def _pattern_spectrum(code: ConvCode, pattern: DMuxPattern, w_max: int) -> WeightSpectrum:
    return compute_ewds(build_trellis(code), pattern, w_max)


@dataclass(frozen=True)
class DesignResult:
    """Best (multiplexer, alphas) at one channel and SNR."""
    gamma_db: float
    channel: Channel
    mux: str
    pattern_id: Optional[int]
    alphas: Tuple[float, ...]
    ub: float
    w_max: int
    grid_step: float
    M: int
    spectrum: WeightSpectrum = field(repr=False, compare=False)
    k_c: int = 1
    ranked: List[Dict] = field(default_factory=list, repr=False, compare=False)

    def card(self) -> Dict:
        """JSON design card."""
        return {
            "channel": self.channel.kind,
            "m": self.channel.m,
            "gamma_dB": round(self.gamma_db, 6),
            "mux": self.mux,
            "pattern_id": self.pattern_id,
            "M": self.M,
            "alphas": [round(a, 6) for a in self.alphas],
            "ub": self.ub,
            "wmax": self.w_max,
            "grid_step": self.grid_step,
        }

    def frozen_curve(self, snr_db: Sequence[float]) -> List[float]:
        """Union bound of this design, held fixed, across an SNR range."""
        d = amplitudes(np.array(self.alphas)[None, :])
        return [float(union_bound_grid(self.spectrum, d, self.channel.at_db(g), self.k_c)[0]) for g in snr_db]


class DesignSpace:
    """
    Canonical patterns of one (code, M, J) with their spectra, computed once
    and reused for every channel and SNR.
    """

    def __init__(self, code: ConvCode, M: int, J: Optional[int] = None, w_max: Optional[int] = None,
                 grid_step: float = Config.DEFAULT_GRID_STEP, jobs: int = 1,
                 events: Optional[EventManager] = None):
        self.code = code
        self.M = M
        self.q = bits_per_symbol(M)
        self.J = J if J is not None else default_period(code.n, self.q)
        self.w_max = w_max if w_max is not None else (
            Config.DEFAULT_WMAX_AWGN if self.q <= 2 else Config.DEFAULT_WMAX_MULTILEVEL)
        self.grid_step = grid_step
        self.jobs = jobs
        self.events = events
        self.patterns = enumerate_canonical(code.n, self.J, self.q)
        self.alphas = alpha_grid(self.q, grid_step)
        self.d_grid = amplitudes(self.alphas)
        self._spectra: Optional[List[WeightSpectrum]] = None

    @property
    def spectra(self) -> List[WeightSpectrum]:
        if self._spectra is None:
            args = ([self.code] * len(self.patterns), self.patterns, [self.w_max] * len(self.patterns))
            if self.jobs > 1:
                with ProcessPoolExecutor(max_workers=self.jobs) as pool:
                    self._spectra = list(pool.map(_pattern_spectrum, *args))
            else:
                self._spectra = [_pattern_spectrum(*a) for a in zip(*args)]
            if self.events is not None:
                self.events.publish(EventTypes.SPECTRUM_DONE, len(self._spectra))
        return self._spectra

    def ub_table(self, channel: Channel) -> np.ndarray:
        """(patterns, grid points) union bounds."""
        return np.stack([union_bound_grid(s, self.d_grid, channel, self.code.k_c) for s in self.spectra])

    def best_ub(self, channel: Channel) -> float:
        return float(self.ub_table(channel).min())

    def optimize(self, channel: Channel, ranked: bool = False) -> DesignResult:
        """Argmin with ties resolved toward the smallest (pattern id, alphas)."""
        table = self.ub_table(channel)
        p, g = np.unravel_index(np.argmin(table), table.shape)
        rows = []
        if ranked:
            for i, pattern in enumerate(self.patterns):
                j = int(np.argmin(table[i]))
                rows.append({"pattern_id": i + 1, "mux": pattern.text,
                             "alphas": self.alphas[j].tolist(), "ub": float(table[i, j])})
            rows.sort(key=lambda r: (r["ub"], r["pattern_id"]))
        result = DesignResult(
            gamma_db=channel.gamma_db, channel=channel, mux=self.patterns[p].text, pattern_id=int(p) + 1,
            alphas=tuple(float(a) for a in self.alphas[g]), ub=float(table[p, g]), w_max=self.w_max,
            grid_step=self.grid_step, M=self.M, spectrum=self.spectra[p], k_c=self.code.k_c, ranked=rows)
        if result.ub > Config.BOUND_VALIDITY_LIMIT:
            LOGGER.warning(f"optimum at {result.gamma_db:.2f} dB has UB {result.ub:.3g}; the bound is not tight there")
        LOGGER.info(f"{channel.label} {result.gamma_db:.2f} dB: mux {result.mux} alphas {result.alphas} UB {result.ub:.3e}")
        if self.events is not None:
            self.events.publish(EventTypes.DESIGN_POINT_DONE, result)
        return result


def optimize(channel: Channel, gamma_bar_db: float, code: ConvCode, M: int,
             grid_step: float = Config.DEFAULT_GRID_STEP, w_max: Optional[int] = None,
             J: Optional[int] = None, jobs: int = 1, ranked: bool = False,
             space: Optional[DesignSpace] = None) -> DesignResult:
    """
    Joint pattern and constellation search at one SNR.

    Args:
        channel: Channel family (its SNR is replaced by gamma_bar_db).
        gamma_bar_db: Average SNR in dB.
        code: Convolutional code.
        M: Constellation size.
        grid_step: Alpha grid step.
        w_max: Spectrum truncation; defaults per channel family.
        J: D-MUX period.
        jobs: Worker processes for the spectra.
        ranked: Also return the best point of every pattern.
        space: Reuse precomputed spectra.
    """
    if space is None:
        if w_max is None:
            w_max = default_w_max(channel, bits_per_symbol(M))
        space = DesignSpace(code, M, J, w_max, grid_step, jobs)
    return space.optimize(channel.at_db(gamma_bar_db), ranked=ranked)


def optimize_fading_fixed(m: float, target: float, code: ConvCode, M: int,
                          grid_step: float = Config.DEFAULT_GRID_STEP,
                          w_max: int = Config.DEFAULT_WMAX_FADING, J: Optional[int] = None, jobs: int = 1,
                          bracket: Tuple[float, float] = Config.SNR_BRACKET_DB,
                          space: Optional[DesignSpace] = None) -> DesignResult:
    """
    Design for Nakagami-m fading frozen at the SNR where the minimized bound
    reaches `target`.

    Raises:
        TargetUnreachableError: When the target is outside the SNR bracket.
    """
    space = space if space is not None else DesignSpace(code, M, J, w_max, grid_step, jobs)
    channel = Channel.nakagami(m, bracket[0])
    gamma_db = snr_for_bound(lambda g: space.best_ub(channel.at_db(g)), target, bracket)
    LOGGER.info(f"m={m:g}: minimized bound reaches {target:g} at {gamma_db:.2f} dB")
    return space.optimize(channel.at_db(gamma_db))


def optimize_rmux(channel: Channel, gamma_bar_db: float, code: ConvCode, M: int, table: RandomMuxTable,
                  grid_step: float = Config.DEFAULT_GRID_STEP, w_max: Optional[int] = None,
                  puncture: Optional[PuncturePattern] = None) -> DesignResult:
    """Best alphas for a fixed random multiplexer, from its expected spectrum."""
    q = bits_per_symbol(M)
    if w_max is None:
        w_max = default_w_max(channel, q)
    if table.q != q:
        raise ConfigError(f"probability table has {table.q} streams, M={M} has {q} bit levels")
    spectrum = expected_ewds(build_trellis(code), table, w_max, puncture=puncture)
    alphas = alpha_grid(q, grid_step)
    at = channel.at_db(gamma_bar_db)
    ub = union_bound_grid(spectrum, amplitudes(alphas), at, code.k_c)
    g = int(np.argmin(ub))
    return DesignResult(gamma_db=at.gamma_db, channel=at, mux=f"{table.name}:{table.text}", pattern_id=None,
                        alphas=tuple(float(a) for a in alphas[g]), ub=float(ub[g]), w_max=w_max,
                        grid_step=grid_step, M=M, spectrum=spectrum, k_c=code.k_c)


def enumerate_puncture_patterns(n: int, period: int, ones: int) -> List[PuncturePattern]:
    """All n x period keep-masks with the given number of ones and no empty column."""
    patterns = []
    for cells in itertools.combinations(range(n * period), ones):
        mask = np.zeros(n * period, dtype=np.int8)
        mask[list(cells)] = 1
        mask = mask.reshape(period, n).T
        if mask.sum(axis=0).min() > 0:
            patterns.append(PuncturePattern(mask))
    return patterns


def best_puncture_pattern(code: ConvCode, period: int, ones: int, M: int, alphas: Sequence[float],
                          channel: Channel, gamma_db: float,
                          w_max: int = Config.DEFAULT_WMAX_FADING) -> List[Tuple[PuncturePattern, float]]:
    """
    Rank puncturing patterns by the union bound of the punctured code with a
    single interleaver over all surviving bits. Catastrophic patterns are skipped.
    """
    c = build(list(alphas), M)
    table = RandomMuxTable.s_interleaver(code.n, c.q)
    trellis = build_trellis(code)
    d = amplitudes(np.array(c.alphas)[None, :])
    ranked = []
    for P in enumerate_puncture_patterns(code.n, period, ones):
        try:
            spectrum = expected_ewds(trellis, table, w_max, puncture=P)
        except SpectrumSearchError:
            LOGGER.warning(f"puncture pattern {P.text} gives a catastrophic code; skipped")
            continue
        if spectrum.empty:
            continue
        ub = float(union_bound_grid(spectrum, d, channel.at_db(gamma_db), code.k_c)[0])
        ranked.append((P, ub))
    ranked.sort(key=lambda item: (item[1], item[0].text))
    return ranked
