# hqam_bicm/core/spectrum.py
"""
Equivalent weight distribution spectra of a convolutional encoder followed by
a bit multiplexer.

Error events leave the zero state with a nonzero input and end at their first
return to it. Each event is tracked by the Hamming weight it leaves on every
modulator stream; the spectrum stores, per stream-weight vector w, the summed
input weight of all events (averaged over the divergence phase).

Random multiplexers are handled by routing every nonzero code bit with integer
weights a[p][k] = D * Pr{p -> k}, so an event with total weight |w| carries a
common denominator D^|w|.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError, SpectrumSearchError
from hqam_bicm.core.convcode import PuncturePattern, Trellis
from hqam_bicm.core.mux import DMuxPattern, RandomMuxTable

LOGGER = logging.getLogger(__name__)

EXACT_FLOAT_LIMIT = 2.0 ** 53

# route[phase][output_index] -> list of (stream weight increment, integer coefficient)
Route = List[List[List[Tuple[Tuple[int, ...], int]]]]


@dataclass(frozen=True, eq=False)
class WeightSpectrum:
    """Map from stream-weight vectors to rational multiplicities."""
    entries: Dict[Tuple[int, ...], Fraction]
    w_max: int
    phases: int
    q: int
    source: str = ""
    _cache: Dict = field(default_factory=dict, repr=False)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def empty(self) -> bool:
        return not self.entries

    def sorted_weights(self) -> List[Tuple[int, ...]]:
        """Weight vectors ordered by total weight, then lexicographically."""
        return sorted(self.entries, key=lambda w: (sum(w), w))

    def arrays(self) -> Tuple[np.ndarray, np.ndarray]:
        """(weights E x q, log beta E) in sorted order, for vectorized bounds."""
        if "arrays" not in self._cache:
            keys = self.sorted_weights()
            weights = np.array(keys, dtype=float).reshape(len(keys), self.q)
            log_beta = np.array([math.log(self.entries[w].numerator) - math.log(self.entries[w].denominator)
                                 for w in keys])
            self._cache["arrays"] = (weights, log_beta)
        return self._cache["arrays"]

    def marginal(self) -> Dict[int, Fraction]:
        """Multiplicity per total weight |w|."""
        out: Dict[int, Fraction] = {}
        for w, beta in self.entries.items():
            out[sum(w)] = out.get(sum(w), Fraction(0)) + beta
        return dict(sorted(out.items()))

    @property
    def free_weight(self) -> Optional[int]:
        return min((sum(w) for w in self.entries), default=None)

    @property
    def last_shell(self) -> int:
        """Largest total weight present."""
        return max((sum(w) for w in self.entries), default=0)

    def to_rows(self) -> List[Dict[str, int]]:
        rows = []
        for w in self.sorted_weights():
            beta = self.entries[w]
            row = {f"w_{k + 1}": int(x) for k, x in enumerate(w)}
            row["beta_numerator"] = beta.numerator
            row["beta_denominator"] = beta.denominator
            rows.append(row)
        return rows


def _bits_msb_first(b: int, n: int) -> List[int]:
    return [(b >> (n - 1 - p)) & 1 for p in range(n)]


def dmux_route(pattern: DMuxPattern, n: int) -> Route:
    """Deterministic increments: bit p at column phase c adds 1 to stream assign[p, c]."""
    if pattern.n != n:
        raise ConfigError(f"D-MUX has {pattern.n} rows, code has {n} outputs")
    route = []
    for c in range(pattern.J):
        per_output = []
        for b in range(1 << n):
            delta = [0] * pattern.q
            for p, bit in enumerate(_bits_msb_first(b, n)):
                if bit:
                    delta[pattern.assign[p, c] - 1] += 1
            per_output.append([(tuple(delta), 1)])
        route.append(per_output)
    return route


def table_route(table: RandomMuxTable, n: int, puncture: Optional[PuncturePattern] = None) -> Tuple[Route, int]:
    """Expanded routing polynomials of a random multiplexer; returns (route, D)."""
    if table.n != n:
        raise ConfigError(f"probability table has {table.n} rows, code has {n} outputs")
    if puncture is not None and puncture.n != n:
        raise ConfigError(f"puncture pattern has {puncture.n} rows, code has {n} outputs")
    D = reduce(math.lcm, (x.denominator for row in table.probabilities for x in row), 1)
    a = [[int(x * D) for x in row] for row in table.probabilities]
    period = puncture.period if puncture is not None else 1
    route = []
    for c in range(period):
        per_output = []
        for b in range(1 << n):
            poly: Dict[Tuple[int, ...], int] = {(0,) * table.q: 1}
            for p, bit in enumerate(_bits_msb_first(b, n)):
                if not bit or (puncture is not None and not puncture.mask[p, c]):
                    continue
                grown: Dict[Tuple[int, ...], int] = {}
                for delta, coeff in poly.items():
                    for k in range(table.q):
                        if a[p][k]:
                            key = delta[:k] + (delta[k] + 1,) + delta[k + 1:]
                            grown[key] = grown.get(key, 0) + coeff * a[p][k]
                poly = grown
            per_output.append(sorted(poly.items()))
        route.append(per_output)
    return route, D


def _shift_add(dst: np.ndarray, src: np.ndarray, delta: Sequence[int], coeff: int, w_max: int) -> None:
    if any(d > w_max for d in delta):
        return
    dst_idx = tuple(slice(d, None) for d in delta)
    src_idx = tuple(slice(0, w_max + 1 - d) for d in delta)
    term = src[src_idx]
    dst[dst_idx] += term if coeff == 1 else coeff * term


def _phase_search(trellis: Trellis, route: Route, w_max: int, start: int,
                  exact_objects: bool, max_steps: int) -> Tuple[np.ndarray, float]:
    """
    Input-weight sums of all events diverging at column phase `start`.

    Returns:
        (array indexed by stream weights, peak magnitude seen during the search).
    """
    q = len(route[0][0][0][0])
    dtype = object if exact_objects else float
    shape = (w_max + 1,) * q
    S, U = trellis.next_state.shape
    totals = np.indices(shape).sum(axis=0)
    over = totals > w_max
    popcount = [bin(u).count("1") for u in range(U)]

    N = np.zeros((S,) + shape, dtype=dtype)
    I = np.zeros((S,) + shape, dtype=dtype)
    N[(0,) + (0,) * q] = 1
    result = np.zeros(shape, dtype=dtype)
    peak = 0.0
    active = [0]
    phase = start
    for step in range(max_steps):
        new_N = np.zeros_like(N)
        new_I = np.zeros_like(I)
        for s in active:
            for u in range(1 if step == 0 else 0, U):
                ns = trellis.next_state[s, u]
                h = popcount[u]
                carried = I[s] + h * N[s] if h else I[s]
                for delta, coeff in route[phase][trellis.output_index[s, u]]:
                    _shift_add(new_N[ns], N[s], delta, coeff, w_max)
                    _shift_add(new_I[ns], carried, delta, coeff, w_max)
        new_N[:, over] = 0
        new_I[:, over] = 0
        result += new_I[0]
        new_N[0] = 0
        new_I[0] = 0
        if not exact_objects:
            peak = max(peak, float(new_N.max()), float(new_I.max()), float(result.max()))
        N, I = new_N, new_I
        phase = (phase + 1) % len(route)
        active = [s for s in range(1, S) if N[s].any()]
        if not active:
            return result, peak
    raise SpectrumSearchError(
        f"trellis search still has live paths after {max_steps} steps (catastrophic code or w_max too large)")


def _search(trellis: Trellis, route: Route, w_max: int, jobs: int, max_steps: int) -> np.ndarray:
    """Sum of per-phase searches; float64 first, Python integers when counts outgrow it."""
    phases = list(range(len(route)))
    for exact_objects in (False, True):
        args = [(trellis, route, w_max, j, exact_objects, max_steps) for j in phases]
        if jobs > 1 and len(phases) > 1:
            with ProcessPoolExecutor(max_workers=min(jobs, len(phases))) as pool:
                parts = list(pool.map(_phase_search, *zip(*args)))
        else:
            parts = [_phase_search(*a) for a in args]
        total = sum((p for p, _ in parts[1:]), parts[0][0].copy())
        peak = max(max(pk for _, pk in parts), float(np.max(total)) if not exact_objects else 0.0)
        if exact_objects or peak < EXACT_FLOAT_LIMIT:
            return total
        LOGGER.debug(f"path counts reach {peak:.3g}; repeating search with exact integers")
    return total


def _spectrum_from_sums(total: np.ndarray, phases: int, D: int, w_max: int, source: str) -> WeightSpectrum:
    q = total.ndim
    entries: Dict[Tuple[int, ...], Fraction] = {}
    for idx in zip(*np.nonzero(total)):
        w = tuple(int(x) for x in idx)
        entries[w] = Fraction(int(total[idx]), phases * D ** sum(w))
    spectrum = WeightSpectrum(entries=entries, w_max=w_max, phases=phases, q=q, source=source)
    if spectrum.empty:
        LOGGER.warning(f"empty spectrum for {source}: w_max={w_max} is below the free distance")
    else:
        LOGGER.info(f"spectrum {source}: {len(spectrum)} entries up to weight {w_max}")
    return spectrum


def compute_ewds(trellis: Trellis, pattern: DMuxPattern, w_max: int, jobs: int = 1,
                 max_steps: int = Config.SPECTRUM_MAX_STEPS) -> WeightSpectrum:
    """
    Spectrum of the encoder followed by a periodic D-MUX, averaged over the J
    divergence phases.

    Args:
        trellis: Code trellis.
        pattern: D-MUX with n rows matching the code.
        w_max: Truncation on the total event weight.
        jobs: Worker processes for the per-phase searches.
        max_steps: Step cap guarding against catastrophic codes.

    Returns:
        WeightSpectrum with multiplicities that are multiples of 1/J.
    """
    if w_max < 1:
        raise ConfigError("w_max must be positive")
    route = dmux_route(pattern, trellis.code.n)
    total = _search(trellis, route, w_max, jobs, max_steps)
    return _spectrum_from_sums(total, pattern.J, 1, w_max, f"code {trellis.code.octal}, mux {pattern.text}")


def expected_ewds(trellis: Trellis, table: RandomMuxTable, w_max: int,
                  puncture: Optional[PuncturePattern] = None, jobs: int = 1,
                  max_steps: int = Config.SPECTRUM_MAX_STEPS) -> WeightSpectrum:
    """
    Expected spectrum under a random multiplexer (R-MUX or S-interleaver),
    optionally after puncturing; phases are the puncture period.
    """
    if w_max < 1:
        raise ConfigError("w_max must be positive")
    route, D = table_route(table, trellis.code.n, puncture)
    total = _search(trellis, route, w_max, jobs, max_steps)
    label = f"code {trellis.code.octal}, {table.name} {table.text}"
    if puncture is not None:
        label += f", puncture {puncture.text}"
    return _spectrum_from_sums(total, len(route), D, w_max, label)


def scalar_spectrum(trellis: Trellis, w_max: int) -> Dict[int, Fraction]:
    """Input-weight spectrum of the code alone, per total output weight."""
    pattern = DMuxPattern(np.ones((trellis.code.n, 1), dtype=np.int64), 1)
    return compute_ewds(trellis, pattern, w_max).marginal()
