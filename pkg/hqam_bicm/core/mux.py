# hqam_bicm/core/mux.py
"""
Bit multiplexers between encoder outputs and modulator bit positions.

A DMuxPattern is periodic over J code columns: cell (p, t') of its n x J
assign matrix sends encoder output p at column t' to stream assign[p, t'],
at within-period slot time_fill[p, t']. Period tau of a block occupies slots
tau * nJ/q .. (tau+1) * nJ/q - 1 of every stream.
"""

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from hqam_bicm.app.error_handler import ConfigError

LOGGER = logging.getLogger(__name__)

SeedLike = Union[int, Sequence[int]]


def _column_major_fill(assign: np.ndarray, q: int) -> np.ndarray:
    counters = np.zeros(q + 1, dtype=np.int64)
    time_fill = np.zeros_like(assign)
    n, J = assign.shape
    for t in range(J):
        for p in range(n):
            k = assign[p, t]
            counters[k] += 1
            time_fill[p, t] = counters[k]
    return time_fill


@dataclass(frozen=True, eq=False)
class DMuxPattern:
    """Periodic deterministic multiplexer."""
    assign: np.ndarray
    q: int
    time_fill: Optional[np.ndarray] = None

    def __post_init__(self):
        assign = np.atleast_2d(np.asarray(self.assign, dtype=np.int64))
        n, J = assign.shape
        q = int(self.q)
        if q < 1 or (n * J) % q:
            raise ConfigError(f"n*J = {n * J} is not a multiple of q = {q}")
        if assign.min() < 1 or assign.max() > q:
            raise ConfigError(f"stream indices must lie in 1..{q}")
        load = n * J // q
        counts = np.bincount(assign.ravel(), minlength=q + 1)[1:]
        if np.any(counts != load):
            raise ConfigError(f"every stream must appear {load} times per period, got counts {counts.tolist()}")
        if self.time_fill is None:
            time_fill = _column_major_fill(assign, q)
        else:
            time_fill = np.asarray(self.time_fill, dtype=np.int64)
            if time_fill.shape != assign.shape:
                raise ConfigError("time indices must match the assign matrix shape")
            for k in range(1, q + 1):
                if sorted(time_fill[assign == k].tolist()) != list(range(1, load + 1)):
                    raise ConfigError(f"stream {k} time slots must be a permutation of 1..{load}")
        assign.setflags(write=False)
        time_fill.setflags(write=False)
        object.__setattr__(self, "assign", assign)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "time_fill", time_fill)

    @classmethod
    def from_text(cls, text: str, q: Optional[int] = None, n: Optional[int] = None) -> "DMuxPattern":
        """
        Parse "2,2/1,1" (rows separated by '/') or "1:1,2:2,2:1/1:2,3:2,3:1"
        with explicit stream:time cells. "identity" needs q and n.
        """
        text = text.strip()
        if text == "identity":
            if q is None or n is None:
                raise ConfigError("the identity pattern needs both n and q")
            return cls.identity(n, q)
        try:
            rows = [[cell.strip() for cell in row.split(",")] for row in text.split("/")]
            has_times = any(":" in cell for row in rows for cell in row)
            if has_times:
                pairs = [[tuple(int(x) for x in cell.split(":")) for cell in row] for row in rows]
                assign = np.array([[k for k, _ in row] for row in pairs])
                times = np.array([[t for _, t in row] for row in pairs])
            else:
                assign = np.array([[int(cell) for cell in row] for row in rows])
                times = None
        except ValueError as e:
            raise ConfigError(f"invalid D-MUX text '{text}': {e}") from e
        if assign.ndim != 2:
            raise ConfigError(f"D-MUX rows of '{text}' must have equal length")
        if n is not None and assign.shape[0] != n:
            raise ConfigError(f"D-MUX has {assign.shape[0]} rows, code has {n} outputs")
        return cls(assign, int(q if q is not None else assign.max()), times)

    @classmethod
    def identity(cls, n: int, q: int) -> "DMuxPattern":
        """Shortest pattern cycling streams 1..q over cells in column-major order."""
        J = q // math.gcd(n, q)
        cells = np.arange(n * J) % q + 1
        return cls(cells.reshape(J, n).T, q)

    @property
    def n(self) -> int:
        return self.assign.shape[0]

    @property
    def J(self) -> int:
        return self.assign.shape[1]

    @property
    def load(self) -> int:
        """Bits each stream receives per period."""
        return self.n * self.J // self.q

    @property
    def key(self) -> Tuple[int, ...]:
        return tuple(self.assign.ravel().tolist())

    @property
    def text(self) -> str:
        return "/".join(",".join(str(k) for k in row) for row in self.assign)

    def rotate(self, r: int) -> "DMuxPattern":
        """Cyclic column rotation with time slots reassigned canonically."""
        return DMuxPattern(np.roll(self.assign, -r, axis=1), self.q)

    def canonical(self) -> "DMuxPattern":
        """Class representative: the rotation with the smallest row-major key."""
        return min((self.rotate(r) for r in range(self.J)), key=lambda p: p.key)

    def same_class(self, other: "DMuxPattern") -> bool:
        return self.q == other.q and self.assign.shape == other.assign.shape \
            and self.canonical().key == other.canonical().key

    def expand(self, N_c: int) -> "MuxMap":
        """Full (stream, slot) map for a block of N_c code columns."""
        if N_c % self.J:
            raise ConfigError(f"block length {N_c} is not a multiple of the period J = {self.J}")
        reps = N_c // self.J
        tau = np.repeat(np.arange(reps), self.J)[None, :]
        stream_of = np.tile(self.assign, (1, reps)) - 1
        slot_of = np.tile(self.time_fill, (1, reps)) - 1 + tau * self.load
        return MuxMap(stream_of=stream_of, slot_of=slot_of, q=self.q)

    def to_json(self) -> Dict:
        return {
            "n": self.n,
            "J": self.J,
            "q": self.q,
            "mux": self.text,
            "K0": [[[int(k), int(t)] for k, t in zip(ra, rt)] for ra, rt in zip(self.assign, self.time_fill)],
        }


@dataclass(frozen=True, eq=False)
class MuxMap:
    """Bijection from code positions (p, t') to stream positions (k, slot), zero-based."""
    stream_of: np.ndarray
    slot_of: np.ndarray
    q: int

    @property
    def stream_length(self) -> int:
        return self.stream_of.size // self.q

    def apply(self, C: np.ndarray) -> np.ndarray:
        """n x N_c (leading batch axes allowed) -> q x N_s."""
        C = np.asarray(C)
        if C.shape[-2:] != self.stream_of.shape:
            raise ConfigError(f"code block shape {C.shape[-2:]} does not match mux map {self.stream_of.shape}")
        O = np.empty(C.shape[:-2] + (self.q, self.stream_length), dtype=C.dtype)
        O[..., self.stream_of, self.slot_of] = C
        return O

    def demux(self, O: np.ndarray) -> np.ndarray:
        """q x N_s (leading batch axes allowed) -> n x N_c."""
        return np.asarray(O)[..., self.stream_of, self.slot_of]


def apply_dmux(C: np.ndarray, pattern: DMuxPattern) -> np.ndarray:
    """Multiplex an n x N_c code block onto q streams of N_s = n N_c / q bits."""
    return pattern.expand(np.shape(C)[-1]).apply(C)


def demux_llrs(O: np.ndarray, pattern: DMuxPattern) -> np.ndarray:
    """Inverse of apply_dmux for bits or L-values."""
    N_s = np.shape(O)[-1]
    return pattern.expand(N_s * pattern.q // pattern.n).demux(O)


def _distinct_permutations(counts: List[int]) -> List[Tuple[int, ...]]:
    """All distinct sequences using symbol s+1 exactly counts[s] times, in lexicographic order."""
    total = sum(counts)
    out: List[Tuple[int, ...]] = []
    prefix: List[int] = []

    def extend():
        if len(prefix) == total:
            out.append(tuple(prefix))
            return
        for s, c in enumerate(counts):
            if c:
                counts[s] -= 1
                prefix.append(s + 1)
                extend()
                prefix.pop()
                counts[s] += 1

    extend()
    return out


def enumerate_canonical(n: int, J: int, q: int) -> List[DMuxPattern]:
    """
    One representative per rotation class of balanced n x J assign matrices.

    Representatives are sorted by row-major key; a pattern's 1-based position
    in this list is its id.
    """
    if (n * J) % q:
        raise ConfigError(f"n*J = {n * J} is not a multiple of q = {q}")
    load = n * J // q
    classes: Dict[Tuple[int, ...], DMuxPattern] = {}
    for cells in _distinct_permutations([load] * q):
        rep = DMuxPattern(np.array(cells).reshape(n, J), q).canonical()
        classes.setdefault(rep.key, rep)
    patterns = [classes[k] for k in sorted(classes)]
    LOGGER.debug(f"{len(patterns)} canonical D-MUX classes for n={n}, J={J}, q={q}")
    return patterns


def count_canonical(n: int, J: int, q: int) -> int:
    """Number of rotation classes, by Burnside's lemma."""
    if (n * J) % q:
        raise ConfigError(f"n*J = {n * J} is not a multiple of q = {q}")
    load = n * J // q
    fixed_total = 0
    for r in range(J):
        g = math.gcd(r, J)
        repeats = J // g
        if load % repeats:
            continue
        c = load // repeats
        fixed_total += math.factorial(n * g) // math.factorial(c) ** q
    return fixed_total // J


@lru_cache(maxsize=64)
def _permutation(length: int, seed_key: Tuple[int, ...]) -> np.ndarray:
    perm = np.random.default_rng(np.random.SeedSequence(list(seed_key))).permutation(length)
    perm.setflags(write=False)
    return perm


def _seed_key(seed: SeedLike) -> Tuple[int, ...]:
    if isinstance(seed, (int, np.integer)):
        return (int(seed),)
    return tuple(int(s) for s in seed)


class Interleaver:
    """Seeded uniform random permutation of a fixed-length stream."""

    def __init__(self, length: int, seed: SeedLike):
        if length < 1:
            raise ConfigError("interleaver length must be positive")
        self.length = int(length)
        self.seed = seed
        self.permutation = _permutation(self.length, _seed_key(seed))

    def _check(self, stream: np.ndarray) -> np.ndarray:
        stream = np.asarray(stream)
        if stream.shape[-1] != self.length:
            raise ConfigError(f"stream length {stream.shape[-1]} != interleaver length {self.length}")
        return stream

    def interleave(self, stream: np.ndarray) -> np.ndarray:
        return self._check(stream)[..., self.permutation]

    def deinterleave(self, stream: np.ndarray) -> np.ndarray:
        stream = self._check(stream)
        out = np.empty_like(stream)
        out[..., self.permutation] = stream
        return out


def interleave(stream: np.ndarray, seed: SeedLike) -> np.ndarray:
    return Interleaver(np.shape(stream)[-1], seed).interleave(stream)


def deinterleave(stream: np.ndarray, seed: SeedLike) -> np.ndarray:
    return Interleaver(np.shape(stream)[-1], seed).deinterleave(stream)


def _fraction(token: str) -> Fraction:
    return Fraction(token.strip())


@dataclass(frozen=True)
class RandomMuxTable:
    """
    R-MUX probabilities: probabilities[p][k] is the chance that a bit from
    encoder output p goes to stream k (both zero-based here).
    """
    probabilities: Tuple[Tuple[Fraction, ...], ...]
    name: str = "r-mux"

    def __post_init__(self):
        probs = tuple(tuple(Fraction(x) for x in row) for row in self.probabilities)
        if not probs or any(len(r) != len(probs[0]) for r in probs):
            raise ConfigError("probability table rows must have equal length")
        for p, row in enumerate(probs):
            if any(x < 0 for x in row) or sum(row) != 1:
                raise ConfigError(f"row {p + 1} of the probability table must be a distribution")
        n, q = len(probs), len(probs[0])
        for k in range(q):
            load = sum(row[k] for row in probs)
            if load != Fraction(n, q):
                raise ConfigError(
                    f"infeasible probability table: stream {k + 1} expects load {load}, needs {Fraction(n, q)}")
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_text(cls, text: str) -> "RandomMuxTable":
        """Parse "0,1/3,2/3;2/3,1/3,0" (rows per encoder output separated by ';')."""
        try:
            rows = tuple(tuple(_fraction(x) for x in row.split(",")) for row in text.strip().split(";"))
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"invalid probability table '{text}': {e}") from e
        return cls(rows)

    @classmethod
    def s_interleaver(cls, n: int, q: int) -> "RandomMuxTable":
        """Uniform table of a single interleaver over all coded bits."""
        return cls(tuple(tuple(Fraction(1, q) for _ in range(q)) for _ in range(n)), name="s-interleaver")

    @property
    def n(self) -> int:
        return len(self.probabilities)

    @property
    def q(self) -> int:
        return len(self.probabilities[0])

    @property
    def text(self) -> str:
        return ";".join(",".join(str(x) for x in row) for row in self.probabilities)

    def as_array(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.probabilities])


def _rebalance_path(present: np.ndarray, allowed: np.ndarray, counts: np.ndarray, N_s: int) -> Optional[List[int]]:
    """Shortest stream chain from an over-full to an under-full stream along which one bit can move per hop."""
    edges = (present.T.astype(np.int64) @ allowed.astype(np.int64)) > 0
    frontier = [k for k in range(counts.size) if counts[k] > N_s]
    parent: Dict[int, Optional[int]] = {k: None for k in frontier}
    while frontier:
        reached = []
        for k in frontier:
            for nxt in np.flatnonzero(edges[k]).tolist():
                if nxt in parent:
                    continue
                parent[nxt] = k
                if counts[nxt] < N_s:
                    path = [nxt]
                    while parent[path[-1]] is not None:
                        path.append(parent[path[-1]])
                    return path[::-1]
                reached.append(nxt)
        frontier = reached
    return None


def random_mux_baseline(table: RandomMuxTable, N_c: int, rng: np.random.Generator) -> MuxMap:
    """
    Draw a length-exact random stream assignment for an n x N_c block.

    Bits are assigned independently with the table's probabilities. Surplus
    bits are then moved, one at a time, along the shortest chain of streams
    that respects the table's zero entries, until every stream holds exactly
    N_s = n N_c / q bits.
    """
    n, q = table.n, table.q
    if (n * N_c) % q:
        raise ConfigError(f"n*N_c = {n * N_c} is not a multiple of q = {q}")
    N_s = n * N_c // q
    probs = table.as_array()
    allowed = probs > 0
    cum = np.cumsum(probs, axis=1)
    u = rng.random((n, N_c))
    flat = np.minimum((u[..., None] > cum[:, None, :]).sum(axis=-1), q - 1).ravel()
    output_of = np.repeat(np.arange(n), N_c)
    counts = np.bincount(flat, minlength=q)

    while np.any(counts > N_s):
        present = np.zeros((n, q), dtype=bool)
        present[output_of, flat] = True
        path = _rebalance_path(present, allowed, counts, N_s)
        if path is None:
            raise ConfigError("random multiplexer could not reach exact stream loads")
        for src, dst in zip(path[:-1], path[1:]):
            movable = np.flatnonzero((flat == src) & allowed[output_of, dst])
            flat[rng.choice(movable)] = dst
        counts[path[0]] -= 1
        counts[path[-1]] += 1

    streams = flat.reshape(n, N_c)
    slot_of = np.zeros((n, N_c), dtype=np.int64)
    order = streams.T.ravel()
    slots_cm = np.zeros_like(order)
    for k in range(q):
        idx = np.flatnonzero(order == k)
        slots_cm[idx] = np.arange(idx.size)
    slot_of[:] = slots_cm.reshape(N_c, n).T
    return MuxMap(stream_of=streams, slot_of=slot_of, q=q)
