# hqam_bicm/core/convcode.py
"""
Feedforward convolutional codes: encoding, trellis tables, free distance,
soft-input Viterbi decoding and puncturing.

L-values follow log P(bit=0)/P(bit=1) everywhere, so a positive value favors 0.
"""

import heapq
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np

from hqam_bicm.app.error_handler import ConfigError

LOGGER = logging.getLogger(__name__)


def _parity(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    out = np.zeros_like(x)
    while np.any(x):
        out ^= x & 1
        x = x >> 1
    return out


@dataclass(frozen=True)
class ConvCode:
    """
    Rate k_c/n feedforward convolutional code.

    generators[i][p] is the octal tap polynomial from input i to output p; the
    most significant of its K bits multiplies the current input.
    """
    generators: Tuple[Tuple[int, ...], ...]
    K: int

    @classmethod
    def from_octal(cls, text: str) -> "ConvCode":
        """Parse "5,7" (one input) or "23,35,0;0,5,13" (inputs separated by ';')."""
        try:
            rows = tuple(
                tuple(int(tok.strip(), 8) for tok in row.split(","))
                for row in text.strip().split(";")
            )
        except ValueError as e:
            raise ConfigError(f"invalid octal generators '{text}': {e}") from e
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ConfigError(f"generator rows of '{text}' must have equal length")
        K = max(max(g.bit_length() for g in row) for row in rows)
        if K < 1:
            raise ConfigError(f"all-zero generators in '{text}'")
        return cls(generators=rows, K=K)

    @property
    def k_c(self) -> int:
        return len(self.generators)

    @property
    def n(self) -> int:
        return len(self.generators[0])

    @property
    def rate(self) -> float:
        return self.k_c / self.n

    @property
    def memory(self) -> int:
        return self.K - 1

    @property
    def octal(self) -> str:
        return ";".join(",".join(format(g, "o") for g in row) for row in self.generators)

    def taps(self, i: int, p: int) -> np.ndarray:
        """Coefficients of u_i[t - tau] for tau = 0..K-1."""
        g = self.generators[i][p]
        return np.array([(g >> (self.K - 1 - tau)) & 1 for tau in range(self.K)], dtype=np.int64)


@dataclass(frozen=True, eq=False)
class Trellis:
    """
    State-transition tables of a ConvCode.

    A state concatenates one (K-1)-bit register per input, input 0 most
    significant; each register holds u[t-1] in its top bit. Input symbols are
    integers whose bit i (MSB first) is input i.
    """
    code: ConvCode
    next_state: np.ndarray
    outputs: np.ndarray
    output_index: np.ndarray

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def num_inputs(self) -> int:
        return self.next_state.shape[1]

    def input_bits(self, u: np.ndarray) -> np.ndarray:
        """Unpack input symbols into (..., k_c) bits."""
        shifts = np.arange(self.code.k_c - 1, -1, -1)
        return (np.asarray(u)[..., None] >> shifts) & 1


@lru_cache(maxsize=None)
def build_trellis(code: ConvCode) -> Trellis:
    """Tabulate next states and output bits for every (state, input) pair."""
    m = code.memory
    k_c, n = code.k_c, code.n
    S = 1 << (k_c * m)
    U = 1 << k_c
    states = np.arange(S)[:, None]
    inputs = np.arange(U)[None, :]
    reg_mask = (1 << m) - 1
    next_state = np.zeros((S, U), dtype=np.int64)
    outputs = np.zeros((S, U, n), dtype=np.int8)
    for i in range(k_c):
        shift = (k_c - 1 - i) * m
        reg = (states >> shift) & reg_mask
        u_i = (inputs >> (k_c - 1 - i)) & 1
        window = (u_i << m) | reg
        if m > 0:
            next_state |= (((u_i << (m - 1)) | (reg >> 1)) & reg_mask) << shift
        for p in range(n):
            outputs[:, :, p] ^= _parity(window & code.generators[i][p]).astype(np.int8)
    weights = 1 << np.arange(n - 1, -1, -1)
    output_index = (outputs.astype(np.int64) * weights).sum(axis=-1)
    for arr in (next_state, outputs, output_index):
        arr.setflags(write=False)
    return Trellis(code=code, next_state=next_state, outputs=outputs, output_index=output_index)


def encode(code: ConvCode, info: np.ndarray) -> np.ndarray:
    """
    Encode a k_c x N info matrix from the zero state.

    Returns:
        n x N code bits; column t depends on info columns t-K+1..t.
    """
    info = np.atleast_2d(np.asarray(info, dtype=np.int64))
    if info.shape[0] != code.k_c:
        raise ConfigError(f"info has {info.shape[0]} rows, code expects {code.k_c}")
    N = info.shape[1]
    out = np.zeros((code.n, N), dtype=np.int64)
    for i in range(code.k_c):
        for p in range(code.n):
            out[p] ^= np.convolve(info[i], code.taps(i, p))[:N] & 1
    return out.astype(np.int8)


def free_distance(code: ConvCode, cap: int = 64) -> Optional[int]:
    """
    Minimum output weight of a nonzero path leaving and re-entering the zero state.

    Returns:
        The free distance, or None when it exceeds cap.
    """
    if cap < 1:
        raise ConfigError("cap must be >= 1")
    trellis = build_trellis(code)
    weights = trellis.outputs.sum(axis=-1)
    heap = []
    for u in range(1, trellis.num_inputs):
        w = int(weights[0, u])
        if w <= cap:
            heapq.heappush(heap, (w, int(trellis.next_state[0, u])))
    settled = set()
    while heap:
        w, s = heapq.heappop(heap)
        if s == 0:
            return w
        if s in settled:
            continue
        settled.add(s)
        for u in range(trellis.num_inputs):
            nw = w + int(weights[s, u])
            ns = int(trellis.next_state[s, u])
            if nw <= cap and ns not in settled:
                heapq.heappush(heap, (nw, ns))
    return None


def _predecessors(trellis: Trellis) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(prev_state, prev_input, prev_output_index), each S x U, sorted by predecessor state."""
    S, U = trellis.next_state.shape
    prev_state = np.zeros((S, U), dtype=np.int64)
    prev_input = np.zeros((S, U), dtype=np.int64)
    fill = np.zeros(S, dtype=np.int64)
    for s in range(S):
        for u in range(U):
            ns = trellis.next_state[s, u]
            prev_state[ns, fill[ns]] = s
            prev_input[ns, fill[ns]] = u
            fill[ns] += 1
    prev_output = trellis.output_index[prev_state, prev_input]
    return prev_state, prev_input, prev_output


def viterbi_decode(trellis: Trellis, llrs: np.ndarray, terminated: bool = False) -> np.ndarray:
    """
    Maximum-metric soft-input Viterbi decoding with full traceback.

    The branch metric is sum_p (-1)^{c_p} L_p. Among equal metrics the smaller
    predecessor state wins, so decisions are deterministic.

    Args:
        trellis: Code trellis.
        llrs: n x T L-values, or B x n x T for a batch of blocks.
        terminated: Trace back from the zero state instead of the best final state.

    Returns:
        k_c x T (or B x k_c x T) decided info bits.
    """
    llrs = np.asarray(llrs, dtype=float)
    batched = llrs.ndim == 3
    if not batched:
        llrs = llrs[None]
    B, n, T = llrs.shape
    if n != trellis.code.n:
        raise ConfigError(f"llrs have {n} rows, code has {trellis.code.n} outputs")

    prev_state, prev_input, prev_output = _predecessors(trellis)
    S = trellis.num_states
    patterns = np.arange(1 << n)
    signs = 1.0 - 2.0 * ((patterns[:, None] >> np.arange(n - 1, -1, -1)) & 1)
    branch = np.einsum("cn,bnt->bct", signs, llrs)

    metric = np.full((B, S), -np.inf)
    metric[:, 0] = 0.0
    decisions = np.zeros((T, B, S), dtype=np.int8)
    rows = np.arange(B)[:, None]
    for t in range(T):
        candidates = metric[:, prev_state] + branch[:, prev_output, t]
        best = np.argmax(candidates, axis=-1)
        decisions[t] = best
        metric = np.take_along_axis(candidates, best[..., None], axis=-1)[..., 0]
        metric -= metric.max(axis=-1, keepdims=True)

    state = np.zeros(B, dtype=np.int64) if terminated else np.argmax(metric, axis=-1)
    symbols = np.zeros((B, T), dtype=np.int64)
    for t in range(T - 1, -1, -1):
        choice = decisions[t, rows[:, 0], state]
        symbols[:, t] = prev_input[state, choice]
        state = prev_state[state, choice]

    bits = np.moveaxis(trellis.input_bits(symbols), -1, 1).astype(np.int8)
    return bits if batched else bits[0]


@dataclass(frozen=True, eq=False)
class PuncturePattern:
    """n x P keep-mask; column t applies to code columns t, t+P, t+2P, ..."""
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=np.int8)
        if mask.ndim != 2 or not np.isin(mask, (0, 1)).all():
            raise ConfigError("puncture pattern must be a binary n x P matrix")
        if mask.sum() == 0:
            raise ConfigError("puncture pattern keeps no bits")
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def from_text(cls, text: str) -> "PuncturePattern":
        """Parse column-major text such as "10,11,01" (one token per column)."""
        columns = [tok.strip() for tok in text.split(",") if tok.strip()]
        if not columns or any(len(c) != len(columns[0]) or set(c) - {"0", "1"} for c in columns):
            raise ConfigError(f"invalid puncture pattern '{text}'")
        return cls(np.array([[int(b) for b in c] for c in columns], dtype=np.int8).T)

    @property
    def n(self) -> int:
        return self.mask.shape[0]

    @property
    def period(self) -> int:
        return self.mask.shape[1]

    @property
    def survivors(self) -> int:
        return int(self.mask.sum())

    def rate(self, k_c: int = 1) -> float:
        return k_c * self.period / self.survivors

    @property
    def text(self) -> str:
        return ",".join("".join(str(b) for b in col) for col in self.mask.T)

    def full_mask(self, N: int) -> np.ndarray:
        if N % self.period:
            raise ConfigError(f"block of {N} columns is not a multiple of the puncture period {self.period}")
        return np.tile(self.mask, (1, N // self.period)).astype(bool)


def puncture(bits: np.ndarray, P: PuncturePattern) -> np.ndarray:
    """Serialize the surviving bits of an n x N matrix in column-major order."""
    bits = np.asarray(bits)
    if bits.shape[0] != P.n:
        raise ConfigError(f"pattern has {P.n} rows, code bits have {bits.shape[0]}")
    keep = P.full_mask(bits.shape[1])
    return bits.T[keep.T]


def depuncture(llrs: np.ndarray, P: PuncturePattern) -> np.ndarray:
    """Place serialized L-values back into an n x N matrix, zeros at punctured slots."""
    llrs = np.asarray(llrs, dtype=float).ravel()
    if llrs.size % P.survivors:
        raise ConfigError(f"{llrs.size} values do not fill whole puncture periods of {P.survivors}")
    N = llrs.size // P.survivors * P.period
    keep = P.full_mask(N)
    out = np.zeros((N, P.n))
    out[keep.T] = llrs
    return out.T
