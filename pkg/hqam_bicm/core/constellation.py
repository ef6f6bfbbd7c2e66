# hqam_bicm/core/constellation.py
"""
Hierarchical M-PAM constellations with binary reflected Gray labels.

Point j is the signed sum of the amplitudes d_1..d_q, where the sign of d_k
follows the k-th bit (MSB first) of the natural binary index j: bit 0 gives
-d_k, bit 1 gives +d_k. The amplitudes are fixed by the ratios
alpha_k = d_{k+1} / d_1 and unit average energy.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError, HqamBicmError, RegionError

LOGGER = logging.getLogger(__name__)


def bits_per_symbol(M: int) -> int:
    """Return log2(M), raising ConfigError unless M is a power of two."""
    if not isinstance(M, (int, np.integer)) or M < 2 or (M & (M - 1)) != 0:
        raise ConfigError(f"M must be a power of two >= 2, got {M}")
    return int(M).bit_length() - 1


def gray_code(j: Union[int, np.ndarray]) -> Union[int, np.ndarray]:
    """Binary reflected Gray code of j."""
    return j ^ (j >> 1)


def inverse_gray_code(g: np.ndarray) -> np.ndarray:
    """Natural index whose Gray code is g."""
    g = np.asarray(g, dtype=np.int64)
    j = g.copy()
    shift = g >> 1
    while np.any(shift):
        j ^= shift
        shift >>= 1
    return j


def index_bits(values: np.ndarray, q: int) -> np.ndarray:
    """Unpack integers into (..., q) bit arrays, most significant bit first."""
    values = np.asarray(values, dtype=np.int64)
    shifts = np.arange(q - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.int8)


def amplitudes(alphas: np.ndarray) -> np.ndarray:
    """
    Unit-energy amplitudes d for one or many alpha vectors.

    Args:
        alphas: Array of shape (..., q-1).

    Returns:
        Array of shape (..., q) with d_1 = (1 + sum alpha^2)^(-1/2), d_{k+1} = alpha_k d_1.
    """
    alphas = np.asarray(alphas, dtype=float)
    d1 = 1.0 / np.sqrt(1.0 + np.sum(alphas ** 2, axis=-1))
    ones = np.ones(alphas.shape[:-1] + (1,))
    return np.concatenate([ones, alphas], axis=-1) * d1[..., None]


@dataclass(frozen=True)
class RegionReport:
    """Outcome of a region check."""
    valid: bool
    violations: List[str] = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.valid


def validate_region(alphas: Sequence[float], tol: float = Config.ENERGY_TOLERANCE) -> RegionReport:
    """Check alpha_k >= sum_{j>k} alpha_j, sum alpha <= 1 and alpha_{q-1} >= 0."""
    a = np.asarray(alphas, dtype=float).ravel()
    violations = []
    if a.size == 0:
        return RegionReport(True, violations)
    if not np.all(np.isfinite(a)):
        return RegionReport(False, ["alphas must be finite"])
    for k in range(a.size - 1):
        tail = float(np.sum(a[k + 1:]))
        if a[k] < tail - tol:
            terms = " + ".join(f"alpha_{j + 1}" for j in range(k + 1, a.size))
            violations.append(f"alpha_{k + 1} >= {terms} fails ({a[k]:g} < {tail:g})")
    if np.sum(a) > 1.0 + tol:
        violations.append(f"sum of alphas <= 1 fails ({np.sum(a):g} > 1)")
    if a[-1] < -tol:
        violations.append(f"alpha_{a.size} >= 0 fails ({a[-1]:g} < 0)")
    return RegionReport(not violations, violations)


def region_mask(alpha_grid: np.ndarray, tol: float = Config.ENERGY_TOLERANCE) -> np.ndarray:
    """Vectorized validate_region over the rows of an (G, q-1) array."""
    a = np.asarray(alpha_grid, dtype=float)
    if a.shape[-1] == 0:
        return np.ones(a.shape[:-1], dtype=bool)
    tails = np.cumsum(a[..., ::-1], axis=-1)[..., ::-1]
    ok = np.all(a[..., :-1] >= tails[..., 1:] - tol, axis=-1)
    ok &= tails[..., 0] <= 1.0 + tol
    ok &= a[..., -1] >= -tol
    return ok


@dataclass(frozen=True, eq=False)
class Constellation:
    """Unit-energy hierarchical PAM constellation with BRGC labels."""
    M: int
    alphas: Tuple[float, ...]
    d: np.ndarray
    points: np.ndarray
    labels: np.ndarray

    @property
    def q(self) -> int:
        return int(self.M).bit_length() - 1

    @property
    def label_strings(self) -> List[str]:
        return ["".join(str(b) for b in row) for row in self.labels]

    @property
    def energy(self) -> float:
        return float(np.mean(self.points ** 2))

    def bit_mask(self, k: int, value: int) -> np.ndarray:
        """Boolean mask of points whose k-th label bit (1-based) equals value."""
        return self.labels[:, k - 1] == value


def build_unchecked(alphas: Sequence[float], M: int) -> Constellation:
    """Build without the region check; intended for plotting out-of-region geometries."""
    q = bits_per_symbol(M)
    a = np.asarray(alphas, dtype=float).ravel()
    if a.size != q - 1:
        raise ConfigError(f"M={M} needs {q - 1} alphas, got {a.size}")
    d = amplitudes(a)
    j = np.arange(M)
    signs = 2.0 * index_bits(j, q) - 1.0
    points = signs @ d
    labels = index_bits(gray_code(j), q)
    d.setflags(write=False)
    points.setflags(write=False)
    labels.setflags(write=False)
    return Constellation(M=int(M), alphas=tuple(float(x) for x in a), d=d, points=points, labels=labels)


def build(alphas: Sequence[float], M: int) -> Constellation:
    """
    Build a unit-energy HPAM constellation.

    Args:
        alphas: alpha_1..alpha_{q-1}.
        M: Constellation size, a power of two.

    Returns:
        The constellation, with points sorted ascending and BRGC labels.

    Raises:
        ConfigError: On dimension mismatch.
        RegionError: When alphas violate the Gray-labeling region.
    """
    q = bits_per_symbol(M)
    if len(alphas) != q - 1:
        raise ConfigError(f"M={M} needs {q - 1} alphas, got {len(alphas)}")
    report = validate_region(alphas)
    if not report.valid:
        raise RegionError(report.violations)
    return build_unchecked(alphas, M)


def nearest_competitor(c: Constellation, k: int, j: int) -> int:
    """Index of the point closest to x_j whose k-th label bit differs; ties go to the smaller index."""
    if not 1 <= k <= c.q or not 0 <= j < c.M:
        raise ConfigError(f"bit position {k} / point index {j} out of range for M={c.M}")
    candidates = np.flatnonzero(c.labels[:, k - 1] != c.labels[j, k - 1])
    distances = np.abs(c.points[candidates] - c.points[j])
    return int(candidates[np.argmin(distances)])


def closed_form_mu(d: np.ndarray) -> List[np.ndarray]:
    """
    Positive mu values 4 (d_k - sum_{k'>k} b_{k'}(j) d_{k'})^2 for j = 0..M/2^k - 1.

    The bits b_{k'}(j) are the q-k bits of j, most significant first, aligned
    with k' = k+1..q. Works on a single d vector or a (G, q) stack.

    Returns:
        One array per bit level, shaped (..., M_k).
    """
    d = np.asarray(d, dtype=float)
    q = d.shape[-1]
    levels = []
    for k in range(1, q + 1):
        n_bits = q - k
        if n_bits == 0:
            offsets = np.zeros(d.shape[:-1] + (1,))
        else:
            bits = index_bits(np.arange(2 ** n_bits), n_bits).astype(float)
            offsets = d[..., k:] @ bits.T
        levels.append(4.0 * (d[..., k - 1:k] - offsets) ** 2)
    return levels


@dataclass(frozen=True, eq=False)
class MuTable:
    """Signed L-value mean scales per (bit level, point) and the positive mixture components."""
    mu: np.ndarray
    positive_mu: List[np.ndarray]
    xi: np.ndarray

    def components(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """(mu values, weights) of the mixture at bit level k (1-based)."""
        values = self.positive_mu[k - 1]
        return values, np.full(values.shape, self.xi[k - 1])


def mu_table(c: Constellation) -> MuTable:
    """Compute mu_{k,j} by geometric search and cross-check it against the closed form."""
    mu = np.empty((c.q, c.M))
    for k in range(1, c.q + 1):
        for j in range(c.M):
            i = nearest_competitor(c, k, j)
            sign = 1.0 if c.labels[j, k - 1] == 0 else -1.0
            mu[k - 1, j] = sign * (c.points[i] - c.points[j]) ** 2

    positive = closed_form_mu(c.d)
    for k in range(1, c.q + 1):
        geometric = np.sort(mu[k - 1][c.bit_mask(k, 0)])
        expected = np.sort(np.tile(positive[k - 1], 2 ** (k - 1)))
        if not np.allclose(geometric, expected, rtol=0.0, atol=Config.MU_TOLERANCE):
            raise HqamBicmError(f"closed-form and geometric mu disagree at bit level {k}")

    xi = np.array([2.0 ** k / c.M for k in range(1, c.q + 1)])
    mu.setflags(write=False)
    return MuTable(mu=mu, positive_mu=positive, xi=xi)


def to_json(c: Constellation, with_mu: bool = True) -> Dict:
    """JSON-ready description of the constellation; the mu table is empty when with_mu is False."""
    mu = mu_table(c).mu.ravel().tolist() if with_mu else []
    report = validate_region(c.alphas)
    return {
        "M": c.M,
        "alphas": list(c.alphas),
        "d": c.d.tolist(),
        "points": c.points.tolist(),
        "labels": c.label_strings,
        "mu": mu,
        "region": {"valid": report.valid, "violations": report.violations},
    }
