# hqam_bicm/core/lvalues.py
"""
Max-log L-values for simulation and the Gaussian-mixture L-value model used by
the bounds.

Under all-zero transmission the model L-value of bit level k is a mixture of
N(gamma mu, 2 gamma mu) components over the positive mu values of that level,
each with weight xi = 1/M_k. Zero mu components are point masses at 0.
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from hqam_bicm.app.error_handler import ConfigError
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import Constellation, MuTable, mu_table

LOGGER = logging.getLogger(__name__)


def maxlog_llr(y, gamma, c: Constellation) -> np.ndarray:
    """
    Max-log L-values of every bit level.

    Args:
        y: Received samples, any shape.
        gamma: SNR, scalar or broadcastable to y.
        c: Constellation.

    Returns:
        Array of shape y.shape + (q,).
    """
    y = np.asarray(y, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    if np.any(gamma <= 0):
        raise ConfigError("SNR must be positive")
    dist = (y[..., None] - c.points) ** 2
    out = np.empty(y.shape + (c.q,))
    for k in range(1, c.q + 1):
        ones = c.bit_mask(k, 1)
        out[..., k - 1] = dist[..., ones].min(axis=-1) - dist[..., ~ones].min(axis=-1)
    return out * gamma[..., None]


class LValueModel:
    """Gaussian-mixture model of the L-values of one constellation at one SNR."""

    def __init__(self, c: Constellation, gamma: float, table: Optional[MuTable] = None):
        if gamma <= 0:
            raise ConfigError("SNR must be positive")
        self.constellation = c
        self.gamma = float(gamma)
        self.table = table if table is not None else mu_table(c)

    def components(self, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """(means, weights) of level k; variances are twice the means."""
        mu, xi = self.table.components(k)
        return self.gamma * mu, xi

    def pdf(self, k: int, lam) -> np.ndarray:
        """Density of the continuous part."""
        means, weights = self.components(k)
        lam = np.asarray(lam, dtype=float)[..., None]
        live = means > 0
        if not np.any(live):
            return np.zeros(lam.shape[:-1])
        dens = stats.norm.pdf(lam, loc=means[live], scale=np.sqrt(2.0 * means[live]))
        return dens @ weights[live]

    def cdf(self, k: int, lam, left: bool = False) -> np.ndarray:
        """P(L <= lam), or P(L < lam) with `left`; they differ only at the point mass."""
        means, weights = self.components(k)
        lam = np.asarray(lam, dtype=float)[..., None]
        live = means > 0
        cont = stats.norm.cdf(lam, loc=means[live], scale=np.sqrt(2.0 * means[live])) @ weights[live] \
            if np.any(live) else np.zeros(lam.shape[:-1])
        at_zero = lam[..., 0] > 0 if left else lam[..., 0] >= 0
        return cont + at_zero * weights[~live].sum()

    def sample(self, k: int, size, rng: np.random.Generator, gammas: Optional[np.ndarray] = None) -> np.ndarray:
        """Draw model L-values; `gammas` overrides the SNR per draw (fading)."""
        mu, xi = self.table.components(k)
        pick = rng.choice(mu.size, size=size, p=xi / xi.sum())
        scale = self.gamma if gammas is None else np.asarray(gammas, dtype=float)
        mean = scale * mu[pick]
        return mean + np.sqrt(2.0 * mean) * rng.standard_normal(size)


def mixture_pdf(k: int, lam, gamma: float, c: Constellation) -> np.ndarray:
    return LValueModel(c, gamma).pdf(k, lam)


def _awgn_terms(k: int, s, gamma: float, c: Constellation):
    mu, xi = mu_table(c).components(k)
    s = np.asarray(s, dtype=float)[..., None]
    a = gamma * mu
    return a, xi, s, np.exp(a * (s ** 2 - s))


def laplace_awgn(k: int, s, gamma: float, c: Constellation) -> np.ndarray:
    """Phi(s) = E[exp(-s L)] = sum xi exp(mu gamma (s^2 - s))."""
    _, xi, _, e = _awgn_terms(k, s, gamma, c)
    return e @ xi


def laplace_awgn_d1(k: int, s, gamma: float, c: Constellation) -> np.ndarray:
    a, xi, s, e = _awgn_terms(k, s, gamma, c)
    return (a * (2 * s - 1) * e) @ xi


def laplace_awgn_d2(k: int, s, gamma: float, c: Constellation) -> np.ndarray:
    a, xi, s, e = _awgn_terms(k, s, gamma, c)
    return ((2 * a + (a * (2 * s - 1)) ** 2) * e) @ xi


def _fading_terms(k: int, s, gamma_bar: float, m: float, c: Constellation):
    if m <= 0:
        raise ConfigError("m must be positive")
    mu, xi = mu_table(c).components(k)
    s = np.asarray(s, dtype=float)[..., None]
    a = gamma_bar * mu
    g = 1.0 - a * (s ** 2 - s) / m
    if np.any(g <= 0):
        raise ConfigError(f"s lies in the pole region of the Nakagami-{m:g} transform")
    return a, xi, s, g


def laplace_fading(k: int, s, gamma_bar: float, m: float, c: Constellation) -> np.ndarray:
    """Phi(s) = sum xi (m / (m - gamma_bar mu (s^2 - s)))^m."""
    _, xi, _, g = _fading_terms(k, s, gamma_bar, m, c)
    return g ** (-m) @ xi


def laplace_fading_d1(k: int, s, gamma_bar: float, m: float, c: Constellation) -> np.ndarray:
    a, xi, s, g = _fading_terms(k, s, gamma_bar, m, c)
    return (a * (2 * s - 1) * g ** (-m - 1)) @ xi


def laplace_fading_d2(k: int, s, gamma_bar: float, m: float, c: Constellation) -> np.ndarray:
    """Second derivative; equals sum 2 xi gamma_bar mu (4m / (4m + gamma_bar mu))^(m+1) at s = 1/2."""
    a, xi, s, g = _fading_terms(k, s, gamma_bar, m, c)
    return (2 * a * g ** (-m - 1) + a ** 2 * (2 * s - 1) ** 2 * (m + 1) / m * g ** (-m - 2)) @ xi


def empirical_lvalues(k: int, channel: Channel, c: Constellation, n: int, rng: np.random.Generator) -> np.ndarray:
    """
    Sign-corrected max-log L-values of level k for random symbols.

    Multiplying by (-1)^bit maps every sample to the all-zero convention of the model.
    """
    j = rng.integers(0, c.M, size=n)
    gamma = channel.sample_snr(rng, size=n)
    y = c.points[j] + rng.standard_normal(n) / np.sqrt(2.0 * gamma)
    llr = maxlog_llr(y, gamma, c)[:, k - 1]
    return llr * (1 - 2 * c.labels[j, k - 1])


def ks_distance(samples: np.ndarray, k: int, gamma: float, c: Constellation) -> float:
    """
    Kolmogorov-Smirnov distance between samples and the AWGN mixture model.

    The model has an atom at 0 when a mu is zero, so the statistic uses both
    one-sided limits of the model CDF instead of assuming continuity.
    """
    model = LValueModel(c, gamma)
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n == 0:
        raise ConfigError("ks_distance needs at least one sample")
    i = np.arange(1, n + 1)
    above = i / n - model.cdf(k, x)
    below = model.cdf(k, x, left=True) - (i - 1) / n
    return float(max(above.max(), below.max(), 0.0))
