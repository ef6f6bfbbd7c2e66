# hqam_bicm/core/bounds.py
"""
Saddlepoint pairwise error probabilities and truncated union bounds.

For a weight vector w the decision variable is D = -(sum of w_k L-values of
every level k). With Phi_k the Laplace transform of level k, the saddlepoint
sits at s = 1/2 and

    PEP(w) ~ 1 / (s sqrt(2 pi)) * [sum_k w_k Phi_k''/Phi_k]^(-1/2) * prod_k Phi_k^(w_k).

Everything is evaluated in the log domain.
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError, NumericalValidityWarning, TargetUnreachableError
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import Constellation, closed_form_mu, mu_table
from hqam_bicm.core.spectrum import WeightSpectrum

LOGGER = logging.getLogger(__name__)

SADDLEPOINT = 0.5
LOG_PREFACTOR = -math.log(SADDLEPOINT * math.sqrt(2.0 * math.pi))
LOG_HALF = math.log(0.5)


def level_weights(q: int, M: int) -> np.ndarray:
    """xi_k = 1/M_k = 2^k / M."""
    return np.array([2.0 ** k / M for k in range(1, q + 1)])


def phi_terms(levels: Sequence[np.ndarray], channel: Channel) -> Tuple[np.ndarray, np.ndarray]:
    """
    log Phi_k(1/2) and Phi_k''(1/2) / Phi_k(1/2) for stacked constellations.

    Args:
        levels: Positive mu values per level, each shaped (G, M_k).
        channel: AWGN or Nakagami-m channel.

    Returns:
        Two (G, q) arrays.
    """
    q = len(levels)
    M = levels[-1].shape[-1] * 2 ** q
    xi = level_weights(q, M)
    log_phi, ratio = [], []
    for k, mu in enumerate(levels):
        a = channel.gamma_bar * np.atleast_2d(mu)
        if channel.is_fading:
            m = channel.m
            log_t = np.log(4.0 * m) - np.log(4.0 * m + a)
            log_terms = m * log_t
            second = 2.0 * a * np.exp(log_t)
        else:
            log_terms = -a / 4.0
            second = 2.0 * a
        lp = logsumexp(log_terms, b=xi[k], axis=-1)
        share = np.exp(log_terms + math.log(xi[k]) - lp[..., None])
        log_phi.append(lp)
        ratio.append(np.sum(share * second, axis=-1))
    return np.stack(log_phi, axis=-1), np.stack(ratio, axis=-1)


def log_pep(weights: np.ndarray, log_phi: np.ndarray, ratio: np.ndarray) -> np.ndarray:
    """
    Log SPA PEP for weight vectors (E, q) against constellations (G, q); returns (E, G).

    A zero curvature sum means the decision is a coin flip, reported as 1/2.
    """
    weights = np.atleast_2d(weights)
    curvature = weights @ np.atleast_2d(ratio).T
    exponent = weights @ np.atleast_2d(log_phi).T
    with np.errstate(divide="ignore"):
        out = LOG_PREFACTOR - 0.5 * np.log(curvature) + exponent
    return np.where(curvature > 0, out, LOG_HALF)


def _check_weight(w: Sequence[int], q: int) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (q,):
        raise ConfigError(f"weight vector needs {q} entries, got {w.shape}")
    if np.any(w < 0) or not np.any(w > 0):
        raise ConfigError("weight vector must be nonnegative with at least one positive entry")
    return w


def pep(w: Sequence[int], channel: Channel, c: Constellation) -> float:
    """SPA pairwise error probability, clipped to [0, 1]."""
    w = _check_weight(w, c.q)
    levels = [mu[None, :] for mu in mu_table(c).positive_mu]
    log_phi, ratio = phi_terms(levels, channel)
    return float(min(1.0, np.exp(log_pep(w[None, :], log_phi, ratio))[0, 0]))


def pep_awgn(w: Sequence[int], gamma: float, c: Constellation) -> float:
    return pep(w, Channel("awgn", gamma), c)


def pep_fading(w: Sequence[int], gamma_bar: float, m: float, c: Constellation) -> float:
    return pep(w, Channel("nakagami", gamma_bar, m), c)


@dataclass(frozen=True)
class BoundQuery:
    spectrum: WeightSpectrum
    constellation: Constellation
    channel: Channel
    k_c: int = 1


@dataclass(frozen=True)
class BoundResult:
    """Union bound with the contribution of its largest-weight shell."""
    ub: float
    last_shell: float
    valid: bool


def _ub_from_levels(spectrum: WeightSpectrum, levels: Sequence[np.ndarray], channel: Channel,
                    k_c: int, chunk: int = Config.ALPHA_CHUNK) -> Tuple[np.ndarray, np.ndarray]:
    """(ub, last_shell) for a stack of constellations given by their mu levels."""
    G = np.atleast_2d(levels[0]).shape[0]
    if spectrum.empty:
        return np.zeros(G), np.zeros(G)
    weights, log_beta = spectrum.arrays()
    shell = weights.sum(axis=1) == spectrum.last_shell
    ub = np.empty(G)
    tail = np.empty(G)
    for lo in range(0, G, chunk):
        part = [np.atleast_2d(mu)[lo:lo + chunk] for mu in levels]
        log_phi, ratio = phi_terms(part, channel)
        terms = log_beta[:, None] + log_pep(weights, log_phi, ratio)
        ub[lo:lo + chunk] = np.exp(logsumexp(terms, axis=0)) / k_c
        tail[lo:lo + chunk] = np.exp(logsumexp(terms[shell], axis=0)) / k_c
    return ub, tail


def union_bound_grid(spectrum: WeightSpectrum, d_grid: np.ndarray, channel: Channel, k_c: int = 1) -> np.ndarray:
    """Union bound for every amplitude vector in a (G, q) grid."""
    ub, _ = _ub_from_levels(spectrum, closed_form_mu(np.atleast_2d(d_grid)), channel, k_c)
    return ub


def union_bound(query: BoundQuery) -> BoundResult:
    """
    Truncated union bound (1/k_c) sum_w beta(w) PEP(w).

    Individual PEPs are not clipped. Values above the validity limit raise a
    NumericalValidityWarning.
    """
    c = query.constellation
    if query.spectrum.q != c.q:
        raise ConfigError(f"spectrum has {query.spectrum.q} streams, constellation has {c.q} bit levels")
    levels = [mu[None, :] for mu in mu_table(c).positive_mu]
    ub, tail = _ub_from_levels(query.spectrum, levels, query.channel, query.k_c)
    result = BoundResult(ub=float(ub[0]), last_shell=float(tail[0]),
                         valid=bool(ub[0] <= Config.BOUND_VALIDITY_LIMIT))
    if not result.valid:
        message = f"union bound {result.ub:.3g} at {query.channel.gamma_db:.2f} dB exceeds {Config.BOUND_VALIDITY_LIMIT:g}"
        LOGGER.warning(message)
        warnings.warn(message, NumericalValidityWarning, stacklevel=2)
    return result


def ub_curve(spectrum: WeightSpectrum, c: Constellation, channel: Channel,
             snr_db: Sequence[float], k_c: int = 1) -> List[BoundResult]:
    """Union bound over an SNR grid, without validity warnings."""
    levels = [mu[None, :] for mu in mu_table(c).positive_mu]
    out = []
    for g in snr_db:
        ub, tail = _ub_from_levels(spectrum, levels, channel.at_db(g), k_c)
        out.append(BoundResult(float(ub[0]), float(tail[0]), bool(ub[0] <= Config.BOUND_VALIDITY_LIMIT)))
    return out


@dataclass(frozen=True)
class OracleEstimate:
    """Monte Carlo PEP with a 95% normal-approximation interval."""
    pep: float
    ci_low: float
    ci_high: float
    samples: int


def pep_oracle(w: Sequence[int], channel: Channel, c: Constellation, samples: int,
               rng: Optional[np.random.Generator] = None, chunk: int = 1 << 18) -> OracleEstimate:
    """
    Estimate Pr{D > 0} + Pr{D = 0}/2 by drawing model L-values; under fading
    every L-value gets its own SNR.
    """
    if samples < 10 ** 6:
        raise ConfigError("the PEP oracle needs at least 10^6 samples")
    w = _check_weight(w, c.q).astype(int)
    rng = rng if rng is not None else np.random.default_rng()
    table = mu_table(c)
    hits = 0.0
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        total = np.zeros(size)
        for k in range(1, c.q + 1):
            if w[k - 1] == 0:
                continue
            mu, xi = table.components(k)
            shape = (size, w[k - 1])
            pick = rng.choice(mu.size, size=shape, p=xi / xi.sum())
            gamma = channel.sample_snr(rng, size=shape)
            mean = gamma * mu[pick]
            total += np.sum(mean + np.sqrt(2.0 * mean) * rng.standard_normal(shape), axis=1)
        hits += np.count_nonzero(total < 0) + 0.5 * np.count_nonzero(total == 0)
        done += size
    p = hits / samples
    half = 1.96 * math.sqrt(max(p * (1 - p), 0.0) / samples)
    return OracleEstimate(p, max(0.0, p - half), min(1.0, p + half), samples)


def snr_for_bound(evaluate: Callable[[float], float], target: float,
                  bracket: Tuple[float, float] = Config.SNR_BRACKET_DB,
                  tol: float = Config.SNR_TOLERANCE_DB) -> float:
    """
    SNR in dB at which a decreasing error curve crosses `target`.

    Raises:
        TargetUnreachableError: When the target is not bracketed.
    """
    lo, hi = bracket

    def excess(g: float) -> float:
        return math.log(max(evaluate(g), 1e-300)) - math.log(target)

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo < 0 or f_hi > 0:
        raise TargetUnreachableError(f"target {target:g} is not reached between {lo} dB and {hi} dB")
    return float(optimize.brentq(excess, lo, hi, xtol=tol))


def snr_gap(reference: Callable[[float], float], other: Callable[[float], float], target: float,
            bracket: Tuple[float, float] = Config.SNR_BRACKET_DB) -> float:
    """Horizontal distance in dB (other minus reference) at the target error rate."""
    return snr_for_bound(other, target, bracket) - snr_for_bound(reference, target, bracket)
