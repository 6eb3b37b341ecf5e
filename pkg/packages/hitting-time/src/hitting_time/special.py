"""Special functions for the emptying time of a critical M/M/1 queue.

Everything is evaluated in the log domain first and exponentiated last:
I_k(2*lam*u) overflows the double range long before the densities it feeds
become negligible.
"""

import logging
import math
from typing import Tuple

import numpy as np
from scipy import integrate
from scipy.special import erf, erfc, gammaln, ive, logsumexp, ndtri

logger = logging.getLogger(__name__)

SERIES_TERMS = 40
SERIES_MAX_TERMS = 20_000
# below this argument the power series is used instead of the scaled Bessel routine
SERIES_MAX_X = 1.0
# lam * u beyond which the two-term tail expansion closes the quadrature, per k**2
TAIL_CUT_PER_K2 = 1.0e4
QUAD_EPSABS = 1e-13
QUAD_EPSREL = 1e-12


def _as_float_arrays(*values) -> Tuple[np.ndarray, ...]:
    return tuple(np.asarray(v, dtype=float) for v in np.broadcast_arrays(*values))


def _log_series(k: np.ndarray, x: np.ndarray) -> np.ndarray:
    """log I_k(x) by log-domain summation of the power series (x > 0)."""
    # the largest term sits near j = x^2 / (4 (k + 1))
    peak = float(np.max(x * x / (4.0 * (k + 1.0)))) if x.size else 0.0
    n_terms = int(min(SERIES_TERMS + 3.0 * peak, SERIES_MAX_TERMS))
    j = np.arange(n_terms, dtype=float).reshape(-1, *([1] * k.ndim))
    terms = (2 * j + k) * np.log(x / 2) - gammaln(j + 1) - gammaln(j + k + 1)
    return logsumexp(terms, axis=0)


def log_ive(k, x):
    """log(I_k(x) * exp(-x)), the exponentially scaled modified Bessel function."""
    k_arr, x_arr = _as_float_arrays(k, x)
    if np.any(x_arr < 0) or np.any(k_arr < 0):
        raise ValueError("log_ive requires k >= 0 and x >= 0")

    out = np.empty_like(x_arr)
    with np.errstate(divide="ignore"):
        scaled = ive(k_arr, x_arr)
        out[...] = np.log(scaled)

    use_series = (x_arr > 0) & ((x_arr <= SERIES_MAX_X) | (scaled <= 0))
    if np.any(use_series):
        out[use_series] = (
            _log_series(k_arr[use_series], x_arr[use_series]) - x_arr[use_series]
        )

    at_zero = x_arr == 0
    out[at_zero] = np.where(k_arr[at_zero] == 0, 0.0, -np.inf)
    return out if out.ndim else float(out)


def bessel_i_log(k, x):
    """log I_k(x) for integer k >= 0 and real x >= 0.

    Returns -inf for I_k(0) with k >= 1. No overflow occurs for any finite x.
    """
    k_arr, x_arr = _as_float_arrays(k, x)
    out = np.asarray(log_ive(k_arr, x_arr)) + x_arr
    return out if out.ndim else float(out)


def zeta_density(k, lam: float, u):
    """Density f_k(u) = (k/u) I_k(2 lam u) exp(-2 lam u) of the emptying time zeta(k)."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    k_arr, u_arr = _as_float_arrays(k, u)
    out = np.zeros_like(u_arr)
    positive = u_arr > 0
    if np.any(positive):
        kp, up = k_arr[positive], u_arr[positive]
        with np.errstate(divide="ignore", under="ignore"):
            log_f = np.log(kp) - np.log(up) + log_ive(kp, 2 * lam * up)
            out[positive] = np.exp(log_f)
    return out if out.ndim else float(out)


def zeta_tail(k: int, lam: float, u: float) -> float:
    """Two-term asymptotic expansion of Pr(zeta(k) > u) for large u.

    Pr(zeta(k) > u) is the probability that the rate-2*lam walk started at 0
    sits in {-(k-1), ..., k} at time u; expanding each exp(-x) I_j(x) to second
    order gives (2 pi x)^(-1/2) * (2k - (4 sum j^2 - 2k) / (8x)) with x = 2 lam u.
    """
    x = 2.0 * lam * u
    sum_j2 = (k - 1) * k * (2 * k - 1) / 3.0 + k * k
    return (2.0 * k - (4.0 * sum_j2 - 2.0 * k) / (8.0 * x)) / math.sqrt(2.0 * math.pi * x)


def tail_cut(k: int, lam: float) -> float:
    """Point beyond which zeta_tail is accurate to well below 1e-9."""
    return TAIL_CUT_PER_K2 * k * k / lam


def _integrate_density(k: int, lam: float, lower: float, upper: float) -> float:
    if upper <= lower:
        return 0.0
    # geometric segments keep the u^(-3/2) decay well resolved by each quad call
    start = max(lower, 1.0 / lam) if lower > 0 else 1.0 / lam
    edges = [lower]
    if start > lower:
        edges.append(min(start, upper))
    while edges[-1] < upper:
        edges.append(min(edges[-1] * 4.0, upper))

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        value, _ = integrate.quad(
            lambda v: zeta_density(k, lam, v),
            a,
            b,
            epsabs=QUAD_EPSABS,
            epsrel=QUAD_EPSREL,
            limit=200,
        )
        total += value
    return total


def zeta_survival(lam: float, u: float, k: int = 1) -> float:
    """Pr(zeta(k) > u) by quadrature of zeta_density with an analytic tail closure."""
    if lam <= 0:
        raise ValueError(f"lam must be positive, got {lam}")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    if u <= 0:
        return 1.0
    cut = tail_cut(k, lam)
    if u >= cut:
        return min(1.0, zeta_tail(k, lam, u))
    survival = _integrate_density(k, lam, u, cut) + zeta_tail(k, lam, cut)
    return min(1.0, max(0.0, survival))


def zeta_total_mass(k: int, lam: float) -> float:
    """Integral of f_k over (0, inf); equals 1 up to quadrature error."""
    cut = tail_cut(k, lam)
    return _integrate_density(k, lam, 0.0, cut) + zeta_tail(k, lam, cut)


def levy_cdf(u):
    """Standard Levy distribution function 2 * Phibar(u^(-1/2)) = erfc((2u)^(-1/2))."""
    u_arr = np.asarray(u, dtype=float)
    out = np.zeros_like(u_arr)
    positive = u_arr > 0
    out[positive] = erfc(1.0 / np.sqrt(2.0 * u_arr[positive]))
    return out if out.ndim else float(out)


def levy_sf(u):
    """Complementary Levy distribution function, computed without cancellation."""
    u_arr = np.asarray(u, dtype=float)
    out = np.ones_like(u_arr)
    positive = u_arr > 0
    out[positive] = erf(1.0 / np.sqrt(2.0 * u_arr[positive]))
    return out if out.ndim else float(out)


def levy_pdf(u):
    """Standard Levy density (2 pi)^(-1/2) u^(-3/2) exp(-1/(2u))."""
    u_arr = np.asarray(u, dtype=float)
    out = np.zeros_like(u_arr)
    positive = u_arr > 0
    up = u_arr[positive]
    out[positive] = np.exp(-0.5 / up) / (math.sqrt(2.0 * math.pi) * up**1.5)
    return out if out.ndim else float(out)


def levy_median() -> float:
    """Median of the standard Levy law, (Phi^{-1}(3/4))^(-2)."""
    return float(ndtri(0.75)) ** -2


def quarter_integrand(u: float) -> float:
    """Fbar_S((Phibar^{-1}(u))^(-2)), built from the implemented Levy and normal functions."""
    if u <= 0:
        return 1.0
    if u >= 0.5:
        return 0.0
    z = -float(ndtri(u))
    return float(levy_sf(1.0 / (z * z)))


def quarter_quadrature() -> float:
    """Pr(Z sqrt(S) > 1) as the integral of quarter_integrand over (0, 1/2); equals 1/4."""
    value, abserr = integrate.quad(
        quarter_integrand, 0.0, 0.5, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, limit=200
    )
    logger.debug(f"quarter quadrature: value={value!r} abserr={abserr:.2e}")
    return value
