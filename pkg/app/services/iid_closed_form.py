"""Closed forms for independent (identity-correlation) channels.

Covers the cubic for g, the EMI and variance of the i.i.d. IRS channel, the
infinite-IRS (single-hop Rayleigh) limit and the high-SNR expansions used for
IRS sizing.
"""
from typing import Optional, Tuple
import logging

import numpy as np
from scipy.optimize import bisect

from app.config import settings
from app.exceptions import ConfigError

logger = logging.getLogger(__name__)

CARDANO_REL_TOL = 1e-10


def _check_rho(rho: float) -> None:
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")


def _check_tau(tau: float) -> None:
    if not tau >= 0:
        raise ConfigError(f"tau = M/L must be non-negative, got {tau}")


def _cubic_coefficients(tau: float, rho: float) -> Tuple[float, float, float, float]:
    # g³ + 2g² + (1 + ρτ − ρ)g − ρ
    return 1.0, 2.0, 1.0 + rho * tau - rho, -rho


def cubic_residual(g: float, tau: float, rho: float) -> float:
    """Relative defect of the cubic at g, written as g(1+g)² − ρ(1 + (1−τ)g)"""
    value = g * (1.0 + g) ** 2 - rho * (1.0 + (1.0 - tau) * g)
    scale = g * (1.0 + g) ** 2 + rho * (1.0 + abs(1.0 - tau) * g)
    return abs(value) / scale


def _admissible(g: float, tau: float) -> bool:
    return g > 0 and 1.0 + (1.0 - tau) * g > 0


def _newton_polish(g: float, tau: float, rho: float, steps: int = 3) -> float:
    _, b, c, d = _cubic_coefficients(tau, rho)
    for _ in range(steps):
        value = ((g + b) * g + c) * g + d
        slope = (3.0 * g + 2.0 * b) * g + c
        if slope == 0:
            break
        step = value / slope
        if not np.isfinite(step):
            break
        g -= step
    return g


def cardano_roots(tau: float, rho: float) -> np.ndarray:
    """Three complex roots of the cubic from Cardano's formula"""
    _, b, c, d = _cubic_coefficients(tau, rho)
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    root = np.sqrt(complex(q * q / 4.0 + p**3 / 27.0))
    # Take the larger-magnitude branch so C is not lost to cancellation
    candidates = (-q / 2.0 + root, -q / 2.0 - root)
    radicand = max(candidates, key=abs)
    if abs(radicand) == 0:
        return np.full(3, -b / 3.0, dtype=np.complex128)
    C = radicand ** (1.0 / 3.0)
    omega = np.exp(2j * np.pi / 3.0)
    branches = C * omega ** np.arange(3)
    return branches - p / (3.0 * branches) - b / 3.0


def iid_g_bisection(tau: float, rho: float, xtol: float = 1e-15) -> float:
    """Positive root of the cubic by bracketing bisection"""
    _check_tau(tau)
    _check_rho(rho)

    def f(g: float) -> float:
        return g * (1.0 + g) ** 2 - rho * (1.0 + (1.0 - tau) * g)

    # f(0) = −ρ < 0; one sign change so the positive root is unique
    high = 1.0
    while f(high) <= 0:
        high *= 2.0
    return float(bisect(f, 0.0, high, xtol=xtol * max(1.0, high), rtol=4 * np.finfo(float).eps, maxiter=400))


def iid_g(tau: float, rho: float) -> float:
    """g for i.i.d. channels: positive root of g³ + 2g² + (1 + ρτ − ρ)g − ρ = 0.

    At τ = 0 the cubic factors as (g + 1)(g² + g − ρ) and the positive root is
    the single-hop value g∞.
    """
    _check_tau(tau)
    _check_rho(rho)

    roots = cardano_roots(tau, rho)
    real_parts = roots.real[np.abs(roots.imag) <= 1e-7 * np.maximum(1.0, np.abs(roots))]
    candidates = [_newton_polish(float(g), tau, rho) for g in real_parts]
    candidates = [g for g in candidates if _admissible(g, tau) and cubic_residual(g, tau, rho) < CARDANO_REL_TOL]
    if candidates:
        return max(candidates)

    logger.debug(f"Cardano root selection failed for tau={tau}, rho={rho}; using bisection")
    return iid_g_bisection(tau, rho)


def iid_emi(N: int, tau: float, rho: float, g: Optional[float] = None) -> float:
    """Ī = 2N log(1+g) + (N/τ) log(1 + τρ/(1+g)²) − 2Ng/(1+g) in nats"""
    if N < 1:
        raise ConfigError(f"N must be positive, got {N}")
    g = iid_g(tau, rho) if g is None else g
    x = rho / (1.0 + g) ** 2
    middle = N * x if tau == 0 else N / tau * np.log1p(tau * x)
    return float(2.0 * N * np.log1p(g) + middle - 2.0 * N * g / (1.0 + g))


def iid_variance(rho: float, g: float) -> float:
    """V = log[ρ(1+g)²] − log(ρ + 2g³ + 2g²)"""
    _check_rho(rho)
    return float(np.log(rho) + 2.0 * np.log1p(g) - np.log(rho + 2.0 * g * g * (g + 1.0)))


def asymptotic_limit(N: int, rho: float) -> Tuple[float, float, float]:
    """(g∞, Ī∞, V∞) of the infinite IRS, i.e. the single-hop Rayleigh channel"""
    _check_rho(rho)
    # Positive root of δ² + δ − ρ = 0 without cancellation
    delta = 2.0 * rho / (1.0 + np.sqrt(1.0 + 4.0 * rho))
    mean_inf = N * np.log(delta + 1.0 + rho) - N * delta / (1.0 + delta)
    var_inf = 2.0 * np.log1p(delta) - np.log1p(2.0 * delta)
    return float(delta), float(mean_inf), float(var_inf)


def _warn_regime(rho: float) -> None:
    if rho < settings.HIGH_SNR_WARN_RHO:
        logger.warning(
            f"High-SNR approximation evaluated at rho={rho:.3g} < {settings.HIGH_SNR_WARN_RHO:g}; "
            f"results are outside the approximation regime"
        )


def single_hop_high_snr(N: int, rho: float) -> Tuple[float, float]:
    """High-SNR mean and variance of the single-hop i.i.d. Rayleigh link"""
    _check_rho(rho)
    _warn_regime(rho)
    inv_sqrt = rho**-0.5
    mean = N * (np.log(rho) - 1.0 + 2.0 * inv_sqrt)
    var = 0.5 * np.log(rho / 4.0) + inv_sqrt
    return float(mean), float(var)


def high_snr_approx(N: int, L: int, rho: float, regime: str = "large_L") -> Tuple[float, float]:
    """High-SNR mean and variance for M = N, τ = N/L < 1.

    ``small_L`` is meant for L much smaller than √ρ, ``large_L`` for L
    comparable to or larger than √ρ. The caller picks the regime.
    """
    if N < 1 or L < 1:
        raise ConfigError(f"N and L must be positive, got N={N}, L={L}")
    _check_rho(rho)
    tau = N / L
    if tau >= 1:
        raise ConfigError(f"high-SNR expansion needs tau = N/L < 1, got {tau:.3g}")
    _warn_regime(rho)
    inv_sqrt = rho**-0.5

    if regime == "small_L":
        a = np.sqrt(1.0 - tau)
        b = 1.0 / (2.0 * (1.0 - tau)) - 1.0
        mean = N * (np.log(rho) - 2.0 - (1.0 / tau - 1.0) * np.log1p(-tau) + 2.0 / a * inv_sqrt)
        var = 0.5 * np.log(rho / (4.0 * a * a)) + (2.0 * a * a * (1.0 - b) - 1.0) / (2.0 * a**3) * inv_sqrt
    elif regime == "large_L":
        mean = N * (np.log(rho) - 1.0 - 2.0 * N / L + 2.0 * inv_sqrt)
        var = 0.5 * np.log(rho / 4.0) + N / (2.0 * L) + inv_sqrt
    else:
        raise ConfigError(f"unknown high-SNR regime {regime!r}; use 'small_L' or 'large_L'")
    return float(mean), float(var)
