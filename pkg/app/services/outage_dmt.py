"""Outage probability, outage rate, finite-SNR DMT and IRS sizing"""
from typing import Optional
import logging

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from app.config import settings
from app.exceptions import ConfigError
from app.schemas.outage import DmtPoint, OutageResult, SizingAnswer
from app.schemas.rmt import GaussianMi
from app.schemas.scenario import EffectiveSpectra
from app.services.iid_closed_form import asymptotic_limit, iid_emi
from app.services.rmt_core import emi, solve_canonical, table_quantities, variance
from app.services.sensitivities import z_tangent

logger = logging.getLogger(__name__)

LOG_SQRT_2PI = 0.5 * np.log(2.0 * np.pi)


def _check_variance(var_nats2: float) -> None:
    if not var_nats2 > 0:
        raise ConfigError(f"MI variance must be positive, got {var_nats2}")


def outage_probability(mean_nats: float, var_nats2: float, R_nats: float) -> float:
    """P(I < R) ≈ Φ((R − Ī)/√V)"""
    _check_variance(var_nats2)
    return float(ndtr((R_nats - mean_nats) / np.sqrt(var_nats2)))


def log_outage_probability(mean_nats: float, var_nats2: float, R_nats: float) -> float:
    """log Φ((R − Ī)/√V), finite far below the double-precision underflow of Φ"""
    _check_variance(var_nats2)
    return float(log_ndtr((R_nats - mean_nats) / np.sqrt(var_nats2)))


def outage(mi: GaussianMi, R_nats: float) -> OutageResult:
    return OutageResult(
        p_out=outage_probability(mi.mean_nats, mi.var_nats2, R_nats),
        log_p_out=log_outage_probability(mi.mean_nats, mi.var_nats2, R_nats),
        rate_threshold_nats=R_nats,
        mean_nats=mi.mean_nats,
        var_nats2=mi.var_nats2,
    )


def outage_rate(mean_nats: float, var_nats2: float, p_out: float) -> float:
    """ε-outage rate R = Ī + √V Φ⁻¹(p_out)"""
    _check_variance(var_nats2)
    if not 0.0 < p_out < 1.0:
        raise ConfigError(f"target outage probability must lie in (0, 1), got {p_out}")
    return float(mean_nats + np.sqrt(var_nats2) * ndtri(p_out))


def _check_multiplexing(m: float, k: int) -> None:
    if not 0.0 <= m <= k:
        raise ConfigError(f"multiplexing gain must lie in [0, {k}], got {m}")


def _dmt_ingredients(spectra: EffectiveSpectra, rho: float, use_small_L: bool):
    """(H, H′) at z = 1/ρ with H = Ī/√V"""
    if not rho > 0:
        raise ConfigError(f"rho must be positive, got {rho}")
    fp = solve_canonical(spectra, rho)
    tq = table_quantities(spectra, fp, rho)
    mean = emi(spectra, fp, rho)
    var = variance(tq, use_small_L)
    tangent = z_tangent(spectra, fp, tq, rho)
    d_mean = float(tangent.dI[0])
    d_var = float((tangent.dV_small_L if use_small_L else tangent.dV)[0])
    H = mean / np.sqrt(var)
    H_prime = (d_mean * var - 0.5 * mean * d_var) / var**1.5
    return float(H), float(H_prime)


def finite_snr_dmt(m: float, rho: float, spectra: EffectiveSpectra, use_small_L: bool = False) -> DmtPoint:
    """Finite-SNR diversity d(m, ρ) = −∂ log P_out/∂ log ρ at rate R = mĪ/k.

    The Mills-type ratio φ(x)/Φ(x) is evaluated in the log domain, so d stays
    finite when P_out underflows.
    """
    k = min(spectra.L, spectra.M, spectra.N)
    _check_multiplexing(m, k)
    z = 1.0 / rho
    H, H_prime = _dmt_ingredients(spectra, rho, use_small_L)

    x = (m - k) * H / k
    ratio = np.exp(-0.5 * x * x - LOG_SQRT_2PI - log_ndtr(x))
    d = z * (m - k) / k * H_prime * ratio
    d_quick = -z * (m - k) ** 2 * H * H_prime / k**2
    # m = k gives −0.0 otherwise
    return DmtPoint(m=m, d=float(d) + 0.0, d_quick=float(d_quick) + 0.0, k=k, z=z, H=H, H_prime=H_prime)


def dmt_quick_approx(m: float, rho: float, spectra: EffectiveSpectra, use_small_L: bool = False) -> float:
    """Large-deviation shortcut −z (m−k)² H H′ / k²"""
    k = min(spectra.L, spectra.M, spectra.N)
    _check_multiplexing(m, k)
    H, H_prime = _dmt_ingredients(spectra, rho, use_small_L)
    return float(-(m - k) ** 2 * H * H_prime / (rho * k**2)) + 0.0


def numeric_dmt_slope(
    m: float, rho: float, spectra: EffectiveSpectra, step_db: float = 0.1, use_small_L: bool = False
) -> float:
    """Central difference of −log P_out against log ρ, with R = mĪ(ρ)/k at each ρ"""
    k = min(spectra.L, spectra.M, spectra.N)
    _check_multiplexing(m, k)
    factor = 10.0 ** (step_db / 10.0)

    def log_p(rho_point: float) -> float:
        fp = solve_canonical(spectra, rho_point)
        mean = emi(spectra, fp, rho_point)
        var = variance(table_quantities(spectra, fp, rho_point), use_small_L)
        return log_outage_probability(mean, var, m * mean / k)

    rho_high, rho_low = rho * factor, rho / factor
    return float(-(log_p(rho_high) - log_p(rho_low)) / (np.log(rho_high) - np.log(rho_low)))


def irs_efficiency(mean_at_L: float, mean_inf: float) -> float:
    """η = Ī(ρ; L) / Ī∞(ρ)"""
    if not mean_inf > 0:
        raise ConfigError(f"infinite-IRS EMI must be positive, got {mean_inf}")
    return float(mean_at_L / mean_inf)


def min_irs_size(eta_target: float, N: int, rho: float, max_L: Optional[int] = None) -> SizingAnswer:
    """Smallest L with Ī(N, τ = N/L, ρ) ≥ η Ī∞ for i.i.d. channels with M = N.

    Ī grows with L, so the answer is found by bisection over integers in
    [1, max_L]; if even max_L falls short the answer is marked unreachable.
    """
    if not 0.0 < eta_target < 1.0:
        raise ConfigError(f"efficiency target must lie in (0, 1), got {eta_target}")
    if N < 1:
        raise ConfigError(f"N must be positive, got {N}")
    max_L = settings.SIZING_MAX_L if max_L is None else max_L
    _, mean_inf, _ = asymptotic_limit(N, rho)
    goal = eta_target * mean_inf

    def mean_at(L: int) -> float:
        return iid_emi(N, N / L, rho)

    if mean_at(1) >= goal:
        return SizingAnswer(eta_target=eta_target, L_min=1, mean_at_L=mean_at(1), mean_inf=mean_inf)
    if mean_at(max_L) < goal:
        logger.warning(f"eta={eta_target} not reachable with L <= {max_L} (N={N}, rho={rho:.3g})")
        return SizingAnswer(eta_target=eta_target, reachable=False, mean_inf=mean_inf)

    low, high = 1, max_L
    while high - low > 1:
        middle = (low + high) // 2
        if mean_at(middle) >= goal:
            high = middle
        else:
            low = middle
    return SizingAnswer(eta_target=eta_target, L_min=high, mean_at_L=mean_at(high), mean_inf=mean_inf)
