"""Deterministic equivalents of the MI distribution for correlated IRS-aided MIMO.

The canonical system in (δ, g, ḡ) with z = 1/ρ

    δ = (1/L) Tr R Q_R,   Q_R = (z I + M g ḡ/(L δ) R)^-1
    g = (1/M) Tr S Q_S,   Q_S = (δ^-1 I + ḡ S)^-1
    ḡ = (1/M) Tr T Q_T,   Q_T = (I + g T)^-1

is evaluated on eigenvalues only, so every trace is a scalar sum. All
logarithms are natural.
"""
from dataclasses import dataclass
from typing import List, Optional, Tuple
import logging

import numpy as np
from scipy.optimize import brentq

from app.config import settings
from app.exceptions import NonConvergenceError, NumericalRegimeError
from app.schemas.rmt import FixedPoint, GaussianMi, TableOneQuantities
from app.schemas.scenario import EffectiveSpectra

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Resolvents:
    """Diagonal resolvents Q_R, Q_S, Q_T in the eigenbases of R, S, T"""
    q_R: np.ndarray
    q_S: np.ndarray
    q_T: np.ndarray


def _scaled(value: float) -> float:
    return max(1.0, abs(value))


def _g_of(delta: float, gbar: float, s: np.ndarray, M: int) -> float:
    # s/(1/δ + ḡ s) written to stay finite for large δ
    return float(np.sum(s * delta / (1.0 + delta * gbar * s)) / M)


def _gbar_of(g: float, t: np.ndarray, M: int) -> float:
    return float(np.sum(t / (1.0 + g * t)) / M)


def _delta_of(delta: float, g: float, gbar: float, r: np.ndarray, z: float, M: int, L: int) -> float:
    a = M * g * gbar / (L * delta)
    return float(np.sum(r / (z + a * r)) / L)


def canonical_defects(spectra: EffectiveSpectra, delta: float, g: float, gbar: float, rho: float) -> np.ndarray:
    """Scaled defects |lhs − rhs| / max(1, |lhs|) of the three canonical equations"""
    M, L = spectra.M, spectra.L
    z = 1.0 / rho
    return np.array([
        abs(delta - _delta_of(delta, g, gbar, spectra.r, z, M, L)) / _scaled(delta),
        abs(g - _g_of(delta, gbar, spectra.s, M)) / _scaled(g),
        abs(gbar - _gbar_of(g, spectra.t, M)) / _scaled(gbar),
    ])


def _solve_inner(
    delta: float, spectra: EffectiveSpectra, gbar0: float, eps: float, max_inner: int
) -> Tuple[float, float, int]:
    """Alternate g and ḡ at fixed δ; bracketing fallback on the ḡ map if the cap is hit"""
    s, t, M = spectra.s, spectra.t, spectra.M
    gbar = gbar0
    for iteration in range(1, max_inner + 1):
        g = _g_of(delta, gbar, s, M)
        gbar_next = _gbar_of(g, t, M)
        step = abs(gbar_next - gbar)
        gbar = gbar_next
        if step <= eps * _scaled(gbar):
            return _g_of(delta, gbar, s, M), gbar, iteration

    # ḡ ↦ f(ḡ) − ḡ is positive at 0 and non-positive at t_max
    def defect(x: float) -> float:
        return _gbar_of(_g_of(delta, x, s, M), t, M) - x

    t_max = float(t[0])
    gbar = brentq(defect, 0.0, t_max, xtol=eps * 1e-2 * _scaled(t_max), rtol=4 * np.finfo(float).eps)
    return _g_of(delta, gbar, s, M), gbar, max_inner


def _check_spectra(spectra: EffectiveSpectra, rho: float) -> None:
    if not rho > 0:
        raise NumericalRegimeError(f"canonical equations need rho > 0, got {rho}")
    for name in ("r", "s", "t"):
        if not np.sum(getattr(spectra, name)) > 0:
            raise NumericalRegimeError(f"spectrum {name} has zero trace; the canonical solution is degenerate")


def _iterate(
    spectra: EffectiveSpectra,
    rho: float,
    eps: float,
    max_outer: int,
    max_inner: int,
    delta0: float,
    gbar0: float,
) -> Tuple[float, float, float, int, int, List[float], bool]:
    """Nested fixed-point iteration; returns (δ, g, ḡ, outer, inner, trace, converged)"""
    r, M, L = spectra.r, spectra.M, spectra.L
    z = 1.0 / rho
    delta, gbar = delta0, gbar0
    trace = [delta]
    inner_total = 0
    for outer in range(1, max_outer + 1):
        g, gbar, n_inner = _solve_inner(delta, spectra, gbar, eps * 1e-2, max_inner)
        inner_total += n_inner
        delta_next = _delta_of(delta, g, gbar, r, z, M, L)
        if not delta_next > 0:
            raise NumericalRegimeError(f"non-positive δ iterate {delta_next:.3e}; check the spectra")
        trace.append(delta_next)
        step = abs(delta_next - delta)
        delta = delta_next
        if step <= eps * _scaled(delta):
            g, gbar, n_inner = _solve_inner(delta, spectra, gbar, eps * 1e-2, max_inner)
            inner_total += n_inner
            return delta, g, gbar, outer, inner_total, trace, True
    g, gbar, n_inner = _solve_inner(delta, spectra, gbar, eps * 1e-2, max_inner)
    return delta, g, gbar, max_outer, inner_total + n_inner, trace, False


def _bracketed(spectra: EffectiveSpectra, rho: float, eps: float, max_inner: int) -> Tuple[float, float, float]:
    """Root of the outer defect h(δ) − δ inside (0, δ_U]"""
    r, M, L, N = spectra.r, spectra.M, spectra.L, spectra.N
    z = 1.0 / rho
    delta_upper = N * float(r[0]) / (L * z)
    t_max = float(spectra.t[0])

    def defect(delta: float) -> float:
        g, gbar, _ = _solve_inner(delta, spectra, t_max, eps * 1e-2, max_inner)
        return _delta_of(delta, g, gbar, r, z, M, L) - delta

    delta_lower = float(np.sum(r)) / (L * (z + float(spectra.s[0]) * t_max * float(r[0])))
    low = 0.5 * delta_lower
    try:
        delta = brentq(defect, low, delta_upper, xtol=eps * 1e-2 * _scaled(delta_upper), rtol=4 * np.finfo(float).eps)
    except ValueError as e:
        f_low, f_high = defect(low), defect(delta_upper)
        raise NonConvergenceError(
            f"outer defect has no sign change on [{low:.3e}, {delta_upper:.3e}] "
            f"(defects {f_low:.3e}, {f_high:.3e})",
            residual=max(abs(f_low), abs(f_high)),
        ) from e
    g, gbar, _ = _solve_inner(delta, spectra, t_max, eps * 1e-2, max_inner)
    return delta, g, gbar


def solve_canonical(
    spectra: EffectiveSpectra,
    rho: Optional[float] = None,
    eps: Optional[float] = None,
    max_outer: Optional[int] = None,
    max_inner: Optional[int] = None,
    initial: Optional[FixedPoint] = None,
) -> FixedPoint:
    """ε-solution of the canonical system.

    The outer loop starts at the upper bound δ_U = N r_max/(L z) and decreases
    monotonically; the inner loop alternates g and ḡ from ḡ = t_max (warm
    started from the previous outer step). With ``initial`` the iteration is
    warm started from a previous solution and falls back to a cold start if it
    does not converge.
    """
    rho = spectra.rho_eff if rho is None else rho
    eps = settings.SOLVER_EPS if eps is None else eps
    max_outer = settings.SOLVER_MAX_OUTER if max_outer is None else max_outer
    max_inner = settings.SOLVER_MAX_INNER if max_inner is None else max_inner
    _check_spectra(spectra, rho)

    if initial is not None:
        delta, g, gbar, n_outer, n_inner, trace, converged = _iterate(
            spectra, rho, eps, max_outer, max_inner, initial.delta, initial.gbar
        )
        residual = float(np.max(canonical_defects(spectra, delta, g, gbar, rho)))
        if converged and residual <= eps and g > 0:
            return FixedPoint(
                delta=delta, g=g, gbar=gbar, residual=residual,
                iterations_outer=n_outer, iterations_inner=n_inner, delta_trace=tuple(trace),
            )
        logger.debug("Warm-started fixed point did not converge; restarting cold")

    z = 1.0 / rho
    delta_upper = spectra.N * float(spectra.r[0]) / (spectra.L * z)
    delta, g, gbar, n_outer, n_inner, trace, converged = _iterate(
        spectra, rho, eps, max_outer, max_inner, delta_upper, float(spectra.t[0])
    )
    residual = float(np.max(canonical_defects(spectra, delta, g, gbar, rho)))
    used_fallback = False
    if not converged or residual > eps:
        logger.warning(
            f"Fixed-point iteration stopped after {n_outer} outer steps (residual {residual:.3e}); "
            f"falling back to bracketed root finding"
        )
        delta, g, gbar = _bracketed(spectra, rho, eps, max_inner)
        residual = float(np.max(canonical_defects(spectra, delta, g, gbar, rho)))
        used_fallback = True
        if residual > eps:
            raise NonConvergenceError("canonical equations did not reach tolerance", residual)

    if not (delta > 0 and g > 0 and gbar > 0):
        raise NumericalRegimeError(f"non-positive canonical solution (δ={delta}, g={g}, ḡ={gbar})")

    return FixedPoint(
        delta=delta, g=g, gbar=gbar, residual=residual,
        iterations_outer=n_outer, iterations_inner=n_inner,
        delta_trace=tuple(trace), used_fallback=used_fallback,
    )


def resolvents(spectra: EffectiveSpectra, fp: FixedPoint, rho: float) -> Resolvents:
    M, L = spectra.M, spectra.L
    z = 1.0 / rho
    a = M * fp.g * fp.gbar / (L * fp.delta)
    return Resolvents(
        q_R=1.0 / (z + a * spectra.r),
        q_S=fp.delta / (1.0 + fp.delta * fp.gbar * spectra.s),
        q_T=1.0 / (1.0 + fp.g * spectra.t),
    )


def table_quantities(spectra: EffectiveSpectra, fp: FixedPoint, rho: Optional[float] = None) -> TableOneQuantities:
    """Every trace functional entering the variance, plus Γ, Γ_L, Δ_X, Δ_Y"""
    rho = spectra.rho_eff if rho is None else rho
    M, L = spectra.M, spectra.L
    r, s, t = spectra.r, spectra.s, spectra.t
    q = resolvents(spectra, fp, rho)
    q_R, q_S, q_T = q.q_R, q.q_S, q.q_T

    gamma_R = float(np.sum(r**2 * q_R**2) / L)
    gamma_RI = float(np.sum(r * q_R**2) / L)
    eta_R = float(np.sum(r**3 * q_R**3) / L)
    eta_RI = float(np.sum(r**2 * q_R**3) / L)

    gamma_S = float(np.sum(s**2 * q_S**2) / M)
    gamma_SI = float(np.sum(s * q_S**2) / M)
    eta_S = float(np.sum(s**3 * q_S**3) / M)
    eta_SI = float(np.sum(s**2 * q_S**3) / M)

    gamma_T = float(np.sum(t**2 * q_T**2) / M)
    gamma_TI = float(np.sum(t * q_T**2) / M)
    eta_T = float(np.sum(t**3 * q_T**3) / M)
    eta_TI = float(np.sum(t**2 * q_T**3) / M)
    psi_T = float(np.sum(t**2 * q_T**4) / M)

    Delta_Y = 1.0 - gamma_S * gamma_T
    if not Delta_Y > 0:
        raise NumericalRegimeError(f"Δ_Y = 1 − γ_S γ_T = {Delta_Y:.3e} is not positive; variance undefined")
    delta2 = fp.delta**2
    Gamma = M / (L * delta2) * (gamma_TI**2 * gamma_S / Delta_Y + fp.g**2 * gamma_T)
    Gamma_L = Gamma - gamma_S * psi_T / (L * delta2 * Delta_Y)
    Delta_X = 1.0 - gamma_R * Gamma
    if not Delta_X > 0:
        raise NumericalRegimeError(f"Δ_X = 1 − γ_R Γ = {Delta_X:.3e} is not positive; variance undefined")

    return TableOneQuantities(
        gamma_R=gamma_R, gamma_RI=gamma_RI, gamma_S=gamma_S, gamma_SI=gamma_SI,
        gamma_T=gamma_T, gamma_TI=gamma_TI, eta_R=eta_R, eta_RI=eta_RI,
        eta_S=eta_S, eta_SI=eta_SI, eta_T=eta_T, eta_TI=eta_TI, psi_T=psi_T,
        Delta_X=Delta_X, Delta_Y=Delta_Y, Gamma=Gamma, Gamma_L=Gamma_L,
    )


def emi(spectra: EffectiveSpectra, fp: FixedPoint, rho: Optional[float] = None) -> float:
    """Deterministic equivalent Ī(ρ) of the ergodic MI, in nats"""
    rho = spectra.rho_eff if rho is None else rho
    M, L = spectra.M, spectra.L
    a = M * fp.g * fp.gbar / (L * fp.delta)
    return float(
        np.sum(np.log1p(rho * a * spectra.r))
        + np.sum(np.log1p(fp.delta * fp.gbar * spectra.s))
        + np.sum(np.log1p(fp.g * spectra.t))
        - 2.0 * M * fp.g * fp.gbar
    )


def variance(tq: TableOneQuantities, use_small_L: bool = True) -> float:
    """V(ρ) = −log(1 − γ_R Γ_L) − log Δ_Y (or with Γ in place of Γ_L)"""
    gamma = tq.Gamma_L if use_small_L else tq.Gamma
    x_term = tq.gamma_R * gamma
    y_term = tq.gamma_S * tq.gamma_T
    if not (x_term < 1.0 and y_term < 1.0):
        raise NumericalRegimeError(
            f"variance logarithm argument not positive (1 − γ_R Γ = {1 - x_term:.3e}, Δ_Y = {1 - y_term:.3e})"
        )
    return float(-np.log1p(-x_term) - np.log1p(-y_term))


def gaussian_mi(
    spectra: EffectiveSpectra,
    rho: Optional[float] = None,
    use_small_L: bool = True,
    fp: Optional[FixedPoint] = None,
) -> GaussianMi:
    """Mean and variance of the Gaussian MI characterization at one SNR"""
    rho = spectra.rho_eff if rho is None else rho
    fp = solve_canonical(spectra, rho) if fp is None else fp
    tq = table_quantities(spectra, fp, rho)
    var = variance(tq, use_small_L)
    if not var > 0:
        raise NumericalRegimeError(f"non-positive MI variance {var:.3e}")
    return GaussianMi(
        mean_nats=emi(spectra, fp, rho),
        var_nats2=var,
        variant="small_L" if use_small_L else "large_L",
    )
