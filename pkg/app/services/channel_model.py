"""Correlation models, link budget and the effective spectra R, S, T.

All downstream deterministic-equivalent formulas see the channel only through
the eigenvalues of R = R1, S = T1^½ Ψ R2 Ψ^H T1^½ and T = T2, plus one scalar
SNR that already folds in the path loss of both hops.
"""
from typing import Tuple
import logging

import numpy as np

from app.exceptions import ConfigError, NumericalRegimeError
from app.schemas.scenario import (
    PSD_REL_TOL,
    CorrelationSet,
    EffectiveSpectra,
    LinkBudget,
    PhaseShifts,
    Scenario,
    SystemDims,
)

logger = logging.getLogger(__name__)

D0_METERS = 1.0


def db_to_linear(value_db: float) -> float:
    return float(10.0 ** (value_db / 10.0))


def linear_to_db(value: float) -> float:
    return float(10.0 * np.log10(value))


def exponential_correlation(n: int, mu: float) -> np.ndarray:
    """C(μ) with entries μ^{|i−j|}"""
    if n < 1:
        raise ConfigError(f"matrix size must be positive, got {n}")
    if not 0.0 <= mu < 1.0:
        raise ConfigError(f"exponential correlation needs 0 <= mu < 1, got {mu}")
    index = np.arange(n)
    lags = np.abs(index[:, None] - index[None, :])
    # 0**0 == 1 keeps the diagonal for mu = 0
    return np.power(float(mu), lags).astype(np.float64)


def exponential_correlation_set(
    dims: SystemDims, mu_R1: float = 0.0, mu_T1: float = 0.0, mu_R2: float = 0.0, mu_T2: float = 0.0
) -> CorrelationSet:
    return CorrelationSet(
        R1=exponential_correlation(dims.N, mu_R1),
        T1=exponential_correlation(dims.L, mu_T1),
        R2=exponential_correlation(dims.L, mu_R2),
        T2=exponential_correlation(dims.M, mu_T2),
    )


def path_loss(d: float, alpha: float, C0_dB: float) -> float:
    """L(d) = C0 (d/D0)^−α with D0 = 1 m"""
    if d <= 0:
        raise ConfigError(f"distance must be positive, got {d}")
    return db_to_linear(C0_dB) * (d / D0_METERS) ** (-alpha)


def effective_snr(budget: LinkBudget, dims: SystemDims) -> float:
    """ρ_eff = P/(Mσ²) · L(d_BS-IRS) · L(d_IRS-UE)"""
    power = db_to_linear(budget.P_dBm)
    noise = db_to_linear(budget.sigma2_dBm)
    gain = path_loss(budget.d_bs_irs, budget.alpha_bs_irs, budget.C0_dB) * path_loss(
        budget.d_irs_ue, budget.alpha_irs_ue, budget.C0_dB
    )
    return power / (dims.M * noise) * gain


def scenario_snr(scenario: Scenario) -> float:
    if scenario.rho_override is not None:
        return float(scenario.rho_override)
    return effective_snr(scenario.budget, scenario.dims)


def hermitian_eigh(matrix: np.ndarray, name: str = "matrix") -> Tuple[np.ndarray, np.ndarray]:
    """Descending eigenpairs of a Hermitian PSD matrix with small negatives clipped to 0"""
    hermitian = 0.5 * (matrix + matrix.conj().T)
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(hermitian)
    except np.linalg.LinAlgError as e:
        raise NumericalRegimeError(
            f"eigen-solve of {name} failed (condition number {np.linalg.cond(hermitian):.3e}): {e}"
        ) from e
    eigenvalues = eigenvalues[::-1].copy()
    eigenvectors = eigenvectors[:, ::-1].copy()

    lam_max = max(float(eigenvalues[0]), 0.0)
    lam_min = float(eigenvalues[-1])
    if lam_min < 0:
        if lam_min < -PSD_REL_TOL * max(lam_max, 1e-300):
            raise NumericalRegimeError(
                f"{name} is not positive semi-definite: min eigenvalue {lam_min:.3e}, max {lam_max:.3e}"
            )
        logger.warning(f"Clipping negative eigenvalues of {name} (min {lam_min:.3e}) to 0")
        eigenvalues = np.clip(eigenvalues, 0.0, None)
    return eigenvalues, eigenvectors


def hermitian_sqrt(matrix: np.ndarray, name: str = "matrix") -> np.ndarray:
    """V diag(√λ) V^H with negative-clipped eigenvalues"""
    eigenvalues, eigenvectors = hermitian_eigh(matrix, name)
    return (eigenvectors * np.sqrt(eigenvalues)) @ eigenvectors.conj().T


def rotated_irs_correlation(R2: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Ψ R2 Ψ^H, built from phase differences so a uniform phase offset cancels exactly"""
    phase_difference = np.subtract.outer(theta, theta)
    return np.exp(1j * phase_difference) * R2


def irs_matrix(corr: CorrelationSet, phases: PhaseShifts, T1_sqrt: np.ndarray = None) -> np.ndarray:
    """S = T1^½ Ψ R2 Ψ^H T1^½, symmetrized"""
    if T1_sqrt is None:
        T1_sqrt = hermitian_sqrt(corr.T1, "T1")
    S = T1_sqrt @ rotated_irs_correlation(corr.R2, phases.theta) @ T1_sqrt
    return 0.5 * (S + S.conj().T)


def effective_spectra(
    dims: SystemDims, corr: CorrelationSet, phases: PhaseShifts, rho_eff: float
) -> EffectiveSpectra:
    """Eigenvalues of R, S, T (descending) for the given phase shifts"""
    if phases.L != dims.L or corr.T1.shape != (dims.L, dims.L) or corr.R1.shape != (dims.N, dims.N):
        raise ConfigError("correlation / phase shapes do not match the system dimensions")
    if corr.T2.shape != (dims.M, dims.M):
        raise ConfigError("T2 shape does not match M")

    r, _ = hermitian_eigh(corr.R1, "R1")
    t, _ = hermitian_eigh(corr.T2, "T2")
    s, s_vectors = hermitian_eigh(irs_matrix(corr, phases), "S")

    return EffectiveSpectra(r=r, s=s, t=t, rho_eff=rho_eff, s_vectors=s_vectors)


def scenario_spectra(scenario: Scenario) -> EffectiveSpectra:
    return effective_spectra(scenario.dims, scenario.corr, scenario.phases, scenario_snr(scenario))
