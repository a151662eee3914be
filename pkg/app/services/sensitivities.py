"""First-order sensitivities of the deterministic equivalents.

A perturbation is a pair (dz, ds): a change of z = 1/ρ and a change of the
S-spectrum. Phase derivatives enter only through ds, since S's eigenvalue
derivative along θ_l is u_j^H F_l u_j; z derivatives have ds = 0. Every
function here accepts K directions at once and returns length-K arrays.
"""
from dataclasses import dataclass
from typing import Tuple
import logging

import numpy as np

from app.exceptions import ConfigError, NumericalRegimeError
from app.schemas.rmt import FixedPoint, TableOneQuantities
from app.schemas.scenario import EffectiveSpectra
from app.services.channel_model import hermitian_sqrt, rotated_irs_correlation
from app.services.rmt_core import resolvents

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Tangent:
    """Directional derivatives along K perturbation directions"""
    d_delta: np.ndarray
    d_g: np.ndarray
    d_gbar: np.ndarray
    dI: np.ndarray
    # Γ form and Γ_L form of the variance
    dV: np.ndarray
    dV_small_L: np.ndarray


def sensitivity_matrix(tq: TableOneQuantities, fp: FixedPoint, z: float, M: int, L: int) -> np.ndarray:
    """Jacobian A of the canonical system in (δ, g, ḡ)"""
    return np.array([
        [z * tq.gamma_RI, M * fp.gbar * tq.gamma_R / L, M * fp.g * tq.gamma_R / L],
        [-tq.gamma_SI / fp.delta**2, 1.0, tq.gamma_S],
        [0.0, tq.gamma_T, 1.0],
    ])


def sensitivity_determinant(tq: TableOneQuantities, fp: FixedPoint, z: float, M: int, L: int) -> Tuple[float, float]:
    """|A| from the cofactor expansion and from a numeric 3×3 determinant"""
    closed = z * tq.gamma_RI * tq.Delta_Y + M * tq.gamma_R * tq.gamma_SI * tq.gamma_TI / (L * fp.delta**2)
    numeric = float(np.linalg.det(sensitivity_matrix(tq, fp, z, M, L)))
    return float(closed), numeric


def _solve_sensitivity(A: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        solution = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as e:
        raise NumericalRegimeError(f"singular sensitivity matrix (det {np.linalg.det(A):.3e})") from e
    if not np.all(np.isfinite(solution)):
        raise NumericalRegimeError("non-finite fixed-point sensitivities")
    return solution


def perturbation_matrix(T1: np.ndarray, R2: np.ndarray, theta: np.ndarray, l: int) -> np.ndarray:
    """F_l = ∂/∂θ_l of T1^½ Ψ R2 Ψ^H T1^½ (l is 0-based)"""
    theta = np.asarray(theta, dtype=np.float64)
    L = theta.size
    if not 0 <= l < L:
        raise ConfigError(f"element index {l} outside [0, {L})")
    B = rotated_irs_correlation(R2, theta)
    D = np.zeros((L, L), dtype=np.complex128)
    D[l, :] = 1j * B[l, :]
    D[:, l] = -1j * B[:, l]
    D[l, l] = 0.0
    T1_sqrt = hermitian_sqrt(T1, "T1")
    F = T1_sqrt @ D @ T1_sqrt
    return 0.5 * (F + F.conj().T)


def spectrum_directions(F: np.ndarray, s_vectors: np.ndarray) -> np.ndarray:
    """ds_j = u_j^H F u_j for one Hermitian perturbation F"""
    return np.real(np.einsum("ij,ik,kj->j", s_vectors.conj(), F, s_vectors))


def phase_spectrum_derivatives(T1_sqrt: np.ndarray, B: np.ndarray, s_vectors: np.ndarray) -> np.ndarray:
    """Matrix ds[l, j] = ∂s_j/∂θ_l for every element l at once.

    With W = T1^½ U and B = Ψ R2 Ψ^H, u_j^H F_l u_j = −2 Im(conj(W_lj) (BW)_lj),
    so each row sums to zero (a common phase leaves S unchanged).
    """
    W = T1_sqrt @ s_vectors
    return -2.0 * np.imag(W.conj() * (B @ W))


def mi_tangent(
    spectra: EffectiveSpectra,
    fp: FixedPoint,
    tq: TableOneQuantities,
    rho: float,
    dz: np.ndarray,
    ds: np.ndarray,
) -> Tangent:
    """Derivatives of (δ, g, ḡ), Ī and V along directions (dz[k], ds[k, :])"""
    M, L, N = spectra.M, spectra.L, spectra.N
    s, t = spectra.s, spectra.t
    z = 1.0 / rho
    dz = np.atleast_1d(np.asarray(dz, dtype=np.float64))
    ds = np.atleast_2d(np.asarray(ds, dtype=np.float64))
    if ds.shape != (dz.size, L):
        raise ConfigError(f"ds must have shape ({dz.size}, {L}), got {ds.shape}")

    q = resolvents(spectra, fp, rho)
    delta, g, gbar = fp.delta, fp.g, fp.gbar

    # S-spectrum functionals of the perturbation
    g_F = ds @ q.q_S / M
    gamma_S_F = ds @ (s * q.q_S**2) / M
    eta_S_F = ds @ (s**2 * q.q_S**3) / M

    A = sensitivity_matrix(tq, fp, z, M, L)
    rhs = np.vstack([-delta * tq.gamma_RI * dz, g_F - gbar * gamma_S_F, np.zeros_like(dz)])
    d_delta, d_g, d_gbar = _solve_sensitivity(A, rhs)

    dI = (np.sum(q.q_R) - N / z) * dz + M * gbar * g_F

    d_gamma_R = (
        -2.0 * M * tq.eta_R * (delta * gbar * d_g + delta * g * d_gbar - g * gbar * d_delta) / (L * delta**2)
        - 2.0 * tq.eta_RI * dz
    )
    d_gamma_T = -2.0 * tq.eta_T * d_g
    d_gamma_TI = -2.0 * tq.eta_TI * d_g
    d_gamma_S = (
        -2.0 * d_gbar * tq.eta_S
        - 2.0 * gbar * eta_S_F
        + 2.0 * d_delta * tq.eta_SI / delta**2
        + 2.0 * gamma_S_F
    )

    Delta_Y = tq.Delta_Y
    prefactor = M / (L * delta**2)
    bracket = tq.gamma_S * tq.gamma_TI**2 / Delta_Y + g**2 * tq.gamma_T
    d_Gamma = prefactor * (
        2.0 * tq.gamma_TI * d_gamma_TI * tq.gamma_S / Delta_Y
        + tq.gamma_TI**2 * (d_gamma_S + tq.gamma_S**2 * d_gamma_T) / Delta_Y**2
        + 2.0 * g * d_g * tq.gamma_T
        + g**2 * d_gamma_T
    ) - 2.0 * prefactor * bracket * d_delta / delta

    d_log_Delta_Y = (tq.gamma_S * d_gamma_T + tq.gamma_T * d_gamma_S) / Delta_Y
    dV = d_log_Delta_Y + (tq.gamma_R * d_Gamma + tq.Gamma * d_gamma_R) / tq.Delta_X

    # Γ_L = Γ − c with c = γ_S ψ_T/(L δ² Δ_Y)
    c = tq.gamma_S * tq.psi_T / (L * delta**2 * Delta_Y)
    d_psi_T = -4.0 * d_g * float(np.sum(t**3 * q.q_T**5)) / M
    d_c = (
        (d_gamma_S * tq.psi_T + tq.gamma_S * d_psi_T) / (L * delta**2 * Delta_Y)
        - 2.0 * c * d_delta / delta
        + c * d_log_Delta_Y
    )
    d_Gamma_L = d_Gamma - d_c
    Delta_X_L = 1.0 - tq.gamma_R * tq.Gamma_L
    dV_small_L = d_log_Delta_Y + (tq.gamma_R * d_Gamma_L + tq.Gamma_L * d_gamma_R) / Delta_X_L

    return Tangent(d_delta=d_delta, d_g=d_g, d_gbar=d_gbar, dI=dI, dV=dV, dV_small_L=dV_small_L)


def z_tangent(spectra: EffectiveSpectra, fp: FixedPoint, tq: TableOneQuantities, rho: float) -> Tangent:
    """Derivatives with respect to z = 1/ρ at fixed spectra"""
    return mi_tangent(spectra, fp, tq, rho, np.ones(1), np.zeros((1, spectra.L)))


def lemma1_sensitivities(
    tq: TableOneQuantities, fp: FixedPoint, F_l: np.ndarray, spectra: EffectiveSpectra, rho: float
) -> Tuple[float, float, float]:
    """(δ′, g′, ḡ′) along one explicit perturbation matrix F_l.

    Uses the full matrix Q_S = U diag(q_S) U^H, so F_l need not be diagonal
    in S's eigenbasis.
    """
    if spectra.s_vectors is None:
        raise ConfigError("spectra carry no eigenvectors of S; build them with effective_spectra")
    M, L = spectra.M, spectra.L
    U = spectra.s_vectors
    q = resolvents(spectra, fp, rho)
    Q_S = (U * q.q_S) @ U.conj().T
    g_F = float(np.real(np.trace(Q_S @ F_l))) / M
    gamma_S_F = float(np.real(np.trace(Q_S @ (U * spectra.s) @ U.conj().T @ Q_S @ F_l))) / M
    rhs = np.array([0.0, g_F - fp.gbar * gamma_S_F, 0.0])
    solution = _solve_sensitivity(sensitivity_matrix(tq, fp, 1.0 / rho, M, L), rhs)
    return float(solution[0]), float(solution[1]), float(solution[2])
