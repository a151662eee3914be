"""Statistical-CSI phase-shift design by normalized gradient descent.

The objective is the Gaussian outage surrogate G(θ) = Φ((R − Ī)/√V) with V in
its Γ form; the Γ_L form is tracked alongside for reporting.
"""
from dataclasses import dataclass
from typing import List, Optional
import logging

import numpy as np
from scipy.special import ndtr

from app.exceptions import ConfigError, IrsAnalysisError
from app.schemas.optimizer import GradientReport, OptimizationResult, OptimizerConfig
from app.schemas.rmt import FixedPoint, TableOneQuantities
from app.schemas.scenario import EffectiveSpectra, Scenario, wrap_angles
from app.services.channel_model import hermitian_eigh, hermitian_sqrt, rotated_irs_correlation, scenario_snr
from app.services.rmt_core import emi, solve_canonical, table_quantities, variance
from app.services.sensitivities import mi_tangent, phase_spectrum_derivatives

logger = logging.getLogger(__name__)

INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class PhaseEvaluation:
    """Everything computed at one phase vector"""
    theta: np.ndarray
    B: np.ndarray
    spectra: EffectiveSpectra
    fp: FixedPoint
    tq: TableOneQuantities
    mean: float
    var: float
    var_small_L: float
    objective: float
    objective_small_L: float


class PhaseOptimizer:
    """Armijo–Goldstein gradient descent on the IRS phases of one scenario"""

    def __init__(self, scenario: Scenario, cfg: Optional[OptimizerConfig] = None):
        if scenario.rate_threshold_nats is None:
            raise ConfigError("phase optimization needs a rate threshold (scenario.rate_threshold_nats)")
        self.scenario = scenario
        self.cfg = cfg or OptimizerConfig()
        self.rate = float(scenario.rate_threshold_nats)
        self.rho = scenario_snr(scenario)
        corr = scenario.corr
        self._T1_sqrt = hermitian_sqrt(corr.T1, "T1")
        self._r, _ = hermitian_eigh(corr.R1, "R1")
        self._t, _ = hermitian_eigh(corr.T2, "T2")
        self._last_fp: Optional[FixedPoint] = None

    def evaluate(self, theta: np.ndarray) -> PhaseEvaluation:
        theta = wrap_angles(theta)
        B = rotated_irs_correlation(self.scenario.corr.R2, theta)
        S = self._T1_sqrt @ B @ self._T1_sqrt
        s, s_vectors = hermitian_eigh(0.5 * (S + S.conj().T), "S")
        spectra = EffectiveSpectra(r=self._r, s=s, t=self._t, rho_eff=self.rho, s_vectors=s_vectors)

        fp = solve_canonical(spectra, self.rho, initial=self._last_fp)
        self._last_fp = fp
        tq = table_quantities(spectra, fp, self.rho)
        mean = emi(spectra, fp, self.rho)
        var = variance(tq, use_small_L=False)
        var_small_L = variance(tq, use_small_L=True)
        return PhaseEvaluation(
            theta=theta, B=B, spectra=spectra, fp=fp, tq=tq,
            mean=mean, var=var, var_small_L=var_small_L,
            objective=float(ndtr((self.rate - mean) / np.sqrt(var))),
            objective_small_L=float(ndtr((self.rate - mean) / np.sqrt(var_small_L))),
        )

    def gradient(self, evaluation: PhaseEvaluation) -> GradientReport:
        """∂Ī/∂θ, ∂V/∂θ and ∂G/∂θ for every element"""
        spectra = evaluation.spectra
        ds = phase_spectrum_derivatives(self._T1_sqrt, evaluation.B, spectra.s_vectors)
        tangent = mi_tangent(spectra, evaluation.fp, evaluation.tq, self.rho, np.zeros(spectra.L), ds)

        var = evaluation.var
        excess = self.rate - evaluation.mean
        T = excess / np.sqrt(var)
        dT = (-tangent.dI * var - 0.5 * excess * tangent.dV) / var**1.5
        dG = np.exp(-0.5 * T * T) * INV_SQRT_2PI * dT
        return GradientReport(
            dI=tangent.dI, dV=tangent.dV, dG=dG,
            objective=evaluation.objective,
            objective_small_L=evaluation.objective_small_L,
            mean_nats=evaluation.mean,
            var_nats2=var,
        )

    def run(self, theta0: np.ndarray) -> OptimizationResult:
        cfg = self.cfg
        current = self.evaluate(np.asarray(theta0, dtype=np.float64))
        trajectory: List[float] = [current.objective]
        trajectory_small_L: List[float] = [current.objective_small_L]
        converged = False
        exhausted = False
        iterations = 0

        for iterations in range(1, cfg.max_outer + 1):
            report = self.gradient(current)
            norm = report.norm
            if norm < cfg.grad_tol:
                converged = True
                break
            direction = report.dG / norm

            alpha = cfg.alpha0
            accepted = None
            for _ in range(cfg.max_backtrack):
                candidate = self.evaluate(current.theta - alpha * direction)
                # Sufficient-decrease test α β ‖∇G‖ on the normalized step
                if current.objective - candidate.objective >= alpha * cfg.beta * norm:
                    accepted = candidate
                    break
                alpha *= cfg.c
            if accepted is None:
                exhausted = True
                logger.warning(
                    f"Backtracking exhausted after {cfg.max_backtrack} halvings at iteration {iterations}; "
                    f"returning best phases so far (G={current.objective:.6e})"
                )
                break

            current = accepted
            trajectory.append(current.objective)
            trajectory_small_L.append(current.objective_small_L)
            logger.debug(f"Iteration {iterations}: G={current.objective:.6e}, step={alpha:.3e}, |grad|={norm:.3e}")

        return OptimizationResult(
            theta=current.theta,
            trajectory=trajectory,
            trajectory_small_L=trajectory_small_L,
            iterations=iterations,
            converged=converged,
            backtrack_exhausted=exhausted,
        )


def objective(scenario: Scenario, theta: np.ndarray) -> float:
    return PhaseOptimizer(scenario).evaluate(theta).objective


def gradient(scenario: Scenario, theta: np.ndarray) -> GradientReport:
    optimizer = PhaseOptimizer(scenario)
    return optimizer.gradient(optimizer.evaluate(theta))


def optimize(
    scenario: Scenario, theta0: Optional[np.ndarray] = None, cfg: Optional[OptimizerConfig] = None
) -> OptimizationResult:
    """Descend from theta0 (default: the scenario's phases)"""
    theta0 = scenario.phases.theta if theta0 is None else theta0
    try:
        return PhaseOptimizer(scenario, cfg).run(theta0)
    except IrsAnalysisError:
        logger.error(f"Phase optimization failed for L={scenario.dims.L}")
        raise
