import numpy as np
import pytest

from app.schemas.scenario import CorrelationSet, EffectiveSpectra, PhaseShifts, Scenario, SystemDims
from app.services.channel_model import exponential_correlation_set, scenario_spectra
from app.services import rmt_core
from app.services.rmt_core import gaussian_mi


def identity_spectra(N: int, L: int, M: int, rho: float = 1.0) -> EffectiveSpectra:
    return EffectiveSpectra(r=np.ones(N), s=np.ones(L), t=np.ones(M), rho_eff=rho)


def correlated_scenario(M=4, N=4, L=8, mu=0.8, rho=10.0, theta=None, seed=7, rate_offset=-1.0) -> Scenario:
    """Exponentially correlated scenario with the rate threshold at Ī + rate_offset·√V"""
    dims = SystemDims(M=M, N=N, L=L)
    if theta is None:
        theta = np.random.default_rng(seed).uniform(0.0, 2.0 * np.pi, L)
    scenario = Scenario(
        dims=dims,
        corr=exponential_correlation_set(dims, mu, mu, mu, mu),
        phases=PhaseShifts(theta=theta),
        rho_override=rho,
    )
    mi = gaussian_mi(scenario_spectra(scenario), rho, use_small_L=False)
    return scenario.with_rate(mi.mean_nats + rate_offset * np.sqrt(mi.var_nats2))


def identity_scenario(M=4, N=4, L=8, rho=10.0, rate=2.0) -> Scenario:
    dims = SystemDims(M=M, N=N, L=L)
    return Scenario(
        dims=dims,
        corr=CorrelationSet.identity(dims),
        phases=PhaseShifts.ramp(L),
        rho_override=rho,
        rate_threshold_nats=rate,
    )


@pytest.fixture
def correlated():
    return correlated_scenario()


@pytest.fixture
def correlated_spectra(correlated):
    return scenario_spectra(correlated)


@pytest.fixture
def dmt_spectra():
    """N = M = 4, L = 2, μ = 0.5, Ψ = I at 10 dB"""
    dims = SystemDims(M=4, N=4, L=2)
    scenario = Scenario(
        dims=dims,
        corr=exponential_correlation_set(dims, 0.5, 0.5, 0.5, 0.5),
        phases=PhaseShifts.zeros(2),
        rho_override=10.0,
    )
    return scenario_spectra(scenario)


@pytest.fixture
def stalled_solver(monkeypatch):
    """Outer iteration that never converges and an outer defect with no sign change"""
    monkeypatch.setattr(rmt_core, "_iterate", lambda *args: (1.0, 1.0, 1.0, 1, 1, [1.0], False))
    monkeypatch.setattr(rmt_core, "_delta_of", lambda *args: 0.0)
