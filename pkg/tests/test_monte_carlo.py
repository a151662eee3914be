import numpy as np
import pytest

from app.exceptions import NumericalRegimeError
from app.schemas.monte_carlo import SamplerSpec
from app.schemas.scenario import CorrelationSet, LinkBudget, PhaseShifts, Scenario, SystemDims
from app.services.channel_model import exponential_correlation_set, irs_matrix, scenario_spectra
from app.services.monte_carlo import (
    ChannelSampler,
    StreamResult,
    draw_mi_sample,
    estimate,
    hermitian_logdet,
    outage_estimate,
    stream_generator,
    stream_sizes,
)
from app.services.outage_dmt import outage_probability, outage_rate
from app.services.rmt_core import gaussian_mi
from tests.conftest import correlated_scenario, identity_scenario


def test_zero_snr_gives_zero_information():
    dims = SystemDims(M=2, N=3, L=4)
    scenario = Scenario(
        dims=dims, corr=CorrelationSet.identity(dims), phases=PhaseShifts.zeros(4),
        budget=LinkBudget(P_dBm=float("-inf")),
    )
    assert ChannelSampler(scenario).rho == 0.0
    stats = estimate(SamplerSpec(scenario=scenario, seed=3, n_samples=50))
    np.testing.assert_array_equal(stats.samples, np.zeros(50))


def test_scalar_channel_matches_direct_formula():
    scenario = identity_scenario(M=1, N=1, L=1, rho=5.0)
    sampler = ChannelSampler(scenario)
    X, Y = sampler.draw_hops(stream_generator(9, 0), 200)
    expected = np.log1p(5.0 * np.abs(X[:, 0, 0] * Y[:, 0, 0]) ** 2)
    np.testing.assert_allclose(sampler.draw(stream_generator(9, 0), 200), expected, rtol=1e-12)


def test_same_seed_same_samples():
    scenario = correlated_scenario()
    first = draw_mi_sample(scenario, stream_generator(42, 0))
    second = draw_mi_sample(scenario, stream_generator(42, 0))
    other = draw_mi_sample(scenario, stream_generator(42, 1))
    assert first == second
    assert first != other


def test_thread_count_does_not_change_results(correlated):
    spec = SamplerSpec(scenario=correlated, seed=17, n_samples=999, n_streams=4)
    one = estimate(spec, thresholds=[3.0], threads=1, batch_size=128)
    four = estimate(spec, thresholds=[3.0], threads=4, batch_size=128)
    np.testing.assert_array_equal(one.samples, four.samples)
    assert one.mean == four.mean and one.variance == four.variance
    assert one.outage == four.outage


def test_single_sample_has_no_variance(correlated):
    stats = estimate(SamplerSpec(scenario=correlated, seed=1, n_samples=1))
    assert stats.variance is None and not stats.variance_defined
    assert stats.ks_distance is None
    assert stats.mean_ci == (stats.mean, stats.mean)


def test_stream_sizes_cover_all_samples():
    assert stream_sizes(10, 3) == [4, 3, 3]
    assert sum(stream_sizes(12345, 7)) == 12345


def test_merge_matches_pooled_moments():
    rng = np.random.default_rng(0)
    a, b = rng.normal(1.0, 2.0, 300), rng.normal(-0.5, 1.0, 700)
    merged = StreamResult.from_samples(a).merge(StreamResult.from_samples(b))
    pooled = np.concatenate([a, b])
    assert merged.count == 1000
    assert merged.mean == pytest.approx(pooled.mean(), rel=1e-13)
    assert merged.m2 / 999 == pytest.approx(pooled.var(ddof=1), rel=1e-12)
    assert StreamResult.from_samples(np.empty(0)).merge(merged) is merged


def test_hop_entries_are_normalized():
    scenario = identity_scenario(M=3, N=2, L=5)
    X, Y = ChannelSampler(scenario).draw_hops(stream_generator(5, 0), 20000)
    assert np.mean(np.abs(X) ** 2) == pytest.approx(1 / 5, rel=0.02)
    assert np.mean(np.abs(Y) ** 2) == pytest.approx(1 / 3, rel=0.02)
    assert abs(np.mean(X)) < 0.01


def test_channel_covariance_follows_correlations():
    scenario = correlated_scenario(M=2, N=2, L=4, mu=0.6)
    sampler = ChannelSampler(scenario)
    X, Y = sampler.draw_hops(stream_generator(11, 0), 40000)
    H = sampler.channel(X, Y)
    empirical = np.mean(H @ np.conj(np.swapaxes(H, -1, -2)), axis=0)
    S = irs_matrix(scenario.corr, scenario.phases)
    expected = scenario.corr.R1 * np.real(np.trace(S)) / 4
    np.testing.assert_allclose(empirical, expected, atol=0.04)


def test_logdet_of_indefinite_stack_fails():
    with pytest.raises(NumericalRegimeError):
        hermitian_logdet(np.array([[[1.0, 0.0], [0.0, -1.0]]]))


def test_outage_estimate_counts_strictly_below():
    samples = np.array([1.0, 2.0, 3.0, 4.0])
    estimate_at_2 = outage_estimate(samples, 2.0)
    assert estimate_at_2.hits == 1 and estimate_at_2.p_hat == 0.25
    middle = outage_estimate(samples, 2.5)
    assert middle.p_hat == 0.5 and middle.low_count
    assert 0.0 <= middle.ci_low < 0.5 < middle.ci_high <= 1.0


def test_empirical_cdf_monotone(correlated):
    stats = estimate(SamplerSpec(scenario=correlated, seed=2, n_samples=500))
    grid = np.linspace(stats.samples[0] - 1, stats.samples[-1] + 1, 50)
    values = [stats.cdf(x) for x in grid]
    assert np.all(np.diff(values) >= 0)
    assert values[0] == 0.0 and values[-1] == 1.0


def test_moments_close_to_deterministic_equivalents():
    scenario = identity_scenario(M=4, N=4, L=4, rho=10.0)
    stats = estimate(SamplerSpec(scenario=scenario, seed=8, n_samples=4000, n_streams=2))
    mi = gaussian_mi(scenario_spectra(scenario), use_small_L=True)
    assert stats.mean == pytest.approx(mi.mean_nats, rel=0.03)
    assert stats.variance == pytest.approx(mi.var_nats2, rel=0.25)


@pytest.mark.slow
def test_large_system_oracle():
    scenario = identity_scenario(M=16, N=16, L=16, rho=10.0)
    mi = gaussian_mi(scenario_spectra(scenario), use_small_L=True)
    stats = estimate(
        SamplerSpec(scenario=scenario, seed=2024, n_samples=100_000, n_streams=4), thresholds=[mi.mean_nats]
    )
    assert stats.mean == pytest.approx(mi.mean_nats, rel=0.02)
    assert stats.variance == pytest.approx(mi.var_nats2, rel=0.10)
    assert 0.47 <= stats.outage[0].p_hat <= 0.53
    assert stats.ks_distance <= 0.02


@pytest.mark.slow
@pytest.mark.parametrize("L", [3, 16, 32])
def test_correlated_four_by_four_oracle(L):
    dims = SystemDims(M=4, N=4, L=L)
    scenario = Scenario(
        dims=dims,
        corr=exponential_correlation_set(dims, 0.5, 0.5, 0.5, 0.0),
        phases=PhaseShifts.zeros(L),
        rho_override=10.0,
    )
    mi = gaussian_mi(scenario_spectra(scenario), use_small_L=True)
    # Near one standard deviation below the mean, where the skew of I moves the CDF least
    levels = (0.1, 0.15, 0.2)
    thresholds = [outage_rate(mi.mean_nats, mi.var_nats2, p) for p in levels]
    stats = estimate(SamplerSpec(scenario=scenario, seed=31, n_samples=100_000, n_streams=4), thresholds)
    assert stats.mean == pytest.approx(mi.mean_nats, rel=0.02)
    assert stats.variance == pytest.approx(mi.var_nats2, rel=0.10)
    for p, empirical in zip(levels, stats.outage):
        theory = outage_probability(mi.mean_nats, mi.var_nats2, empirical.threshold_nats)
        assert theory == pytest.approx(p, rel=1e-9)
        assert empirical.ci_low <= theory <= empirical.ci_high
