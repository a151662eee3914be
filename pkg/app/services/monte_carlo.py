"""Monte-Carlo oracle for the MI of the cascaded IRS channel.

Samples are split into position-indexed streams; stream i draws from a Philox
generator keyed by seed + (i << 64), so the output depends only on
(seed, n_streams, batch size) and not on thread scheduling.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging

import numpy as np
from scipy.stats import kstest

from app.config import settings
from app.exceptions import NumericalRegimeError
from app.schemas.monte_carlo import EmpiricalStats, OutageEstimate, SamplerSpec
from app.schemas.scenario import Scenario
from app.services.channel_model import hermitian_sqrt, scenario_snr

logger = logging.getLogger(__name__)

Z_95 = 1.959963984540054
LOW_COUNT_HITS = 30


def stream_generator(seed: int, stream_index: int) -> np.random.Generator:
    """Counter-based generator for one stream; keys never collide across streams"""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(stream_index) << 64)))


def complex_gaussian(rng: np.random.Generator, shape: Tuple[int, ...], variance: float) -> np.ndarray:
    """CN(0, variance) entries from pairs of standard normals"""
    pairs = rng.standard_normal(shape + (2,))
    return (pairs[..., 0] + 1j * pairs[..., 1]) * np.sqrt(variance / 2.0)


def hermitian_logdet(A: np.ndarray) -> np.ndarray:
    """log det of a stack of Hermitian positive-definite matrices via Cholesky"""
    try:
        chol = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        logger.debug("Cholesky failed; retrying on the symmetrized matrix")
        try:
            chol = np.linalg.cholesky(0.5 * (A + np.conj(np.swapaxes(A, -1, -2))))
        except np.linalg.LinAlgError as e:
            raise NumericalRegimeError(f"log-det factorization failed: {e}") from e
    diagonal = np.real(np.diagonal(chol, axis1=-2, axis2=-1))
    return 2.0 * np.sum(np.log(diagonal), axis=-1)


class ChannelSampler:
    """Draws MI realizations log det(I + ρ H H^H) with H = R1^½ X T1^½ Ψ R2^½ Y T2^½"""

    def __init__(self, scenario: Scenario):
        dims, corr = scenario.dims, scenario.corr
        self.N, self.L, self.M = dims.N, dims.L, dims.M
        self.rho = scenario_snr(scenario)
        # Square roots are computed once per scenario
        self._R1_sqrt = hermitian_sqrt(corr.R1, "R1")
        self._T2_sqrt = hermitian_sqrt(corr.T2, "T2")
        T1_sqrt = hermitian_sqrt(corr.T1, "T1")
        R2_sqrt = hermitian_sqrt(corr.R2, "R2")
        self._irs_kernel = (T1_sqrt * scenario.phases.psi) @ R2_sqrt

    def draw_hops(self, rng: np.random.Generator, batch: int) -> Tuple[np.ndarray, np.ndarray]:
        """X with CN(0, 1/L) entries and Y with CN(0, 1/M) entries"""
        X = complex_gaussian(rng, (batch, self.N, self.L), 1.0 / self.L)
        Y = complex_gaussian(rng, (batch, self.L, self.M), 1.0 / self.M)
        return X, Y

    def channel(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return self._R1_sqrt @ X @ self._irs_kernel @ Y @ self._T2_sqrt

    def draw(self, rng: np.random.Generator, batch: int) -> np.ndarray:
        X, Y = self.draw_hops(rng, batch)
        H = self.channel(X, Y)
        gram = H @ np.conj(np.swapaxes(H, -1, -2))
        return hermitian_logdet(np.eye(self.N) + self.rho * gram)


def draw_mi_batch(scenario: Scenario, rng: np.random.Generator, batch: int) -> np.ndarray:
    return ChannelSampler(scenario).draw(rng, batch)


def draw_mi_sample(scenario: Scenario, rng: np.random.Generator) -> float:
    """One MI realization in nats"""
    return float(draw_mi_batch(scenario, rng, 1)[0])


@dataclass(frozen=True)
class StreamResult:
    """Samples and running moments of one stream; merges associatively"""
    samples: np.ndarray
    count: int
    mean: float
    m2: float

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "StreamResult":
        count = int(samples.size)
        if count == 0:
            return cls(samples=samples, count=0, mean=0.0, m2=0.0)
        mean = float(np.mean(samples))
        return cls(samples=samples, count=count, mean=mean, m2=float(np.sum((samples - mean) ** 2)))

    def merge(self, other: "StreamResult") -> "StreamResult":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        return StreamResult(
            samples=np.concatenate([self.samples, other.samples]),
            count=count,
            mean=self.mean + delta * other.count / count,
            m2=self.m2 + other.m2 + delta * delta * self.count * other.count / count,
        )


def stream_sizes(n_samples: int, n_streams: int) -> List[int]:
    base, extra = divmod(n_samples, n_streams)
    return [base + (1 if i < extra else 0) for i in range(n_streams)]


def run_stream(
    sampler: ChannelSampler, seed: int, stream_index: int, n: int, batch_size: Optional[int] = None
) -> StreamResult:
    batch_size = batch_size or settings.MC_BATCH_SIZE
    rng = stream_generator(seed, stream_index)
    chunks = []
    remaining = n
    while remaining > 0:
        batch = min(batch_size, remaining)
        chunks.append(sampler.draw(rng, batch))
        remaining -= batch
    samples = np.concatenate(chunks) if chunks else np.empty(0)
    logger.debug(f"Stream {stream_index}: {n} samples drawn")
    return StreamResult.from_samples(samples)


def outage_estimate(sorted_samples: np.ndarray, threshold: float) -> OutageEstimate:
    """Empirical P(I < R) with a normal-approximation 95% interval"""
    n = sorted_samples.size
    hits = int(np.searchsorted(sorted_samples, threshold, side="left"))
    p_hat = hits / n
    half_width = Z_95 * np.sqrt(p_hat * (1.0 - p_hat) / n)
    return OutageEstimate(
        threshold_nats=float(threshold),
        p_hat=p_hat,
        ci_low=float(max(0.0, p_hat - half_width)),
        ci_high=float(min(1.0, p_hat + half_width)),
        hits=hits,
        low_count=hits < LOW_COUNT_HITS,
    )


def estimate(
    spec: SamplerSpec,
    thresholds: Sequence[float] = (),
    threads: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> EmpiricalStats:
    """Empirical mean, variance, outage frequencies and KS distance of the MI"""
    sampler = ChannelSampler(spec.scenario)
    sizes = stream_sizes(spec.n_samples, spec.n_streams)
    logger.info(f"Sampling {spec.n_samples} MI realizations in {spec.n_streams} streams (seed {spec.seed})")

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(run_stream, sampler, spec.seed, index, size, batch_size)
            for index, size in enumerate(sizes)
        ]
        # Merged in stream order so the result is independent of completion order
        results = [future.result() for future in futures]

    total = results[0]
    for result in results[1:]:
        total = total.merge(result)

    n = total.count
    samples = np.sort(total.samples)
    variance_defined = n > 1
    variance = total.m2 / (n - 1) if variance_defined else None
    if variance_defined:
        half_width = Z_95 * np.sqrt(variance / n)
        mean_ci = (total.mean - half_width, total.mean + half_width)
    else:
        mean_ci = (total.mean, total.mean)

    ks_distance = None
    if variance_defined and variance > 0:
        ks_distance = float(kstest(samples, "norm", args=(total.mean, np.sqrt(variance))).statistic)

    return EmpiricalStats(
        n_samples=n,
        mean=total.mean,
        mean_ci=(float(mean_ci[0]), float(mean_ci[1])),
        variance=None if variance is None else float(variance),
        variance_defined=variance_defined,
        samples=samples,
        outage=[outage_estimate(samples, threshold) for threshold in thresholds],
        ks_distance=ks_distance,
    )
