from pydantic import BaseModel, ConfigDict, Field
from typing import List, Optional, Tuple
import numpy as np

from app.schemas.scenario import Scenario


class SamplerSpec(BaseModel):
    """What to sample and how to split it into reproducible streams"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    scenario: Scenario
    seed: int = Field(..., ge=0, lt=2**64)
    n_samples: int = Field(..., ge=1)
    n_streams: int = Field(1, ge=1)


class OutageEstimate(BaseModel):
    """Empirical P(I < R) with a 95% normal-approximation interval"""
    model_config = ConfigDict(frozen=True)

    threshold_nats: float
    p_hat: float
    ci_low: float
    ci_high: float
    hits: int
    # Fewer than 30 tail hits: the normal interval is unreliable
    low_count: bool


class EmpiricalStats(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_samples: int
    mean: float
    mean_ci: Tuple[float, float]
    variance: Optional[float] = None
    variance_defined: bool = True
    samples: np.ndarray
    outage: List[OutageEstimate] = []
    ks_distance: Optional[float] = None

    def cdf(self, x: float) -> float:
        """Empirical CDF P(I ≤ x) from the sorted sample store"""
        return float(np.searchsorted(self.samples, x, side="right")) / self.n_samples
