from pydantic import BaseModel, ConfigDict, Field
from typing import Optional


class OutageResult(BaseModel):
    """Gaussian outage approximation at one rate threshold.

    p_out lies in (0, 1) in exact arithmetic, but double-precision Φ rounds to
    0 below about 38 standard deviations under the mean and to 1 above about 8
    over it, so both endpoints are accepted. log_p_out stays finite in the
    lower tail and is the field to use there.
    """
    model_config = ConfigDict(frozen=True)

    p_out: float = Field(..., ge=0, le=1)
    log_p_out: float
    rate_threshold_nats: float
    mean_nats: float
    var_nats2: float


class DmtPoint(BaseModel):
    """Finite-SNR diversity estimate at multiplexing gain m"""
    model_config = ConfigDict(frozen=True)

    m: float
    d: float
    d_quick: float
    k: int
    z: float
    H: float
    H_prime: float


class SizingAnswer(BaseModel):
    """Smallest IRS reaching a fraction η of the infinite-IRS EMI"""
    model_config = ConfigDict(frozen=True)

    eta_target: float
    L_min: Optional[int] = None
    reachable: bool = True
    mean_at_L: Optional[float] = None
    mean_inf: float
