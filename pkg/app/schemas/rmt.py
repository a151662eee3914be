from pydantic import BaseModel, ConfigDict, Field
from typing import Literal, Tuple


class FixedPoint(BaseModel):
    """Positive solution (δ, g, ḡ) of the canonical equations"""
    model_config = ConfigDict(frozen=True)

    delta: float = Field(..., gt=0)
    g: float = Field(..., gt=0)
    gbar: float = Field(..., gt=0)
    residual: float = Field(..., ge=0)
    iterations_outer: int = 0
    iterations_inner: int = 0
    # Outer δ iterates, starting from the upper bound
    delta_trace: Tuple[float, ...] = ()
    used_fallback: bool = False


class TableOneQuantities(BaseModel):
    """Normalized traces of R/S/T powers against resolvent powers, and the variance ingredients"""
    model_config = ConfigDict(frozen=True)

    gamma_R: float
    gamma_RI: float
    gamma_S: float
    gamma_SI: float
    gamma_T: float
    gamma_TI: float
    eta_R: float
    eta_RI: float
    eta_S: float
    eta_SI: float
    eta_T: float
    eta_TI: float
    psi_T: float
    Delta_X: float
    Delta_Y: float
    Gamma: float
    Gamma_L: float


class GaussianMi(BaseModel):
    """Deterministic-equivalent mean and CLT variance of the mutual information (nats)"""
    model_config = ConfigDict(frozen=True)

    mean_nats: float
    var_nats2: float = Field(..., gt=0)
    variant: Literal["small_L", "large_L"] = "small_L"
