from pydantic import BaseModel, ConfigDict, Field, field_validator
from typing import List
import numpy as np


class OptimizerConfig(BaseModel):
    """Armijo–Goldstein gradient descent controls"""
    model_config = ConfigDict(frozen=True)

    alpha0: float = Field(5e-4, gt=0)
    c: float = Field(0.5, gt=0, lt=1)
    beta: float = Field(0.5, gt=0, lt=1)
    max_outer: int = Field(200, ge=1)
    max_backtrack: int = Field(60, ge=1)
    grad_tol: float = Field(1e-10, ge=0)


class GradientReport(BaseModel):
    """Phase sensitivities of the EMI, the variance and the outage surrogate G(Ψ)"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    dI: np.ndarray
    dV: np.ndarray
    dG: np.ndarray
    objective: float
    objective_small_L: float
    mean_nats: float
    var_nats2: float

    @field_validator("dI", "dV", "dG", mode="before")
    @classmethod
    def check_finite(cls, value, info):
        array = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise ValueError(f"{info.field_name} has non-finite entries")
        array = array.copy()
        array.setflags(write=False)
        return array

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.dG))


class OptimizationResult(BaseModel):
    """Final phases and per-iteration objective of one optimizer run"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    theta: np.ndarray
    trajectory: List[float]
    trajectory_small_L: List[float]
    iterations: int
    converged: bool
    backtrack_exhausted: bool = False
