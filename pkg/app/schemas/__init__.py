from .scenario import SystemDims, CorrelationSet, PhaseShifts, LinkBudget, Scenario, EffectiveSpectra
from .rmt import FixedPoint, TableOneQuantities, GaussianMi
from .outage import OutageResult, DmtPoint, SizingAnswer
from .optimizer import OptimizerConfig, GradientReport, OptimizationResult
from .monte_carlo import SamplerSpec, OutageEstimate, EmpiricalStats
from .run_config import RunConfig

__all__ = [
    "SystemDims", "CorrelationSet", "PhaseShifts", "LinkBudget", "Scenario", "EffectiveSpectra",
    "FixedPoint", "TableOneQuantities", "GaussianMi",
    "OutageResult", "DmtPoint", "SizingAnswer",
    "OptimizerConfig", "GradientReport", "OptimizationResult",
    "SamplerSpec", "OutageEstimate", "EmpiricalStats",
    "RunConfig",
]
