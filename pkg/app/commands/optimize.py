"""Phase optimization trajectory, final phases and the transceiver-correlation study"""
from pathlib import Path
from typing import Dict, List
import logging

from app.commands.common import CommandContext, build_scenario, map_ordered, write_outputs
from app.exceptions import ConfigError
from app.schemas.run_config import RunConfig
from app.schemas.scenario import Scenario
from app.services.phase_optimizer import PhaseOptimizer
from app.utils.csv_export import from_bits, rows_to_frame
from app.utils.matrix_io import write_phases

logger = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ["iteration", "p_out_theory", "p_out_theory_small_l"]
SWEEP_COLUMNS = ["mu", "p_out_initial", "p_out_optimized", "iterations", "converged"]


def _with_threshold(config: RunConfig, scenario: Scenario) -> Scenario:
    if scenario.rate_threshold_nats is not None:
        return scenario
    if config.sweep.rate_bits:
        return scenario.with_rate(from_bits(config.sweep.rate_bits[0]))
    raise ConfigError("optimize needs scenario.rate_bits or sweep.rate_bits")


def correlation_row(config: RunConfig, mu: float) -> Dict[str, object]:
    scenario = _with_threshold(config, build_scenario(config, mu_transceiver=mu))
    optimizer = PhaseOptimizer(scenario, config.optimizer)
    result = optimizer.run(scenario.phases.theta)
    return {
        "mu": mu,
        "p_out_initial": result.trajectory[0],
        "p_out_optimized": result.trajectory[-1],
        "iterations": result.iterations,
        "converged": result.converged,
    }


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("optimize")
    scenario = _with_threshold(config, build_scenario(config))
    result = PhaseOptimizer(scenario, config.optimizer).run(scenario.phases.theta)
    logger.info(
        f"Optimized {scenario.dims.L} phases in {result.iterations} iterations: "
        f"G {result.trajectory[0]:.6e} -> {result.trajectory[-1]:.6e}"
    )

    rows = [
        {"iteration": index, "p_out_theory": value, "p_out_theory_small_l": small_L}
        for index, (value, small_L) in enumerate(zip(result.trajectory, result.trajectory_small_L))
    ]
    paths = write_outputs(
        rows_to_frame(rows, TRAJECTORY_COLUMNS), context, "optimize", "iteration", ["p_out_theory"]
    )
    theta_path = context.out_dir / "theta_rad.txt"
    write_phases(result.theta, theta_path)
    paths.append(theta_path)

    if config.sweep.mu_transceiver:
        sweep_rows = map_ordered(
            lambda mu: correlation_row(config, mu), config.sweep.mu_transceiver, context.threads
        )
        paths += write_outputs(
            rows_to_frame(sweep_rows, SWEEP_COLUMNS), context, "correlation_sweep", "mu", ["p_out_optimized"]
        )
    return paths
