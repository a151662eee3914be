"""Shared plumbing for the subcommands: scenario assembly, sweep axes, output"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar
import logging

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.exceptions import ConfigError
from app.schemas.run_config import RunConfig, ScenarioBlock, format_validation_error
from app.schemas.scenario import CorrelationSet, PhaseShifts, Scenario, SystemDims
from app.services.channel_model import db_to_linear, exponential_correlation, linear_to_db, scenario_snr
from app.utils.csv_export import export_gnuplot_series, export_table_to_csv, from_bits
from app.utils.matrix_io import read_complex_matrix, read_phases

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class CommandContext:
    """Command-line overrides applied on top of the run config"""
    out_dir: Path
    units: str
    seed: Optional[int] = None
    threads: Optional[int] = None
    gnuplot: bool = False


def scenario_block(config: RunConfig) -> ScenarioBlock:
    if config.scenario is None:
        raise ConfigError("config has no scenario block")
    return config.scenario


def _correlation_matrix(config: RunConfig, name: str, size: int, mu: float) -> np.ndarray:
    files = scenario_block(config).correlation.files()
    if name in files:
        matrix = read_complex_matrix(config.resolve(files[name]))
        if matrix.shape != (size, size):
            raise ConfigError(f"scenario.correlation.{name}_file: shape {matrix.shape}, expected ({size}, {size})")
        return matrix
    return exponential_correlation(size, mu)


def initial_theta(config: RunConfig, L: int) -> np.ndarray:
    block = scenario_block(config)
    if block.theta_init == "ramp":
        return PhaseShifts.ramp(L).theta
    if block.theta_init == "file":
        theta = read_phases(config.resolve(block.theta_file))
        if theta.size != L:
            raise ConfigError(f"scenario.theta_file: {theta.size} phases, expected L = {L}")
        return theta
    if block.theta_init == "explicit":
        if L != block.L:
            raise ConfigError("scenario.theta: explicit phases cannot follow an L sweep")
        return np.asarray(block.theta, dtype=np.float64)
    return np.zeros(L)


def build_scenario(
    config: RunConfig,
    L: Optional[int] = None,
    rho: Optional[float] = None,
    power_dbm: Optional[float] = None,
    mu_transceiver: Optional[float] = None,
) -> Scenario:
    """Scenario for one sweep point; unset arguments fall back to the scenario block"""
    block = scenario_block(config)
    L = block.L if L is None else L
    corr = block.correlation
    mu_R1 = corr.mu_R1 if mu_transceiver is None else mu_transceiver
    mu_T2 = corr.mu_T2 if mu_transceiver is None else mu_transceiver

    budget = block.budget
    if power_dbm is not None:
        budget = budget.model_copy(update={"P_dBm": power_dbm})
    if rho is None and block.snr_db is not None and power_dbm is None:
        rho = db_to_linear(block.snr_db)

    rate = None if block.rate_bits is None else from_bits(block.rate_bits)
    try:
        return Scenario(
            dims=SystemDims(M=block.M, N=block.N, L=L),
            corr=CorrelationSet(
                R1=_correlation_matrix(config, "R1", block.N, mu_R1),
                T1=_correlation_matrix(config, "T1", L, corr.mu_T1),
                R2=_correlation_matrix(config, "R2", L, corr.mu_R2),
                T2=_correlation_matrix(config, "T2", block.M, mu_T2),
            ),
            phases=PhaseShifts(theta=initial_theta(config, L)),
            budget=budget,
            rate_threshold_nats=rate,
            rho_override=rho,
        )
    except ValidationError as e:
        raise ConfigError(f"invalid scenario:\n{format_validation_error(e)}") from e


def snr_points(config: RunConfig) -> List[Tuple[Optional[float], Optional[float]]]:
    """Sweep axis as (rho, power_dbm) pairs; exactly one of each pair is set"""
    sweep = config.sweep
    if sweep.snr_db:
        return [(db_to_linear(value), None) for value in sweep.snr_db]
    if sweep.power_dbm:
        return [(None, value) for value in sweep.power_dbm]
    return [(None, None)]


def snr_db_of(scenario: Scenario) -> float:
    return linear_to_db(scenario_snr(scenario))


def map_ordered(function: Callable[[T], R], items: Iterable[T], threads: Optional[int]) -> List[R]:
    """Evaluate sweep points on a worker pool; results keep the input order"""
    items = list(items)
    if threads == 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(function, items))


def write_outputs(
    frame: pd.DataFrame, context: CommandContext, name: str, x: str, curves: Sequence[str]
) -> List[Path]:
    paths = [export_table_to_csv(frame, context.out_dir / f"{name}.csv")]
    if context.gnuplot and len(frame):
        paths.extend(export_gnuplot_series(frame, x, curves, context.out_dir, name))
    return paths
