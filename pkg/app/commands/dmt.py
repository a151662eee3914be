"""Finite-SNR diversity against multiplexing gain"""
from pathlib import Path
from typing import List
import logging

import numpy as np

from app.commands.common import CommandContext, build_scenario, map_ordered, write_outputs
from app.schemas.run_config import RunConfig
from app.services.channel_model import scenario_snr, scenario_spectra
from app.services.outage_dmt import finite_snr_dmt, numeric_dmt_slope
from app.utils.csv_export import rows_to_frame

logger = logging.getLogger(__name__)

COLUMNS = ["m", "d_theorem5", "d_prop4", "d_numeric_slope"]
DEFAULT_GRID_POINTS = 9


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("dmt")
    scenario = build_scenario(config)
    spectra = scenario_spectra(scenario)
    rho = scenario_snr(scenario)
    k = scenario.dims.k

    grid = config.sweep.m or list(np.linspace(0.0, k, DEFAULT_GRID_POINTS))
    # Both endpoints are always reported
    grid = sorted(set(float(m) for m in grid) | {0.0, float(k)})

    def row(m: float):
        point = finite_snr_dmt(m, rho, spectra)
        return {
            "m": m,
            "d_theorem5": point.d,
            "d_prop4": point.d_quick,
            "d_numeric_slope": numeric_dmt_slope(m, rho, spectra),
        }

    rows = map_ordered(row, grid, context.threads)
    return write_outputs(rows_to_frame(rows, COLUMNS), context, "dmt", "m", ["d_theorem5", "d_prop4", "d_numeric_slope"])
