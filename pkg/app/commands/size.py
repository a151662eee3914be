"""Minimum IRS size for target efficiencies across SNR"""
from pathlib import Path
from typing import List
import logging

from app.commands.common import CommandContext, build_scenario, map_ordered, snr_db_of, snr_points, write_outputs
from app.exceptions import ConfigError
from app.schemas.run_config import RunConfig
from app.services.channel_model import scenario_snr
from app.services.outage_dmt import min_irs_size
from app.utils.csv_export import rows_to_frame

logger = logging.getLogger(__name__)

COLUMNS = ["snr_db", "eta", "L_min", "reachable"]


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("size")
    if not config.sweep.eta:
        raise ConfigError("size needs sweep.eta targets")
    block = config.scenario
    if block.M != block.N:
        logger.warning(f"IRS sizing assumes M = N; using N = {block.N} for both")
    targets = sorted(set(config.sweep.eta))

    points = []
    for rho, power_dbm in snr_points(config):
        scenario = build_scenario(config, rho=rho, power_dbm=power_dbm)
        points.extend((snr_db_of(scenario), scenario_snr(scenario), eta) for eta in targets)

    def row(point):
        snr_db, rho_eff, eta = point
        answer = min_irs_size(eta, block.N, rho_eff)
        return {"snr_db": snr_db, "eta": eta, "L_min": answer.L_min, "reachable": answer.reachable}

    rows = map_ordered(row, points, context.threads)
    return write_outputs(rows_to_frame(rows, COLUMNS), context, "size", "snr_db", ["L_min"])
