"""EMI and variance against IRS size and SNR"""
from pathlib import Path
from typing import Dict, List, Optional, Tuple
import logging

from app.commands.common import CommandContext, build_scenario, map_ordered, snr_db_of, snr_points, write_outputs
from app.schemas.run_config import RunConfig
from app.schemas.scenario import Scenario
from app.services.channel_model import scenario_snr, scenario_spectra
from app.services.iid_closed_form import asymptotic_limit
from app.services.outage_dmt import irs_efficiency
from app.services.rmt_core import emi, solve_canonical, table_quantities, variance
from app.utils.csv_export import rows_to_frame, to_units

logger = logging.getLogger(__name__)

COLUMNS = ["L", "snr_db", "emi_bits", "emi_nats", "emi_inf_bits", "eta", "var_nats2", "var_inf_nats2"]
NAN = float("nan")


def has_rayleigh_limit(scenario: Scenario) -> bool:
    """True when L → ∞ tends to the N×N single-hop i.i.d. Rayleigh channel"""
    return scenario.dims.M == scenario.dims.N and scenario.corr.is_identity()


def emi_row(config: RunConfig, point: Tuple[int, Optional[float], Optional[float]]) -> Dict[str, object]:
    L, rho, power_dbm = point
    scenario = build_scenario(config, L=L, rho=rho, power_dbm=power_dbm)
    spectra = scenario_spectra(scenario)
    rho_eff = scenario_snr(scenario)
    fp = solve_canonical(spectra, rho_eff)
    mean = emi(spectra, fp, rho_eff)
    var = variance(table_quantities(spectra, fp, rho_eff), use_small_L=True)
    row = {
        "L": L,
        "snr_db": snr_db_of(scenario),
        "emi_bits": to_units(mean, "bits"),
        "emi_nats": mean,
        "emi_inf_bits": NAN,
        "eta": NAN,
        "var_nats2": var,
        "var_inf_nats2": NAN,
    }
    if has_rayleigh_limit(scenario):
        _, mean_inf, var_inf = asymptotic_limit(scenario.dims.N, rho_eff)
        row.update({
            "emi_inf_bits": to_units(mean_inf, "bits"),
            "eta": irs_efficiency(mean, mean_inf),
            "var_inf_nats2": var_inf,
        })
    return row


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("emi")
    sizes = config.sweep.L or [config.scenario.L]
    points = [(L, rho, power) for rho, power in snr_points(config) for L in sizes]
    if not has_rayleigh_limit(build_scenario(config, L=sizes[0])):
        logger.warning(
            "Infinite-IRS limit is only known for i.i.d. channels with M = N; "
            "emi_inf_bits, eta and var_inf_nats2 are written as NaN"
        )
    logger.info(f"EMI sweep over {len(points)} points")
    rows = map_ordered(lambda point: emi_row(config, point), points, context.threads)
    return write_outputs(rows_to_frame(rows, COLUMNS), context, "emi", "L", ["emi_bits", "eta"])
