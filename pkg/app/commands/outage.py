"""Gaussian outage curves against Monte-Carlo frequencies, plus ε-outage rates"""
from pathlib import Path
from typing import List
import logging

from app.commands.common import CommandContext, build_scenario, snr_db_of, snr_points, write_outputs
from app.schemas.monte_carlo import SamplerSpec
from app.schemas.run_config import RunConfig
from app.services.channel_model import scenario_snr, scenario_spectra
from app.services.monte_carlo import estimate
from app.services.outage_dmt import outage_probability, outage_rate
from app.services.rmt_core import emi, solve_canonical, table_quantities, variance
from app.utils.csv_export import from_bits, rows_to_frame, to_units, unit_column

logger = logging.getLogger(__name__)


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("outage")
    units = context.units
    rate_column = unit_column("rate_threshold", units)
    columns = [
        "snr_db", rate_column, "p_out_theory", "p_out_theory_large_l",
        "p_out_mc", "mc_ci_low", "mc_ci_high", "mc_low_count",
    ]
    rate_target_columns = ["snr_db", "p_out", unit_column("rate", units)]
    thresholds = [from_bits(rate) for rate in config.sweep.rate_bits]

    rows, rate_rows = [], []
    for rho, power_dbm in snr_points(config):
        scenario = build_scenario(config, rho=rho, power_dbm=power_dbm)
        spectra = scenario_spectra(scenario)
        rho_eff = scenario_snr(scenario)
        fp = solve_canonical(spectra, rho_eff)
        tq = table_quantities(spectra, fp, rho_eff)
        mean = emi(spectra, fp, rho_eff)
        var_small_L = variance(tq, use_small_L=True)
        var_large_L = variance(tq, use_small_L=False)
        snr_db = snr_db_of(scenario)

        empirical = None
        if config.mc is not None and thresholds:
            seed = config.mc.seed if context.seed is None else context.seed
            spec = SamplerSpec(scenario=scenario, seed=seed, n_samples=config.mc.samples, n_streams=config.mc.streams)
            empirical = estimate(spec, thresholds, threads=context.threads)

        for index, threshold in enumerate(thresholds):
            row = {
                "snr_db": snr_db,
                rate_column: to_units(threshold, units),
                "p_out_theory": outage_probability(mean, var_small_L, threshold),
                "p_out_theory_large_l": outage_probability(mean, var_large_L, threshold),
            }
            if empirical is not None:
                estimate_at = empirical.outage[index]
                row.update({
                    "p_out_mc": estimate_at.p_hat,
                    "mc_ci_low": estimate_at.ci_low,
                    "mc_ci_high": estimate_at.ci_high,
                    "mc_low_count": estimate_at.low_count,
                })
            rows.append(row)

        for p_out in config.sweep.p_out:
            rate_rows.append({
                "snr_db": snr_db,
                "p_out": p_out,
                unit_column("rate", units): to_units(outage_rate(mean, var_small_L, p_out), units),
            })

    paths = write_outputs(rows_to_frame(rows, columns), context, "outage", rate_column, ["p_out_theory", "p_out_mc"])
    if config.sweep.p_out:
        paths += write_outputs(
            rows_to_frame(rate_rows, rate_target_columns), context, "outage_rate", "p_out", [unit_column("rate", units)]
        )
    return paths
