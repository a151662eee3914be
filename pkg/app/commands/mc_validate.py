"""Theory against Monte-Carlo: mean, variance, outage grid and Gaussianity"""
from pathlib import Path
from typing import List
import logging

from app.commands.common import CommandContext, build_scenario, write_outputs
from app.schemas.monte_carlo import SamplerSpec
from app.schemas.run_config import RunConfig
from app.services.channel_model import scenario_snr, scenario_spectra
from app.services.monte_carlo import estimate
from app.services.outage_dmt import outage_probability, outage_rate
from app.services.rmt_core import gaussian_mi
from app.utils.csv_export import from_bits, rows_to_frame, to_units, unit_column

logger = logging.getLogger(__name__)

# Outage levels checked when no rate thresholds are configured
DEFAULT_LEVELS = (0.01, 0.1, 0.5)


def columns(units: str) -> List[str]:
    return ["quantity", unit_column("threshold", units), "theory", "empirical", "ci_low", "ci_high", "passed"]


def run(config: RunConfig, context: CommandContext) -> List[Path]:
    config.require("mc-validate")
    mc = config.mc
    units = context.units
    scenario = build_scenario(config)
    rho = scenario_snr(scenario)
    mi = gaussian_mi(scenario_spectra(scenario), rho, use_small_L=True)

    if config.sweep.rate_bits:
        thresholds = [from_bits(rate) for rate in config.sweep.rate_bits]
    else:
        thresholds = [outage_rate(mi.mean_nats, mi.var_nats2, level) for level in DEFAULT_LEVELS]

    seed = mc.seed if context.seed is None else context.seed
    spec = SamplerSpec(scenario=scenario, seed=seed, n_samples=mc.samples, n_streams=mc.streams)
    stats = estimate(spec, thresholds, threads=context.threads)

    threshold = unit_column("threshold", units)
    rows = [{
        "quantity": unit_column("mean", units),
        threshold: None,
        "theory": to_units(mi.mean_nats, units),
        "empirical": to_units(stats.mean, units),
        "ci_low": to_units(stats.mean_ci[0], units),
        "ci_high": to_units(stats.mean_ci[1], units),
        "passed": abs(stats.mean - mi.mean_nats) <= mc.mean_rel_tol * abs(mi.mean_nats),
    }]
    if stats.variance_defined:
        rows.append({
            "quantity": "var_nats2",
            threshold: None,
            "theory": mi.var_nats2,
            "empirical": stats.variance,
            "ci_low": None,
            "ci_high": None,
            "passed": abs(stats.variance - mi.var_nats2) <= mc.var_rel_tol * mi.var_nats2,
        })
    for item in stats.outage:
        theory = outage_probability(mi.mean_nats, mi.var_nats2, item.threshold_nats)
        rows.append({
            "quantity": "p_out",
            threshold: to_units(item.threshold_nats, units),
            "theory": theory,
            "empirical": item.p_hat,
            "ci_low": item.ci_low,
            "ci_high": item.ci_high,
            "passed": bool(item.ci_low <= theory <= item.ci_high),
        })
    if stats.ks_distance is not None:
        rows.append({
            "quantity": "ks_distance",
            threshold: None,
            "theory": 0.0,
            "empirical": stats.ks_distance,
            "ci_low": None,
            "ci_high": None,
            "passed": stats.ks_distance <= mc.ks_max,
        })

    failed = [row["quantity"] for row in rows if not row["passed"]]
    if failed:
        logger.warning(f"Monte-Carlo validation failed for: {', '.join(failed)}")
    frame = rows_to_frame(rows, columns(units))
    frame["passed"] = frame["passed"].astype(bool)
    return write_outputs(frame, context, "mc_validate", threshold, ["theory", "empirical"])
