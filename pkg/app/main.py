from pathlib import Path
from typing import List, Optional
import argparse
import logging
import sys

from app.config import settings
from app.commands import COMMANDS
from app.commands.common import CommandContext
from app.exceptions import ConfigError, IrsAnalysisError
from app.schemas.run_config import load_run_config

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Subcommand parser; the shared flags are accepted after the subcommand"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, required=True, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=None, help="Output directory (overrides output.directory)")
    common.add_argument("--seed", type=int, default=None, help="Monte-Carlo seed (overrides mc.seed)")
    common.add_argument("--units", choices=["nats", "bits"], default=None, help="Rate units in CSV output")
    common.add_argument("--threads", type=int, default=settings.DEFAULT_THREADS, help="Worker threads for sweeps")
    common.add_argument("--log-level", default=None, help=f"Logging level (default {settings.LOG_LEVEL})")
    common.add_argument("--gnuplot", action="store_true", help="Also write two-column .dat series per curve")

    parser = argparse.ArgumentParser(
        prog="irs-outage",
        description=f"{settings.APP_NAME}: deterministic-equivalent outage analysis of IRS-aided MIMO links",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("emi", parents=[common], help="EMI and variance against L and SNR")
    subparsers.add_parser("outage", parents=[common], help="Outage probability: theory and Monte-Carlo")
    subparsers.add_parser("optimize", parents=[common], help="Phase-shift optimization")
    subparsers.add_parser("dmt", parents=[common], help="Finite-SNR diversity-multiplexing tradeoff")
    subparsers.add_parser("size", parents=[common], help="Minimum IRS size for target efficiencies")
    subparsers.add_parser("mc-validate", parents=[common], help="Theory against Monte-Carlo")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=(args.log_level or settings.LOG_LEVEL).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    try:
        config = load_run_config(args.config)
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError(f"--seed must lie in [0, 2^64), got {args.seed}")
        context = CommandContext(
            out_dir=args.out or config.resolve(config.output.directory),
            units=args.units or config.output.units,
            seed=args.seed,
            threads=args.threads,
            gnuplot=args.gnuplot or config.output.gnuplot,
        )
        paths = COMMANDS[args.command](config, context)
    except IrsAnalysisError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    logger.info(f"{args.command}: wrote {len(paths)} file(s) to {context.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
