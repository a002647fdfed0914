"""
ablate: the five-row flag lattice over several seeds
"""
import argparse
import logging
import sys

from coretune.commands.common import add_config_args, output_dir, resolve_config
from coretune.services.ablation_service import AblationService
from coretune.services.report_service import ReportService

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("ablate", help="Run every ablation row and compare")
    add_config_args(parser)
    parser.add_argument("--seeds", type=int, default=None, help="Repetitions per row")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = output_dir(args, "ablate")
    logger.info(f"Starting ablation with {config.seeds} seeds into {out_dir}")

    result = AblationService.run(config, out_dir)
    sys.stdout.write(ReportService.render_ablation_table(result.rows, result.trend))
    sys.stdout.flush()
    return 0
