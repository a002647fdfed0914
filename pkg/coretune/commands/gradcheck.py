"""
gradcheck: finite-difference suite over every loss path
"""
import argparse
import logging
import sys

from coretune.commands.common import add_config_args, resolve_config
from coretune.core.exceptions import CheckFailure
from coretune.services.gradcheck_service import GradcheckService
from coretune.services.report_service import ReportService

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("gradcheck", help="Compare analytic and numeric gradients")
    add_config_args(parser, with_out=False)
    parser.add_argument("--instances", type=int, default=None, help="Random instances per path")
    # negative control: scales analytic gradients by 1.01
    parser.add_argument("--corrupt-gradient", action="store_true", help=argparse.SUPPRESS)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    report = GradcheckService.run(config, args.instances, corrupt=args.corrupt_gradient)
    sys.stdout.write(ReportService.format_gradcheck(report))
    sys.stdout.flush()

    if not report.passed:
        failed = [e.path for e in report.entries if not e.passed]
        raise CheckFailure(
            f"gradient check failed for {', '.join(failed)}: "
            f"max relative error {report.max_relative_error:.3e} > {report.tolerance:.0e}"
        )
    return 0
