"""
Command-line entry point
"""
import argparse
import logging
import sys
from typing import List, Optional

from coretune import __version__
from coretune.commands import ablate, dump_features, gen_data, gradcheck, train
from coretune.core.config import settings
from coretune.core.exceptions import CoreTuneError
from coretune.core.logging import setup_logging

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Contrastive fine-tuning with hardness-directed mixup on small dense networks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", type=str, default=None, help="Override CORETUNE_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in (train, gradcheck, ablate, dump_features, gen_data):
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)

    try:
        return args.handler(args)
    except CoreTuneError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.error(f"Global exception: {e}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
