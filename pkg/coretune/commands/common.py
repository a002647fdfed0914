"""
Options and config resolution shared by the command verbs
"""
import argparse
import logging
from pathlib import Path
from typing import Optional

from coretune.core.config import build_run_config, load_run_config, settings
from coretune.schemas.run_config import RunConfig

logger = logging.getLogger(__name__)


def add_config_args(parser: argparse.ArgumentParser, with_out: bool = True) -> None:
    parser.add_argument("--config", type=str, default=None, help="Path to a key=value run config")
    parser.add_argument("--seed", type=int, default=None, help="Override the config seed")
    if with_out:
        parser.add_argument("--out", type=str, default=None, help="Output directory")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with command-line overrides applied and re-validated"""
    config = load_run_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "seeds", None) is not None:
        overrides["seeds"] = args.seeds
    if overrides:
        config = build_run_config({**config.model_dump(), **overrides})
    return config


def output_dir(args: argparse.Namespace, verb: str) -> Path:
    out: Optional[str] = getattr(args, "out", None)
    return Path(out) if out else Path(settings.OUTPUT_ROOT) / verb
