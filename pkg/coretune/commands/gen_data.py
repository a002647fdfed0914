"""
gen-data: synthetic blobs or two moons in the embeddings CSV schema
"""
import argparse
import logging
from pathlib import Path

from coretune.core.exceptions import ConfigError
from coretune.models.dataset import Dataset
from coretune.schemas.run_config import DatasetKind, RunConfig
from coretune.services.data_service import DataService

logger = logging.getLogger(__name__)

_DEFAULTS = RunConfig()


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen-data", help="Write a synthetic dataset as CSV")
    parser.add_argument(
        "--kind", choices=[DatasetKind.BLOBS.value, DatasetKind.MOONS.value], default="blobs"
    )
    parser.add_argument("--classes", type=int, default=_DEFAULTS.blob_classes)
    parser.add_argument("--per-class", type=int, default=None)
    parser.add_argument("--separation", type=float, default=_DEFAULTS.blob_separation)
    parser.add_argument("--noise", type=float, default=None)
    parser.add_argument("--dim", type=int, default=_DEFAULTS.blob_dim)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", type=str, required=True, help="Output CSV path")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    try:
        ds = _generate(args)
    except ValueError as e:
        raise ConfigError(f"Invalid dataset parameters: {e}")

    out = Path(args.out)
    DataService.dump_embeddings_csv(ds.features, ds.labels, out)
    logger.info(f"Wrote {ds.size} {args.kind} samples ({ds.class_count} classes) to {out}")
    return 0


def _generate(args: argparse.Namespace) -> Dataset:
    if args.kind == DatasetKind.MOONS.value:
        return DataService.gen_two_moons(
            _DEFAULTS.moons_per_class if args.per_class is None else args.per_class,
            _DEFAULTS.moons_noise if args.noise is None else args.noise,
            args.seed,
        )
    return DataService.gen_blobs(
        args.classes,
        _DEFAULTS.blob_per_class if args.per_class is None else args.per_class,
        args.separation,
        _DEFAULTS.blob_noise if args.noise is None else args.noise,
        args.dim,
        args.seed,
    )

