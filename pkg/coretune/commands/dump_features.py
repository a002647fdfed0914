"""
dump-features: retrain, then export final-epoch encoder features
"""
import argparse
import logging

from coretune.commands.common import add_config_args, output_dir, resolve_config
from coretune.services.data_service import DataService
from coretune.services.training_service import TrainingService

logger = logging.getLogger(__name__)

FEATURES_FILE = "features.csv"


def register(subparsers) -> None:
    parser = subparsers.add_parser("dump-features", help="Train and write features.csv")
    add_config_args(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = output_dir(args, "features")

    train_ds, test_ds = DataService.build_datasets(config)
    result = TrainingService.fit(config, train_ds, test_ds)

    path = DataService.dump_embeddings_csv(
        result.train_features, train_ds.labels, out_dir / FEATURES_FILE, prefix="z"
    )
    logger.info(f"Wrote {train_ds.size} feature rows to {path}")
    return 0
