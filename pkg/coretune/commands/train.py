"""
train: one seeded run with metrics, resolved config and summary
"""
import argparse
import logging

from coretune.commands.common import add_config_args, output_dir, resolve_config
from coretune.services.data_service import DataService
from coretune.services.report_service import ReportService
from coretune.services.training_service import TrainingService

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("train", help="Train once and write metrics.jsonl")
    add_config_args(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    out_dir = output_dir(args, "train")
    logger.info(f"Starting training run (seed {config.seed}, dataset {config.dataset.value})")

    train_ds, test_ds = DataService.build_datasets(config)
    result = TrainingService.fit(config, train_ds, test_ds)
    ReportService.write_run(out_dir, config, result)

    summary = result.summary
    logger.info(
        f"Finished: train_acc={summary.final_train_acc:.4f} test_acc={summary.final_test_acc:.4f}"
    )
    return 0
