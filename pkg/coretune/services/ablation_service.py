"""
Ablation lattice: five flag combinations run over several seeds
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel

from coretune.schemas.metrics import AblationRow, MetricsRecord, TrendReport
from coretune.schemas.run_config import MixStrategy, RunConfig
from coretune.services.data_service import DataService
from coretune.services.diagnostics_service import DiagnosticsService
from coretune.services.report_service import ReportService
from coretune.services.training_service import TrainingService

logger = logging.getLogger(__name__)


class AblationVariant(BaseModel):
    """One row of the lattice and the config switches it sets"""
    row: int
    name: str
    use_contrastive: bool
    use_focal: bool
    mix: bool
    mix_h: bool
    ours: bool = False

    def apply(self, config: RunConfig) -> RunConfig:
        return config.model_copy(
            update={
                "use_contrastive": self.use_contrastive,
                "use_focal": self.use_focal,
                "use_generation": self.mix or self.mix_h,
                "use_mixed_ce": self.mix or self.mix_h,
                "mix_strategy": MixStrategy.HARD if self.mix_h else MixStrategy.MANIFOLD,
            }
        )


ABLATION_VARIANTS: List[AblationVariant] = [
    AblationVariant(row=1, name="ce_only", use_contrastive=False, use_focal=False, mix=False, mix_h=False),
    AblationVariant(row=2, name="ce_con", use_contrastive=True, use_focal=False, mix=False, mix_h=False),
    AblationVariant(row=3, name="ce_mix", use_contrastive=False, use_focal=False, mix=True, mix_h=False),
    AblationVariant(row=4, name="ce_con_mixh", use_contrastive=True, use_focal=False, mix=False, mix_h=True),
    AblationVariant(
        row=5, name="full", use_contrastive=True, use_focal=True, mix=False, mix_h=True, ours=True
    ),
]


class AblationResult(BaseModel):
    rows: List[AblationRow]
    trend: TrendReport


class AblationService:
    """Runs every variant for seeds 0..seeds-1 offset by the config seed"""

    @staticmethod
    def run(config: RunConfig, out_dir: Path, seeds: Optional[int] = None) -> AblationResult:
        seeds = config.seeds if seeds is None else seeds
        if seeds < 1:
            raise ValueError("seeds must be >= 1")
        out_dir = Path(out_dir)

        rows: List[AblationRow] = []
        histories: Dict[int, List[List[MetricsRecord]]] = {}
        for variant in ABLATION_VARIANTS:
            variant_config = variant.apply(config)
            accs: List[float] = []
            histories[variant.row] = []
            for s in range(seeds):
                seed = config.seed + s
                run_config = variant_config.model_copy(update={"seed": seed})
                train_ds, test_ds = DataService.build_datasets(run_config, seed)
                run = TrainingService.fit(run_config, train_ds, test_ds, seed)
                run_dir = out_dir / f"row{variant.row}_{variant.name}" / f"seed{seed}"
                ReportService.write_run(run_dir, run_config, run)
                accs.append(run.summary.final_test_acc)
                histories[variant.row].append(run.metrics)
            logger.info(
                f"ablation row {variant.row} ({variant.name}): "
                f"mean test acc {np.mean(accs):.4f} over {seeds} seeds"
            )
            rows.append(
                AblationRow(
                    **variant.model_dump(),
                    test_acc_per_seed=accs,
                    mean_test_acc=float(np.mean(accs)),
                    std_test_acc=float(np.std(accs)),
                )
            )

        trend = DiagnosticsService.contrastive_trend_report(histories[2], histories[1])
        result = AblationResult(rows=rows, trend=trend)
        ReportService.write_ablation(out_dir, result.rows, result.trend)
        return result
