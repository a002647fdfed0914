"""
Metrics and report schemas written by the commands
"""
import math
from typing import List, Optional

from pydantic import BaseModel, Field, field_validator


class MetricsRecord(BaseModel):
    """One epoch of a training run; field order is the metrics.jsonl schema"""
    epoch: int = Field(ge=0)
    loss_total: float
    loss_ce_mixed: float
    loss_con_focal: float
    train_acc: float = Field(ge=0, le=1)
    test_acc: float = Field(ge=0, le=1)
    tightness: float = Field(ge=0)
    feature_entropy: float
    lr: float

    @field_validator(
        "loss_total", "loss_ce_mixed", "loss_con_focal", "tightness", "feature_entropy", "lr"
    )
    @classmethod
    def finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value


class RunSummary(BaseModel):
    """Final accuracies and diagnostics of one run"""
    seed: int
    epochs: int
    final_train_acc: float
    final_test_acc: float
    final_loss_total: float
    tightness: float
    feature_entropy: float
    knn_entropy: Optional[float] = None
    separation: Optional[float] = None
    test_ce: float
    entropy_floor_hits: int = 0


class GradcheckEntry(BaseModel):
    """Worst relative error of one loss path over all instances"""
    path: str
    instances: int
    max_relative_error: float
    passed: bool


class GradcheckReport(BaseModel):
    """Finite-difference suite result"""
    tolerance: float
    entries: List[GradcheckEntry]

    @property
    def max_relative_error(self) -> float:
        return max(e.max_relative_error for e in self.entries)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


class AblationRow(BaseModel):
    """One row of the ablation lattice"""
    row: int
    name: str
    use_contrastive: bool
    use_focal: bool
    mix: bool
    mix_h: bool
    ours: bool = False
    test_acc_per_seed: List[float] = []
    mean_test_acc: Optional[float] = None
    std_test_acc: Optional[float] = None


class GroupTrend(BaseModel):
    """Final-epoch means of one run group"""
    runs: int
    mean_tightness: float
    mean_feature_entropy: float


class TrendReport(BaseModel):
    """Directional comparison of contrastive vs cross-entropy-only training"""
    with_contrastive: GroupTrend
    ce_only: GroupTrend
    tightness_lower: bool
    entropy_higher: bool

    @property
    def holds(self) -> bool:
        return self.tightness_lower and self.entropy_higher
