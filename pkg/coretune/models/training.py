"""
Training step and run results
"""
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from coretune.models.losses import LossOutput
from coretune.models.network import MlpParams
from coretune.schemas.metrics import MetricsRecord, RunSummary


class ObjectiveTerms(BaseModel):
    """Loss components of one batch and, after a backward pass, parameter gradients"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    total: LossOutput
    ce: LossOutput
    con: LossOutput
    param_grads: Optional[Dict[str, np.ndarray]] = None


class Evaluation(BaseModel):
    """Network outputs over a whole dataset"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    z: np.ndarray
    logits: np.ndarray
    v: np.ndarray
    accuracy: float


class TrainingRun(BaseModel):
    """Everything a finished run leaves behind"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: MlpParams
    metrics: List[MetricsRecord]
    summary: RunSummary
    train_features: np.ndarray
