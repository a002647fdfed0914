"""
Run configuration schema
"""
from enum import Enum
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class ScheduleKind(str, Enum):
    """Learning-rate schedules"""
    COSINE = "cosine"
    LINEAR = "linear"
    CONSTANT = "constant"


class Nonlinearity(str, Enum):
    """Activation shared by encoder hidden layers and the projection head"""
    TANH = "tanh"
    RELU = "relu"


class MixStrategy(str, Enum):
    """How generated samples are formed"""
    HARD = "hard"
    MANIFOLD = "manifold"


class DatasetKind(str, Enum):
    """Dataset sources"""
    BLOBS = "blobs"
    MOONS = "moons"
    CSV = "csv"


class RunConfig(BaseModel):
    """Every hyper-parameter of a run; omitted keys take these defaults"""

    model_config = ConfigDict(extra="forbid", validate_assignment=True)

    # Objective
    eta: float = Field(default=0.1, ge=0)
    alpha: float = Field(default=1.0, gt=0)
    tau: float = Field(default=0.07, gt=0)
    lambda_n: float = Field(default=0.8, ge=0, le=1)
    lambda_p: float = Field(default=0.0, ge=0, le=1)

    # Optimization
    lr: float = Field(default=0.05, gt=0)
    momentum: float = Field(default=0.9, ge=0, lt=1)
    weight_decay: float = Field(default=1e-4, ge=0)
    schedule: ScheduleKind = ScheduleKind.COSINE
    epochs: int = Field(default=50, ge=1)
    batch_size: int = Field(default=32, ge=2)
    seed: int = Field(default=0, ge=0)

    # Network
    encoder_widths: List[int] = Field(default_factory=lambda: [32])
    d_z: int = Field(default=16, ge=1)
    proj_hidden: Optional[int] = Field(default=None, ge=1)
    proj_dim: int = Field(default=32, ge=1)
    nonlinearity: Nonlinearity = Nonlinearity.TANH

    # Ablation switches
    use_contrastive: bool = True
    use_focal: bool = True
    use_generation: bool = True
    use_mixed_ce: bool = True
    mix_strategy: MixStrategy = MixStrategy.HARD
    original_positives: bool = True

    # Dataset
    dataset: DatasetKind = DatasetKind.BLOBS
    blob_classes: int = Field(default=3, ge=2)
    blob_per_class: int = Field(default=30, ge=1)
    blob_separation: float = Field(default=3.0, ge=0)
    blob_noise: float = Field(default=1.0, gt=0)
    blob_dim: int = Field(default=8, ge=1)
    moons_per_class: int = Field(default=100, ge=1)
    moons_noise: float = Field(default=0.1, ge=0)
    train_csv: Optional[str] = None
    test_csv: Optional[str] = None
    test_fraction: float = Field(default=0.25, ge=0, lt=1)

    # Experiment drivers
    seeds: int = Field(default=5, ge=1)
    gradcheck_instances: int = Field(default=20, ge=1)

    @field_validator("encoder_widths", mode="before")
    @classmethod
    def split_widths(cls, value):
        if isinstance(value, str):
            return [part.strip() for part in value.split(",") if part.strip()]
        return value

    @field_validator("encoder_widths")
    @classmethod
    def positive_widths(cls, value: List[int]) -> List[int]:
        if any(w < 1 for w in value):
            raise ValueError("all encoder widths must be >= 1")
        return value

    @field_validator("proj_hidden", "train_csv", "test_csv", mode="before")
    @classmethod
    def blank_is_none(cls, value):
        if isinstance(value, str) and not value.strip():
            return None
        return value

    @model_validator(mode="after")
    def csv_needs_train_file(self) -> "RunConfig":
        if self.dataset == DatasetKind.CSV and not self.train_csv:
            raise ValueError("dataset=csv requires train_csv")
        return self

    @property
    def projection_hidden(self) -> int:
        """Projection hidden width; defaults to d_z"""
        return self.proj_hidden if self.proj_hidden is not None else self.d_z
