"""
Dataset and batch models
"""
from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from coretune.utils.numkernel import check_soft_labels, ensure_finite, hard_classes


class Split(str, Enum):
    """Dataset split tag"""
    TRAIN = "train"
    TEST = "test"


class Dataset(BaseModel):
    """Features (n x d_in) with soft labels (n x K); immutable after construction"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    split: Split = Split.TRAIN

    @field_validator("features", "labels", mode="before")
    @classmethod
    def frozen_copy(cls, value) -> np.ndarray:
        arr = np.array(value, dtype=np.float64, copy=True)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_invariants(self) -> "Dataset":
        if self.features.ndim != 2 or self.features.shape[1] < 1:
            raise ValueError(f"features must be n x d with d >= 1, got {self.features.shape}")
        if self.labels.ndim != 2 or self.labels.shape[1] != self.class_count:
            raise ValueError(
                f"labels must be n x {self.class_count}, got {self.labels.shape}"
            )
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        ensure_finite(self.features, "features")
        check_soft_labels(self.labels)
        return self

    @property
    def size(self) -> int:
        return int(self.features.shape[0])

    @property
    def dim(self) -> int:
        return int(self.features.shape[1])

    @property
    def classes(self) -> np.ndarray:
        return hard_classes(self.labels)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.classes, minlength=self.class_count)

    def subset(self, indices: np.ndarray, split: Split) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[indices].copy(),
            labels=self.labels[indices].copy(),
            class_count=self.class_count,
            split=split,
        )


class Batch(BaseModel):
    """Indices into a dataset plus the materialized rows"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    indices: np.ndarray
    features: np.ndarray
    labels: np.ndarray

    @model_validator(mode="after")
    def unique_indices(self) -> "Batch":
        if np.unique(self.indices).size != self.indices.size:
            raise ValueError("batch indices must be unique")
        return self

    @property
    def size(self) -> int:
        return int(self.indices.size)
