"""
Pair sets and generated pairs
"""
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coretune.utils.numkernel import check_soft_labels


class PairKind(str, Enum):
    """What a generated sample stands for"""
    HARD_POSITIVE = "hard-positive"
    HARD_NEGATIVE = "hard-negative"
    MIX = "mix"


class PairSets(BaseModel):
    """Per-anchor positive sets P_i and contrast candidates A_i over a feature pool.

    Anchors are the first len(positives) pool entries; generated features sit after
    them and are never anchors.
    """

    positives: List[List[int]]
    candidates: List[List[int]]
    pool_size: int = Field(ge=0)

    @model_validator(mode="after")
    def check_invariants(self) -> "PairSets":
        if len(self.positives) != len(self.candidates):
            raise ValueError("positives and candidates must cover the same anchors")
        if len(self.positives) > self.pool_size:
            raise ValueError("more anchors than pool entries")
        for i, (pos, cand) in enumerate(zip(self.positives, self.candidates)):
            if i in cand or i in pos:
                raise ValueError(f"anchor {i} appears in its own pair sets")
            cand_set = set(cand)
            if not cand_set.issuperset(pos):
                raise ValueError(f"P_{i} is not a subset of A_{i}")
            if cand and max(cand) >= self.pool_size:
                raise ValueError(f"A_{i} indexes outside the pool")
            if len(cand_set) != len(cand) or len(set(pos)) != len(pos):
                raise ValueError(f"duplicate index in the pair sets of anchor {i}")
        return self

    @property
    def anchor_count(self) -> int:
        return len(self.positives)


class GeneratedPair(BaseModel):
    """A mixed feature (encoder space) with its mixed soft label"""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    feature: np.ndarray
    label: np.ndarray
    kind: PairKind
    lam: float = Field(ge=0, le=1)
    anchor: Optional[int] = None
    constituents: Optional[Tuple[int, int]] = None

    @model_validator(mode="after")
    def check_label(self) -> "GeneratedPair":
        check_soft_labels(self.label.reshape(1, -1))
        return self

    @property
    def weights(self) -> Tuple[float, float]:
        """Weights of the two constituents, in constituent order.

        Hard positives and mixes weight the first constituent by lambda; hard
        negatives put (1 - lambda) on the anchor and lambda on the negative.
        """
        if self.kind == PairKind.HARD_NEGATIVE:
            return 1.0 - self.lam, self.lam
        return self.lam, 1.0 - self.lam
