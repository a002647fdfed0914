"""
Loss values with gradients, and contrast probabilities
"""
import math
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from coretune.core.exceptions import NumericalError


class LossOutput(BaseModel):
    """A loss value with its gradient for each differentiated input.

    `grads` maps an input name ("v", "logits") to dLoss/dInput of the same shape.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    value: float
    grads: Dict[str, np.ndarray]

    @model_validator(mode="after")
    def finite(self) -> "LossOutput":
        if not math.isfinite(self.value):
            raise NumericalError(f"loss value is not finite: {self.value!r}")
        for name, grad in self.grads.items():
            if not np.all(np.isfinite(grad)):
                raise NumericalError(f"gradient {name!r} is not finite")
        return self

    @property
    def grad(self) -> np.ndarray:
        """The only gradient of a single-input loss"""
        if len(self.grads) != 1:
            raise KeyError(f"loss has gradients for {sorted(self.grads)}")
        return next(iter(self.grads.values()))


class ProbMatrix(BaseModel):
    """p_ij over the candidates A_i of each anchor; None marks an anchor with empty A_i"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    candidates: List[List[int]]
    probs: List[Optional[np.ndarray]]
    log_probs: List[Optional[np.ndarray]]

    def get(self, i: int, j: int) -> float:
        row = self.probs[i]
        if row is None:
            raise KeyError(f"anchor {i} has no candidates")
        return float(row[self.candidates[i].index(j)])
