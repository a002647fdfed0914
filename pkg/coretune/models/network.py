"""
Network parameters, forward traces and learning-rate schedules
"""
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from coretune.schemas.run_config import Nonlinearity, ScheduleKind


class DenseLayer(BaseModel):
    """Affine map x @ weight + bias with gradient accumulators and momentum buffers"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    weight: np.ndarray
    bias: np.ndarray
    weight_grad: Optional[np.ndarray] = None
    bias_grad: Optional[np.ndarray] = None
    weight_buf: Optional[np.ndarray] = None
    bias_buf: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def fill_buffers(self) -> "DenseLayer":
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[1],):
            raise ValueError(f"bias {self.bias.shape} does not match weight {self.weight.shape}")
        for name, like in (
            ("weight_grad", self.weight),
            ("bias_grad", self.bias),
            ("weight_buf", self.weight),
            ("bias_buf", self.bias),
        ):
            if getattr(self, name) is None:
                setattr(self, name, np.zeros_like(like))
        return self

    @property
    def fan_in(self) -> int:
        return int(self.weight.shape[0])

    @property
    def fan_out(self) -> int:
        return int(self.weight.shape[1])


class MlpParams(BaseModel):
    """Encoder G_e, linear classifier G_y and two-layer projection head G_c"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    encoder: List[DenseLayer]
    classifier: DenseLayer
    projection: List[DenseLayer] = Field(min_length=2, max_length=2)
    nonlinearity: Nonlinearity = Nonlinearity.TANH

    @model_validator(mode="after")
    def shapes_chain(self) -> "MlpParams":
        if not self.encoder:
            raise ValueError("encoder needs at least one layer")
        for a, b in zip(self.encoder, self.encoder[1:]):
            if a.fan_out != b.fan_in:
                raise ValueError("encoder layer widths do not chain")
        d_z = self.encoder[-1].fan_out
        if self.classifier.fan_in != d_z or self.projection[0].fan_in != d_z:
            raise ValueError("classifier and projection must read the encoder output")
        if self.projection[0].fan_out != self.projection[1].fan_in:
            raise ValueError("projection layers do not chain")
        return self

    @property
    def d_in(self) -> int:
        return self.encoder[0].fan_in

    @property
    def d_z(self) -> int:
        return self.encoder[-1].fan_out

    @property
    def class_count(self) -> int:
        return self.classifier.fan_out

    def named_layers(self) -> Iterator[Tuple[str, DenseLayer]]:
        for i, layer in enumerate(self.encoder):
            yield f"encoder.{i}", layer
        yield "classifier", self.classifier
        for i, layer in enumerate(self.projection):
            yield f"projection.{i}", layer

    def tensors(self) -> Dict[str, np.ndarray]:
        """Live parameter arrays by name; in-place edits change the network"""
        out: Dict[str, np.ndarray] = {}
        for name, layer in self.named_layers():
            out[f"{name}.weight"] = layer.weight
            out[f"{name}.bias"] = layer.bias
        return out

    def gradients(self) -> Dict[str, np.ndarray]:
        """Copies of the gradient accumulators by parameter name"""
        out: Dict[str, np.ndarray] = {}
        for name, layer in self.named_layers():
            out[f"{name}.weight"] = layer.weight_grad.copy()
            out[f"{name}.bias"] = layer.bias_grad.copy()
        return out

    def zero_grad(self) -> None:
        for _, layer in self.named_layers():
            layer.weight_grad.fill(0.0)
            layer.bias_grad.fill(0.0)

    def copy(self) -> "MlpParams":
        return self.model_copy(deep=True)


class HeadTrace(BaseModel):
    """Cached values of classifier and projection for one block of z rows"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    z: np.ndarray
    logits: np.ndarray
    proj_pre: Optional[np.ndarray] = None
    proj_act: Optional[np.ndarray] = None
    proj_out: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None


class ForwardTrace(BaseModel):
    """Cached inputs and pre-activations of every encoder layer, plus the head trace"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    head: HeadTrace


class Schedule(BaseModel):
    """Learning-rate schedule over a fixed number of optimizer steps"""
    kind: ScheduleKind = ScheduleKind.COSINE
    base_lr: float = Field(gt=0)
    total_steps: int = Field(ge=1)
