"""
Dense network: initialization, forward pass, exact reverse-mode gradients and optimizer
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from coretune.core.exceptions import NumericalError, ShapeError
from coretune.core.rng import Purpose, make_generator
from coretune.models.network import DenseLayer, ForwardTrace, HeadTrace, MlpParams, Schedule
from coretune.models.pairs import GeneratedPair
from coretune.schemas.run_config import Nonlinearity, RunConfig, ScheduleKind
from coretune.utils.numkernel import as_matrix, l2_normalize, l2_normalize_backward

logger = logging.getLogger(__name__)


def _activate(kind: Nonlinearity, pre: np.ndarray) -> np.ndarray:
    if kind == Nonlinearity.RELU:
        return np.maximum(pre, 0.0)
    return np.tanh(pre)


def _activation_grad(kind: Nonlinearity, pre: np.ndarray) -> np.ndarray:
    if kind == Nonlinearity.RELU:
        return (pre > 0).astype(np.float64)
    t = np.tanh(pre)
    return 1.0 - t * t


def _glorot_layer(rng: np.random.Generator, fan_in: int, fan_out: int) -> DenseLayer:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    return DenseLayer(
        weight=rng.uniform(-bound, bound, size=(fan_in, fan_out)),
        bias=np.zeros(fan_out),
    )


class NetworkService:
    """Stateless operations over MlpParams"""

    @staticmethod
    def init_params(
        d_in: int,
        encoder_widths: Sequence[int],
        d_z: int,
        k: int,
        proj_hidden: int,
        p: int,
        seed: int,
        nonlinearity: Nonlinearity = Nonlinearity.TANH,
    ) -> MlpParams:
        """Glorot-uniform weights from the init stream, zero biases"""
        dims = [d_in, *encoder_widths, d_z, k, proj_hidden, p]
        if any(int(x) < 1 for x in dims):
            raise ValueError(f"all dimensions must be >= 1, got {dims}")

        rng = make_generator(seed, Purpose.INIT)
        widths = [d_in, *encoder_widths, d_z]
        encoder = [_glorot_layer(rng, a, b) for a, b in zip(widths, widths[1:])]
        classifier = _glorot_layer(rng, d_z, k)
        projection = [_glorot_layer(rng, d_z, proj_hidden), _glorot_layer(rng, proj_hidden, p)]
        return MlpParams(
            encoder=encoder,
            classifier=classifier,
            projection=projection,
            nonlinearity=nonlinearity,
        )

    @staticmethod
    def from_config(config: RunConfig, d_in: int, k: int, seed: Optional[int] = None) -> MlpParams:
        return NetworkService.init_params(
            d_in,
            config.encoder_widths,
            config.d_z,
            k,
            config.projection_hidden,
            config.proj_dim,
            config.seed if seed is None else seed,
            config.nonlinearity,
        )

    @staticmethod
    def _head_forward(params: MlpParams, z: np.ndarray) -> HeadTrace:
        logits = z @ params.classifier.weight + params.classifier.bias
        first, second = params.projection
        pre = z @ first.weight + first.bias
        act = _activate(params.nonlinearity, pre)
        out = act @ second.weight + second.bias
        return HeadTrace(z=z, logits=logits, proj_pre=pre, proj_act=act, proj_out=out, v=l2_normalize(out))

    @staticmethod
    def forward(params: MlpParams, x) -> Tuple[np.ndarray, np.ndarray, np.ndarray, ForwardTrace]:
        """Encoder, then classifier and normalized projection; returns (z, logits, v, trace)"""
        x = as_matrix(x, "inputs")
        if x.shape[1] != params.d_in:
            raise ShapeError(f"inputs have {x.shape[1]} columns, encoder expects {params.d_in}")

        inputs: List[np.ndarray] = []
        pres: List[np.ndarray] = []
        h = x
        last = len(params.encoder) - 1
        for idx, layer in enumerate(params.encoder):
            inputs.append(h)
            pre = h @ layer.weight + layer.bias
            pres.append(pre)
            h = pre if idx == last else _activate(params.nonlinearity, pre)

        head = NetworkService._head_forward(params, h)
        trace = ForwardTrace(inputs=inputs, pre_activations=pres, head=head)
        return h, head.logits, head.v, trace

    @staticmethod
    def forward_generated(params: MlpParams, z_gen) -> Tuple[np.ndarray, np.ndarray, HeadTrace]:
        """Classifier and projection applied to generated encoder-space features"""
        z_gen = np.asarray(z_gen, dtype=np.float64)
        if z_gen.size == 0:
            z_gen = z_gen.reshape(0, params.d_z)
        z_gen = as_matrix(z_gen, "generated features")
        if z_gen.shape[1] != params.d_z:
            raise ShapeError(f"generated features have {z_gen.shape[1]} columns, expected {params.d_z}")
        head = NetworkService._head_forward(params, z_gen)
        return head.logits, head.v, head

    @staticmethod
    def _head_backward(
        params: MlpParams,
        head: HeadTrace,
        grad_logits: Optional[np.ndarray],
        grad_v: Optional[np.ndarray],
    ) -> np.ndarray:
        """Accumulate classifier/projection gradients; return dL/dz for these rows"""
        dz = np.zeros_like(head.z)
        if grad_logits is not None:
            clf = params.classifier
            clf.weight_grad += head.z.T @ grad_logits
            clf.bias_grad += grad_logits.sum(axis=0)
            dz += grad_logits @ clf.weight.T
        if grad_v is not None:
            first, second = params.projection
            d_out = l2_normalize_backward(head.proj_out, grad_v)
            second.weight_grad += head.proj_act.T @ d_out
            second.bias_grad += d_out.sum(axis=0)
            d_pre = (d_out @ second.weight.T) * _activation_grad(params.nonlinearity, head.proj_pre)
            first.weight_grad += head.z.T @ d_pre
            first.bias_grad += d_pre.sum(axis=0)
            dz += d_pre @ first.weight.T
        return dz

    @staticmethod
    def backward(
        params: MlpParams,
        trace: ForwardTrace,
        grad_logits: Optional[np.ndarray] = None,
        grad_v: Optional[np.ndarray] = None,
        generated: Sequence[GeneratedPair] = (),
        trace_gen: Optional[HeadTrace] = None,
    ) -> Dict[str, np.ndarray]:
        """Exact parameter gradients of a loss given dL/dlogits and dL/dv over the pool.

        Pool rows are the n originals followed by the generated pairs. Gradients of a
        generated feature flow back to its two constituent z rows with the mixing
        weights, then through the encoder.
        """
        if trace is None:
            raise ValueError("backward needs the forward trace of the originals")
        n = trace.head.z.shape[0]
        m = len(generated)
        if m and trace_gen is None:
            raise ValueError("backward needs the trace of the generated features")

        def rows(grad: Optional[np.ndarray], start: int, stop: int) -> Optional[np.ndarray]:
            return None if grad is None else grad[start:stop]

        params.zero_grad()
        dz = NetworkService._head_backward(params, trace.head, rows(grad_logits, 0, n), rows(grad_v, 0, n))

        if m:
            dz_gen = NetworkService._head_backward(
                params, trace_gen, rows(grad_logits, n, n + m), rows(grad_v, n, n + m)
            )
            for g, pair in enumerate(generated):
                a, b = pair.constituents
                wa, wb = pair.weights
                dz[a] += wa * dz_gen[g]
                dz[b] += wb * dz_gen[g]

        grad = dz
        last = len(params.encoder) - 1
        for idx in range(last, -1, -1):
            layer = params.encoder[idx]
            if idx != last:
                grad = grad * _activation_grad(params.nonlinearity, trace.pre_activations[idx])
            layer.weight_grad += trace.inputs[idx].T @ grad
            layer.bias_grad += grad.sum(axis=0)
            grad = grad @ layer.weight.T

        return params.gradients()

    @staticmethod
    def sgd_momentum_step(
        params: MlpParams,
        grads: Dict[str, np.ndarray],
        lr: float,
        momentum: float,
        weight_decay: float,
    ) -> MlpParams:
        """buf <- momentum * buf + grad + weight_decay * param; param <- param - lr * buf"""
        if lr < 0:
            raise ValueError("lr must be >= 0")
        for name, layer in params.named_layers():
            for attr in ("weight", "bias"):
                param = getattr(layer, attr)
                buf = getattr(layer, f"{attr}_buf")
                buf *= momentum
                buf += grads[f"{name}.{attr}"] + weight_decay * param
                param -= lr * buf
                if not np.all(np.isfinite(param)):
                    raise NumericalError(f"parameter {name}.{attr} became non-finite")
        return params

    @staticmethod
    def lr_at(schedule: Schedule, step: int) -> float:
        """Scheduled learning rate; steps beyond the end take the final value"""
        t = min(max(step, 0), schedule.total_steps) / schedule.total_steps
        if schedule.kind == ScheduleKind.COSINE:
            return schedule.base_lr * 0.5 * (1.0 + math.cos(math.pi * t))
        if schedule.kind == ScheduleKind.LINEAR:
            return schedule.base_lr * (1.0 - t)
        return schedule.base_lr


init_params = NetworkService.init_params
forward = NetworkService.forward
forward_generated = NetworkService.forward_generated
backward = NetworkService.backward
sgd_momentum_step = NetworkService.sgd_momentum_step
lr_at = NetworkService.lr_at
