"""
Finite-difference verification of every analytic gradient path
"""
import logging
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from coretune.core.rng import Purpose, make_generator
from coretune.schemas.metrics import GradcheckEntry, GradcheckReport
from coretune.schemas.run_config import MixStrategy, Nonlinearity, RunConfig
from coretune.services import loss_service
from coretune.services.diagnostics_service import DiagnosticsService
from coretune.services.network_service import NetworkService
from coretune.services.pairing_service import PairingService
from coretune.services.training_service import TrainingService
from coretune.utils.numkernel import l2_normalize, one_hot

logger = logging.getLogger(__name__)

TOLERANCE = 1e-5
STEP = 1e-5

Grads = Dict[str, np.ndarray]
Instance = Tuple[Callable[[Grads], float], Grads, Grads]


def _dims(rng: np.random.Generator) -> Tuple[int, int, int]:
    n = int(rng.integers(4, 9))
    d_in = int(rng.integers(2, 7))
    k = int(rng.integers(2, 4))
    return n, d_in, k


def _labels(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    return one_hot(rng.permutation(np.arange(n) % k), k)


class GradcheckService:
    """Builds random instances per loss path and compares analytic to numeric gradients"""

    @staticmethod
    def contrastive_instance(config: RunConfig, rng: np.random.Generator, focal: bool) -> Instance:
        n, _, k = _dims(rng)
        labels = _labels(rng, n, k)
        z = rng.normal(size=(n, 3))
        generated = PairingService.generate_hard_pairs(
            z, labels, config.lambda_n, config.lambda_p, config.alpha, rng, rng
        )
        base = PairingService.build_base_pairs(labels, config.original_positives)
        pairs = PairingService.augment_pair_sets(base, generated)
        params = {"v": l2_normalize(rng.normal(size=(pairs.pool_size, 4)))}

        def loss_fn(ps: Grads) -> float:
            return loss_service.contrastive(ps["v"], pairs, config.tau, focal=focal).value

        out = loss_service.contrastive(params["v"], pairs, config.tau, focal=focal)
        return loss_fn, params, {"v": out.grads["v"]}

    @staticmethod
    def soft_ce_instance(config: RunConfig, rng: np.random.Generator) -> Instance:
        n, _, k = _dims(rng)
        targets = rng.dirichlet(np.ones(k), size=n)
        params = {"logits": rng.normal(scale=2.0, size=(n, k))}

        def loss_fn(ps: Grads) -> float:
            return loss_service.soft_cross_entropy(ps["logits"], targets).value

        out = loss_service.soft_cross_entropy(params["logits"], targets)
        return loss_fn, params, {"logits": out.grads["logits"]}

    @staticmethod
    def mixed_ce_instance(config: RunConfig, rng: np.random.Generator) -> Instance:
        n, _, k = _dims(rng)
        m = int(rng.integers(1, 2 * n + 1))
        labels = _labels(rng, n, k)
        labels_gen = rng.dirichlet(np.ones(k), size=m)
        params = {
            "logits_orig": rng.normal(scale=2.0, size=(n, k)),
            "logits_gen": rng.normal(scale=2.0, size=(m, k)),
        }

        def loss_fn(ps: Grads) -> float:
            return loss_service.mixed_ce(ps["logits_orig"], labels, ps["logits_gen"], labels_gen).value

        grad = loss_service.mixed_ce(params["logits_orig"], labels, params["logits_gen"], labels_gen).grads["logits"]
        return loss_fn, params, {"logits_orig": grad[:n], "logits_gen": grad[n:]}

    @staticmethod
    def full_objective_instance(config: RunConfig, rng: np.random.Generator) -> Instance:
        """Whole objective through encoder, projection, classifier and the mixup graph"""
        n, d_in, k = _dims(rng)
        full = config.model_copy(
            update={
                "use_contrastive": True,
                "use_focal": True,
                "use_generation": True,
                "use_mixed_ce": True,
                "mix_strategy": MixStrategy.HARD,
            }
        )
        net = NetworkService.init_params(
            d_in, [5], 4, k, 4, 3, int(rng.integers(2**31)), Nonlinearity.TANH
        )
        x = rng.normal(size=(n, d_in))
        labels = _labels(rng, n, k)

        z, _, _, trace = NetworkService.forward(net, x)
        generated = TrainingService.generate(full, z, labels, rng, rng)
        analytic = TrainingService.objective_from_trace(net, full, trace, labels, generated).param_grads

        def loss_fn(ps: Grads) -> float:
            _, _, _, tr = NetworkService.forward(net, x)
            return TrainingService.objective_from_trace(
                net, full, tr, labels, generated, with_grads=False
            ).total.value

        return loss_fn, net.tensors(), analytic

    @staticmethod
    def run(config: RunConfig, instances: Optional[int] = None, corrupt: bool = False) -> GradcheckReport:
        """Worst relative error per path over `instances` random instances.

        With corrupt=True analytic gradients are scaled by 1.01 before comparison.
        """
        instances = config.gradcheck_instances if instances is None else instances
        if instances < 1:
            raise ValueError("instances must be >= 1")
        builders = {
            "contrastive": lambda c, r: GradcheckService.contrastive_instance(c, r, focal=False),
            "focal_contrastive": lambda c, r: GradcheckService.contrastive_instance(c, r, focal=True),
            "soft_ce": GradcheckService.soft_ce_instance,
            "mixed_ce": GradcheckService.mixed_ce_instance,
            "full_objective": GradcheckService.full_objective_instance,
        }

        entries = []
        for offset, (path, build) in enumerate(builders.items()):
            rng = make_generator([config.seed, offset], Purpose.GRADCHECK)
            worst = 0.0
            for _ in range(instances):
                loss_fn, params, analytic = build(config, rng)
                if corrupt:
                    analytic = {name: 1.01 * g for name, g in analytic.items()}
                numeric = DiagnosticsService.finite_diff_grad(loss_fn, params, h=STEP)
                worst = max(worst, DiagnosticsService.relative_error(analytic, numeric))
            logger.info(f"gradcheck {path}: max relative error {worst:.3e} over {instances} instances")
            entries.append(
                GradcheckEntry(
                    path=path,
                    instances=instances,
                    max_relative_error=worst,
                    passed=worst <= TOLERANCE,
                )
            )
        return GradcheckReport(tolerance=TOLERANCE, entries=entries)
