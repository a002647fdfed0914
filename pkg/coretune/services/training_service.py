"""
Training loop: hardness-directed generation, mixed-label CE and focal contrastive loss
"""
import logging
from typing import List, Optional, Sequence

import numpy as np

from coretune.core.exceptions import NumericalError
from coretune.core.rng import Purpose, RngStreams
from coretune.models.dataset import Dataset
from coretune.models.losses import LossOutput
from coretune.models.network import ForwardTrace, MlpParams, Schedule
from coretune.models.pairs import GeneratedPair
from coretune.models.training import Evaluation, ObjectiveTerms, TrainingRun
from coretune.schemas.metrics import MetricsRecord, RunSummary
from coretune.schemas.run_config import MixStrategy, RunConfig
from coretune.services import loss_service
from coretune.services.diagnostics_service import DiagnosticsService
from coretune.services.data_service import DataService
from coretune.services.network_service import NetworkService
from coretune.services.pairing_service import PairingService

logger = logging.getLogger(__name__)


def _steps_per_epoch(size: int, batch_size: int) -> int:
    full, rest = divmod(size, batch_size)
    return full + (1 if rest >= 2 else 0)


class TrainingService:
    """Runs one seeded training run end to end"""

    @staticmethod
    def generate(
        config: RunConfig,
        z: np.ndarray,
        labels: np.ndarray,
        beta_rng: np.random.Generator,
        pairing_rng: np.random.Generator,
    ) -> List[GeneratedPair]:
        """Generated pairs for one batch according to the ablation switches"""
        if not config.use_generation:
            return []
        if config.mix_strategy == MixStrategy.MANIFOLD:
            return PairingService.gen_manifold_mix(z, labels, config.alpha, beta_rng, pairing_rng)
        return PairingService.generate_hard_pairs(
            z, labels, config.lambda_n, config.lambda_p, config.alpha, beta_rng, pairing_rng
        )

    @staticmethod
    def objective_from_trace(
        params: MlpParams,
        config: RunConfig,
        trace: ForwardTrace,
        labels: np.ndarray,
        generated: Sequence[GeneratedPair] = (),
        with_grads: bool = True,
    ) -> ObjectiveTerms:
        """L_ce (mixed when configured) + eta * L_con for a forwarded batch.

        Generated features are recomputed from the traced z through each pair's
        constituents, so the objective is a function of the parameters alone once
        the pairs are fixed.
        """
        head = trace.head
        n = head.z.shape[0]
        m = len(generated)
        k = params.class_count

        trace_gen = None
        logits_gen = np.zeros((0, k))
        v_gen = np.zeros((0, head.v.shape[1]))
        labels_gen = np.zeros((0, k))
        if m:
            z_gen = PairingService.remix_features(head.z, generated)
            logits_gen, v_gen, trace_gen = NetworkService.forward_generated(params, z_gen)
            labels_gen = np.vstack([g.label for g in generated])

        if config.use_mixed_ce and m:
            ce = loss_service.mixed_ce(head.logits, labels, logits_gen, labels_gen)
        else:
            ce = loss_service.soft_cross_entropy(head.logits, labels)
            if m:
                padded = np.vstack([ce.grads["logits"], np.zeros((m, k))])
                ce = LossOutput(value=ce.value, grads={"logits": padded})

        if config.use_contrastive:
            base = PairingService.build_base_pairs(labels, config.original_positives)
            pairs = PairingService.augment_pair_sets(base, generated)
            con = loss_service.contrastive(
                np.vstack([head.v, v_gen]), pairs, config.tau, focal=config.use_focal
            )
        else:
            con = LossOutput(value=0.0, grads={})

        total = loss_service.total_objective(ce, con, config.eta)
        terms = ObjectiveTerms(total=total, ce=ce, con=con)
        if with_grads:
            terms.param_grads = NetworkService.backward(
                params,
                trace,
                grad_logits=total.grads.get("logits"),
                grad_v=total.grads.get("v"),
                generated=generated if m else (),
                trace_gen=trace_gen,
            )
        return terms

    @staticmethod
    def evaluate(params: MlpParams, ds: Dataset) -> Evaluation:
        z, logits, v, _ = NetworkService.forward(params, ds.features)
        return Evaluation(z=z, logits=logits, v=v, accuracy=DiagnosticsService.accuracy(logits, ds.labels))

    @staticmethod
    def fit(
        config: RunConfig,
        train_ds: Dataset,
        test_ds: Dataset,
        seed: Optional[int] = None,
    ) -> TrainingRun:
        """Train a fresh network and collect per-epoch metrics"""
        seed = config.seed if seed is None else seed
        if train_ds.dim != test_ds.dim or train_ds.class_count != test_ds.class_count:
            raise ValueError("train and test datasets disagree in dimension or class count")
        steps = _steps_per_epoch(train_ds.size, config.batch_size)
        if steps == 0:
            raise ValueError(f"training set of {train_ds.size} samples yields no batch")

        streams = RngStreams(seed)
        params = NetworkService.from_config(config, train_ds.dim, train_ds.class_count, seed)
        schedule = Schedule(kind=config.schedule, base_lr=config.lr, total_steps=config.epochs * steps)
        logger.info(
            f"Training seed={seed} on {train_ds.size} samples, {steps} batches x {config.epochs} epochs"
        )

        metrics: List[MetricsRecord] = []
        step = 0
        lr = schedule.base_lr
        floor_hits = 0
        train_eval = None
        for epoch in range(1, config.epochs + 1):
            totals = np.zeros(3)
            batches = DataService.batch_iter(train_ds, config.batch_size, epoch, seed)
            for b, batch in enumerate(batches):
                try:
                    z, _, _, trace = NetworkService.forward(params, batch.features)
                    generated = TrainingService.generate(
                        config,
                        z,
                        batch.labels,
                        streams.stream(Purpose.BETA),
                        streams.stream(Purpose.PAIRING),
                    )
                    terms = TrainingService.objective_from_trace(
                        params, config, trace, batch.labels, generated
                    )
                    lr = NetworkService.lr_at(schedule, step)
                    NetworkService.sgd_momentum_step(
                        params, terms.param_grads, lr, config.momentum, config.weight_decay
                    )
                except NumericalError as e:
                    raise NumericalError(e.detail, epoch=epoch, batch=b) from e
                totals += (terms.total.value, terms.ce.value, terms.con.value)
                step += 1

            totals /= len(batches)
            train_eval = TrainingService.evaluate(params, train_ds)
            test_eval = TrainingService.evaluate(params, test_ds)
            # tightness and entropy are read on the unit-norm contrastive features
            entropy, floor_hits = DiagnosticsService.feature_entropy_terms(train_eval.v)
            try:
                record = MetricsRecord(
                    epoch=epoch,
                    loss_total=float(totals[0]),
                    loss_ce_mixed=float(totals[1]),
                    loss_con_focal=float(totals[2]),
                    train_acc=train_eval.accuracy,
                    test_acc=test_eval.accuracy,
                    tightness=DiagnosticsService.tightness(train_eval.v, train_ds.labels),
                    feature_entropy=entropy,
                    lr=lr,
                )
            except ValueError as e:
                raise NumericalError(f"epoch metrics are not finite: {e}", epoch=epoch) from e
            metrics.append(record)
            logger.info(
                f"epoch {epoch}: loss={record.loss_total:.5f} ce={record.loss_ce_mixed:.5f} "
                f"con={record.loss_con_focal:.5f} train_acc={record.train_acc:.3f} "
                f"test_acc={record.test_acc:.3f} lr={lr:.5f}"
            )

        summary = TrainingService.summarize(seed, params, metrics, train_eval, train_ds, test_ds, floor_hits)
        return TrainingRun(params=params, metrics=metrics, summary=summary, train_features=train_eval.z)

    @staticmethod
    def summarize(
        seed: int,
        params: MlpParams,
        metrics: Sequence[MetricsRecord],
        train_eval: Evaluation,
        train_ds: Dataset,
        test_ds: Dataset,
        floor_hits: int = 0,
    ) -> RunSummary:
        """End-of-run diagnostics; estimators that need more data than available are left empty"""
        last = metrics[-1]
        test_eval = TrainingService.evaluate(params, test_ds)
        try:
            knn = DiagnosticsService.knn_entropy_estimate(train_eval.v)
        except ValueError:
            knn = None
        try:
            separation = DiagnosticsService.class_separation(train_eval.v, train_ds.labels)
        except ValueError:
            separation = None
        return RunSummary(
            seed=seed,
            epochs=len(metrics),
            final_train_acc=last.train_acc,
            final_test_acc=last.test_acc,
            final_loss_total=last.loss_total,
            tightness=last.tightness,
            feature_entropy=last.feature_entropy,
            knn_entropy=knn,
            separation=separation,
            test_ce=loss_service.soft_cross_entropy(test_eval.logits, test_ds.labels).value,
            entropy_floor_hits=floor_hits,
        )


def train(config: RunConfig, train_ds: Dataset, test_ds: Dataset) -> List[MetricsRecord]:
    """Per-epoch metrics of one run"""
    return TrainingService.fit(config, train_ds, test_ds).metrics


evaluate = TrainingService.evaluate
