"""
Feature-space diagnostics: tightness, entropy estimates, separation, accuracy,
and the finite-difference gradient oracle
"""
import logging
import math
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import digamma, gammaln

from coretune.schemas.metrics import GroupTrend, MetricsRecord, TrendReport
from coretune.utils.numkernel import as_matrix, hard_classes, is_one_hot

logger = logging.getLogger(__name__)

ENTROPY_FLOOR = 1e-12


def _pairwise_sq_dists(z: np.ndarray) -> np.ndarray:
    diff = z[:, None, :] - z[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _class_means(z: np.ndarray, classes: np.ndarray) -> Dict[int, np.ndarray]:
    return {int(c): z[classes == c].mean(axis=0) for c in np.unique(classes)}


class DiagnosticsService:
    """Measurable surrogates of the feature-space entropy terms"""

    @staticmethod
    def tightness(z, labels) -> float:
        """Mean squared distance of each feature to its class mean (center-loss term)"""
        z = as_matrix(z, "features")
        labels = np.asarray(labels, dtype=np.float64)
        if z.shape[0] == 0:
            raise ValueError("tightness of an empty feature set")
        if not is_one_hot(labels):
            raise ValueError("tightness needs one-hot labels")
        classes = hard_classes(labels)
        means = _class_means(z, classes)
        centred = z - np.vstack([means[int(c)] for c in classes])
        return float(np.einsum("ij,ij->", centred, centred) / z.shape[0])

    @staticmethod
    def feature_entropy_terms(z) -> Tuple[float, int]:
        """Pairwise log-distance entropy estimate and the number of floored pairs"""
        z = as_matrix(z, "features")
        n, d = z.shape
        if n < 2:
            raise ValueError("entropy estimate needs at least two samples")
        sq = _pairwise_sq_dists(z)
        off = ~np.eye(n, dtype=bool)
        pairs = sq[off]
        floored = int(np.count_nonzero(pairs < ENTROPY_FLOOR))
        if floored:
            logger.warning(f"Entropy estimate floored {floored} coincident pairs at {ENTROPY_FLOOR}")
        value = d * float(np.log(np.maximum(pairs, ENTROPY_FLOOR)).sum()) / (n * (n - 1))
        return value, floored

    @staticmethod
    def feature_entropy_estimate(z) -> float:
        """d / (n(n-1)) * sum_{i != k} log |z_i - z_k|^2"""
        value, _ = DiagnosticsService.feature_entropy_terms(z)
        return value

    @staticmethod
    def knn_entropy_estimate(z, k: int = 3) -> float:
        """Kozachenko-Leonenko k-nearest-neighbour differential entropy, in nats"""
        z = as_matrix(z, "features")
        n, d = z.shape
        if n <= k:
            raise ValueError(f"k-NN entropy needs more than k={k} samples, got {n}")
        sq = _pairwise_sq_dists(z)
        np.fill_diagonal(sq, np.inf)
        kth = np.sqrt(np.maximum(np.sort(sq, axis=1)[:, k - 1], ENTROPY_FLOOR))
        log_unit_ball = 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)
        return float(digamma(n) - digamma(k) + log_unit_ball + d * np.log(kth).mean())

    @staticmethod
    def class_separation(z, labels) -> float:
        """Smallest distance between two class means"""
        z = as_matrix(z, "features")
        means = _class_means(z, hard_classes(np.asarray(labels)))
        if len(means) < 2:
            raise ValueError("class separation needs at least two classes")
        centres = np.vstack(list(means.values()))
        sq = _pairwise_sq_dists(centres)
        np.fill_diagonal(sq, np.inf)
        return float(math.sqrt(sq.min()))

    @staticmethod
    def accuracy(logits, labels) -> float:
        """Fraction of rows whose argmax logit matches the argmax label"""
        logits = np.asarray(logits, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.float64)
        if logits.shape != labels.shape:
            raise ValueError(f"logits {logits.shape} and labels {labels.shape} disagree")
        if logits.shape[0] == 0:
            return 0.0
        return float(np.mean(hard_classes(logits) == hard_classes(labels)))

    @staticmethod
    def finite_diff_grad(
        loss_fn: Callable[[Dict[str, np.ndarray]], float],
        params: Dict[str, np.ndarray],
        h: float = 1e-5,
    ) -> Dict[str, np.ndarray]:
        """Central differences, one coordinate at a time; arrays are restored afterwards"""
        if h <= 0:
            raise ValueError("h must be positive")
        grads: Dict[str, np.ndarray] = {}
        for name, arr in params.items():
            grad = np.zeros_like(arr, dtype=np.float64)
            flat = arr.reshape(-1)
            out = grad.reshape(-1)
            for j in range(flat.size):
                orig = flat[j]
                flat[j] = orig + h
                f_plus = loss_fn(params)
                flat[j] = orig - h
                f_minus = loss_fn(params)
                flat[j] = orig
                out[j] = (f_plus - f_minus) / (2.0 * h)
            grads[name] = grad
        return grads

    @staticmethod
    def relative_error(analytic: Dict[str, np.ndarray], numeric: Dict[str, np.ndarray]) -> float:
        """Largest absolute deviation, scaled by the largest gradient entry in either set"""
        scale = 1e-12
        worst = 0.0
        for name, a in analytic.items():
            b = numeric[name]
            if a.size == 0:
                continue
            scale = max(scale, float(np.abs(a).max()), float(np.abs(b).max()))
            worst = max(worst, float(np.abs(a - b).max()))
        return worst / scale

    @staticmethod
    def contrastive_trend_report(
        runs_with_con: Sequence[Sequence[MetricsRecord]],
        runs_ce_only: Sequence[Sequence[MetricsRecord]],
    ) -> TrendReport:
        """Compare final-epoch tightness and feature entropy of the two run groups"""
        if not runs_with_con or not runs_ce_only:
            raise ValueError("both run groups must be non-empty")
        if len(runs_with_con) != len(runs_ce_only):
            raise ValueError("run groups differ in size")
        lengths = {len(run) for run in list(runs_with_con) + list(runs_ce_only)}
        if len(lengths) != 1 or 0 in lengths:
            raise ValueError(f"runs differ in epoch count: {sorted(lengths)}")

        def trend(runs: Sequence[Sequence[MetricsRecord]]) -> GroupTrend:
            finals: List[MetricsRecord] = [run[-1] for run in runs]
            return GroupTrend(
                runs=len(finals),
                mean_tightness=float(np.mean([r.tightness for r in finals])),
                mean_feature_entropy=float(np.mean([r.feature_entropy for r in finals])),
            )

        con = trend(runs_with_con)
        ce = trend(runs_ce_only)
        return TrendReport(
            with_contrastive=con,
            ce_only=ce,
            tightness_lower=con.mean_tightness < ce.mean_tightness,
            entropy_higher=con.mean_feature_entropy > ce.mean_feature_entropy,
        )


tightness = DiagnosticsService.tightness
feature_entropy_estimate = DiagnosticsService.feature_entropy_estimate
knn_entropy_estimate = DiagnosticsService.knn_entropy_estimate
class_separation = DiagnosticsService.class_separation
accuracy = DiagnosticsService.accuracy
finite_diff_grad = DiagnosticsService.finite_diff_grad
relative_error = DiagnosticsService.relative_error
contrastive_trend_report = DiagnosticsService.contrastive_trend_report
