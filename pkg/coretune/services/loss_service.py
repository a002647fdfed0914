"""
Contrastive, focal contrastive and soft-label cross-entropy losses with exact gradients
"""
import logging
from typing import List, Optional

import numpy as np
from scipy.special import logsumexp

from coretune.core.exceptions import ShapeError
from coretune.models.losses import LossOutput, ProbMatrix
from coretune.models.pairs import PairSets
from coretune.utils.numkernel import as_matrix, log_softmax_rows, softmax_rows

logger = logging.getLogger(__name__)


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise ValueError(f"temperature must be positive, got {tau!r}")


def _anchor_log_probs(v: np.ndarray, i: int, cand: List[int], tau: float) -> np.ndarray:
    """log p_ij for j in A_i: (v_i . v_j / tau) - logsumexp over A_i"""
    s = v[cand] @ v[i] / tau
    return s - logsumexp(s)


def contrast_prob_matrix(v, pairs: PairSets, tau: float) -> ProbMatrix:
    """Softmax of scaled similarities over each anchor's candidate set"""
    _check_tau(tau)
    v = as_matrix(v, "contrastive features")
    probs: List[Optional[np.ndarray]] = []
    log_probs: List[Optional[np.ndarray]] = []
    for i, cand in enumerate(pairs.candidates):
        if not cand:
            probs.append(None)
            log_probs.append(None)
            continue
        logp = _anchor_log_probs(v, i, cand, tau)
        log_probs.append(logp)
        probs.append(np.exp(logp))
    return ProbMatrix(candidates=[list(c) for c in pairs.candidates], probs=probs, log_probs=log_probs)


def _contrastive(v, pairs: PairSets, tau: float, focal: bool) -> LossOutput:
    """Shared kernel of the standard and focal contrastive losses.

    Per anchor with a non-empty P_i the loss is mean_{j in P_i} w_j * (-log p_ij) with
    w_j = 1 (standard) or 1 - p_ij (focal). With s_k the scaled similarities,
    dL_i/ds_k = ([k in P_i] c_k - p_k * sum_{j in P_i} c_j) / |P_i|, where
    c_j = -1 (standard) or p_j log p_j + p_j - 1 (focal).
    Anchors without positives are left out of both the sum and the divisor.
    """
    _check_tau(tau)
    v = as_matrix(v, "contrastive features")
    if v.shape[0] < pairs.pool_size:
        raise ShapeError(f"pool has {pairs.pool_size} entries but v has {v.shape[0]} rows")

    grad = np.zeros_like(v)
    total = 0.0
    active = 0
    for i in range(pairs.anchor_count):
        pos = pairs.positives[i]
        cand = pairs.candidates[i]
        if not pos or not cand:
            continue

        logp = _anchor_log_probs(v, i, cand, tau)
        p = np.exp(logp)
        where = {j: k for k, j in enumerate(cand)}
        at = np.array([where[j] for j in pos], dtype=np.int64)

        if focal:
            terms = -(1.0 - p[at]) * logp[at]
            c = p[at] * logp[at] + p[at] - 1.0
        else:
            terms = -logp[at]
            c = -np.ones(at.size)

        total += float(terms.sum()) / at.size
        active += 1

        g_s = -p * c.sum()
        g_s[at] += c
        g_s /= at.size * tau
        grad[i] += g_s @ v[cand]
        grad[cand] += g_s[:, None] * v[i]

    if active == 0:
        return LossOutput(value=0.0, grads={"v": grad})
    return LossOutput(value=total / active, grads={"v": grad / active})


def supervised_contrastive(v, pairs: PairSets, tau: float) -> LossOutput:
    """-(1/n') sum_i (1/|P_i|) sum_{j in P_i} log p_ij"""
    return _contrastive(v, pairs, tau, focal=False)


def focal_contrastive(v, pairs: PairSets, tau: float) -> LossOutput:
    """-(1/n') sum_i (1/|P_i|) sum_{j in P_i} (1 - p_ij) log p_ij"""
    return _contrastive(v, pairs, tau, focal=True)


def contrastive(v, pairs: PairSets, tau: float, focal: bool = True) -> LossOutput:
    return _contrastive(v, pairs, tau, focal=focal)


def soft_cross_entropy(logits, targets) -> LossOutput:
    """Mean over rows of -sum_k t_k log softmax(logits)_k"""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if logits.shape != targets.shape or logits.ndim != 2:
        raise ShapeError(f"logits {logits.shape} and targets {targets.shape} disagree")

    n = logits.shape[0]
    if n == 0:
        return LossOutput(value=0.0, grads={"logits": np.zeros_like(logits)})

    logp = log_softmax_rows(logits)
    value = float(-(targets * logp).sum() / n)
    mass = targets.sum(axis=1, keepdims=True)
    grad = (softmax_rows(logits) * mass - targets) / n
    return LossOutput(value=value, grads={"logits": grad})


def mixed_ce(logits_orig, labels_orig, logits_gen, labels_gen) -> LossOutput:
    """CE over originals plus CE over the generated set, each averaged over its own rows.

    The gradient is taken with respect to the stacked pool [logits_orig; logits_gen].
    """
    ce_orig = soft_cross_entropy(logits_orig, labels_orig)
    ce_gen = soft_cross_entropy(logits_gen, labels_gen)
    grad = np.vstack([ce_orig.grads["logits"], ce_gen.grads["logits"]])
    return LossOutput(value=ce_orig.value + ce_gen.value, grads={"logits": grad})


def total_objective(ce: LossOutput, con: LossOutput, eta: float) -> LossOutput:
    """ce + eta * con with gradients combined per input"""
    if eta < 0:
        raise ValueError("eta must be >= 0")
    grads = {name: g.copy() for name, g in ce.grads.items()}
    for name, g in con.grads.items():
        if name in grads:
            grads[name] = grads[name] + eta * g
        else:
            grads[name] = eta * g
    return LossOutput(value=ce.value + eta * con.value, grads=grads)
