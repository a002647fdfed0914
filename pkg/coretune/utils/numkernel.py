"""
Dense kernels shared by every service.

All arrays are float64. Row i of a feature matrix is the feature of sample i.
"""
from typing import Sequence

import numpy as np
from scipy.special import log_softmax as _log_softmax
from scipy.special import logsumexp
from scipy.special import softmax as _softmax

from coretune.core.exceptions import NumericalError, ShapeError

DEFAULT_EPS = 1e-12


def as_matrix(m, what: str = "matrix") -> np.ndarray:
    """Coerce to a 2-D float64 array"""
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ShapeError(f"{what} must be 2-D, got shape {arr.shape}")
    return arr


def ensure_finite(m: np.ndarray, what: str = "matrix") -> None:
    """Raise NumericalError naming the first row holding NaN or Inf"""
    finite = np.isfinite(m)
    if finite.all():
        return
    if m.ndim == 2:
        row = int(np.flatnonzero(~finite.all(axis=1))[0])
        raise NumericalError(f"non-finite value in {what}", row=row)
    raise NumericalError(f"non-finite value in {what}")


def row_norms(m: np.ndarray) -> np.ndarray:
    return np.sqrt(np.einsum("ij,ij->i", m, m))


def l2_normalize(m, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Scale each row to unit length; rows shorter than eps are divided by eps"""
    if eps <= 0:
        raise ValueError("eps must be positive")
    m = as_matrix(m, "features")
    ensure_finite(m, "features")
    denom = np.maximum(row_norms(m), eps)
    return m / denom[:, None]


def l2_normalize_backward(u: np.ndarray, grad_v: np.ndarray, eps: float = DEFAULT_EPS) -> np.ndarray:
    """Vector-Jacobian product of l2_normalize at u.

    For rows with norm > eps the Jacobian is (I - v v^T) / |u|; clamped rows are a
    plain division by eps.
    """
    norms = row_norms(u)
    clamped = norms <= eps
    denom = np.where(clamped, eps, norms)
    v = u / denom[:, None]
    radial = np.einsum("ij,ij->i", v, grad_v)
    grad_u = (grad_v - np.where(clamped, 0.0, radial)[:, None] * v) / denom[:, None]
    return grad_u


def cosine_sim_matrix(m) -> np.ndarray:
    """Pairwise cosine similarities of the rows"""
    m = as_matrix(m, "features")
    if m.shape[0] == 0:
        return np.zeros((0, 0))
    u = l2_normalize(m)
    sim = u @ u.T
    # matmul is not guaranteed to be bit-symmetric
    return 0.5 * (sim + sim.T)


def log_sum_exp(xs: Sequence[float]) -> float:
    """Overflow-free log(sum(exp(xs)))"""
    arr = np.asarray(xs, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    return float(logsumexp(arr))


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    return _softmax(logits, axis=1)


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    return _log_softmax(logits, axis=1)


def is_one_hot(labels: np.ndarray, tol: float = 1e-12) -> bool:
    """Every row has exactly one entry equal to 1 and zeros elsewhere"""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim != 2 or labels.shape[0] == 0:
        return labels.ndim == 2
    ones = np.abs(labels - 1.0) <= tol
    zeros = np.abs(labels) <= tol
    return bool(np.all(ones.sum(axis=1) == 1) and np.all(ones | zeros))


def check_soft_labels(labels: np.ndarray, tol: float = 1e-9) -> None:
    """Raise ValueError unless every row lies on the probability simplex"""
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim != 2:
        raise ValueError(f"labels must be 2-D, got shape {labels.shape}")
    if labels.shape[0] == 0:
        return
    if np.any(labels < -tol) or np.any(labels > 1 + tol):
        raise ValueError("label entries must lie in [0, 1]")
    sums = labels.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
    if bad.size:
        raise ValueError(f"label row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")


def hard_classes(labels: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties resolve to the smallest index"""
    return np.argmax(np.asarray(labels), axis=1)


def one_hot(classes: Sequence[int], k: int) -> np.ndarray:
    classes = np.asarray(classes, dtype=np.int64)
    out = np.zeros((classes.shape[0], k))
    out[np.arange(classes.shape[0]), classes] = 1.0
    return out
