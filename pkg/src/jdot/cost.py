"""Joint feature/label cost assembly.

The transport cost couples a feature metric and a label loss:
C_ij = alpha * d(x_i_src, x_j_tgt) + L(y_i_src, f(x_j_tgt)). The feature
metric is the squared Euclidean distance; the label loss is either the
squared difference (regression) or a sum of K one-vs-all squared hinge
terms with +/-1 encoding (classification).
"""

from dataclasses import dataclass

import numpy as np

from .accel import ops
from .errors import DataError
from .ot import CostMatrix

FEATURE_METRICS = ("sqeuclidean",)
LABEL_LOSSES = ("squared", "squared-hinge-ova")


@dataclass
class JointCostConfig:
    """Balance weight and component choices for the joint cost."""

    alpha: float
    metric: str = "sqeuclidean"
    loss: str = "squared"

    def __post_init__(self):
        if not np.isfinite(self.alpha) or self.alpha <= 0.0:
            raise DataError("alpha must be a positive finite real")
        if self.metric not in FEATURE_METRICS:
            raise DataError(f"unknown feature metric {self.metric!r}")
        if self.loss not in LABEL_LOSSES:
            raise DataError(f"unknown label loss {self.loss!r}")


def _as_features(X, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DataError(f"{name} must be a non-empty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains non-finite values")
    return arr


def feature_distance_matrix(X_s, X_t) -> np.ndarray:
    """Squared Euclidean distances, entry (i, j) = ||x_i_src - x_j_tgt||^2."""
    xs = _as_features(X_s, "X_s")
    xt = _as_features(X_t, "X_t")
    if xs.shape[1] != xt.shape[1]:
        raise DataError(
            f"feature dimensions differ: {xs.shape[1]} vs {xt.shape[1]}"
        )
    return ops.sqdist_matrix(xs, xt)


def heuristic_alpha(dist) -> float:
    """Balance weight normalizing the feature term: 1 / max distance."""
    d = np.asarray(dist, dtype=np.float64)
    if d.size == 0:
        raise DataError("empty distance matrix")
    if not np.all(np.isfinite(d)):
        raise DataError("distance matrix contains non-finite values")
    m = float(np.max(d))
    if m <= 0.0:
        raise DataError(
            "all pairwise distances are zero; the heuristic balance "
            "weight 1/max is undefined"
        )
    return 1.0 / m


def squared_label_loss(Y_s, F_t) -> np.ndarray:
    """Entry (i, j) = ||y_i - f_j||^2 for real-valued labels/predictions."""
    y = _as_features(Y_s, "Y_s")
    f = _as_features(F_t, "F_t")
    if y.shape[1] != f.shape[1]:
        raise DataError(
            f"label dimensions differ: {y.shape[1]} vs {f.shape[1]}"
        )
    return ops.sqdist_matrix(y, f)


def hinge_label_loss(class_idx, scores) -> np.ndarray:
    """One-vs-all squared hinge loss between source classes and scores.

    Entry (i, j) = sum_k max(0, 1 - s_ik * F_jk)^2 with s_ik = +1 when
    class(i) = k and -1 otherwise; F is the N_t x K score matrix.
    """
    y = np.asarray(class_idx)
    if y.ndim != 1 or y.shape[0] < 1:
        raise DataError("class indices must be a non-empty 1-D array")
    if not np.issubdtype(y.dtype, np.integer):
        yf = np.asarray(class_idx, dtype=np.float64)
        if not np.all(yf == np.floor(yf)):
            raise DataError("class indices must be integers")
        y = yf.astype(np.int64)
    F = np.ascontiguousarray(scores, dtype=np.float64)
    if F.ndim != 2:
        raise DataError("scores must be a 2-D (N_t, K) array")
    if not np.all(np.isfinite(F)):
        raise DataError("scores contain non-finite values")
    n_classes = F.shape[1]
    if np.any(y < 0) or np.any(y >= n_classes):
        raise DataError(f"class indices must lie in [0, {n_classes})")
    pos = np.maximum(0.0, 1.0 - F) ** 2
    neg = np.maximum(0.0, 1.0 + F) ** 2
    # per target j: sum_k neg_jk, minus the own-class neg, plus its pos
    neg_sum = neg.sum(axis=1)
    return neg_sum[None, :] + (pos - neg)[:, y].T


def assemble_joint_cost(dist, Y_s, F_t, cfg: JointCostConfig) -> CostMatrix:
    """Build C_ij = alpha * dist_ij + L(y_i_src, f(x_j_tgt))."""
    d = np.ascontiguousarray(dist, dtype=np.float64)
    if d.ndim != 2:
        raise DataError("distance matrix must be 2-D")
    if cfg.loss == "squared":
        L = squared_label_loss(Y_s, F_t)
    else:
        L = hinge_label_loss(Y_s, F_t)
    if L.shape != d.shape:
        raise DataError(
            f"label loss shape {L.shape} does not match distances {d.shape}"
        )
    return CostMatrix.from_values(cfg.alpha * d + L)
