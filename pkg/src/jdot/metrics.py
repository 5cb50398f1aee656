"""Evaluation metrics for adapted models."""

import numpy as np

from .errors import DataError


def mse(y_true, y_pred) -> float:
    """Mean squared error; multi-output targets average over all entries."""
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if p.ndim == 1:
        p = p.reshape(-1, 1)
    if t.shape != p.shape:
        raise DataError(f"shape mismatch: {t.shape} vs {p.shape}")
    return float(np.mean((t - p) ** 2))


def accuracy(y_true, y_pred) -> float:
    """Fraction of exactly matching class labels."""
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape:
        raise DataError(f"shape mismatch: {t.shape} vs {p.shape}")
    if t.size == 0:
        raise DataError("empty label arrays")
    return float(np.mean(t == p))


def within_range_accuracy(y_true, y_pred, r: float) -> float:
    """Fraction of predictions within euclidean distance r of the truth."""
    if not np.isfinite(r) or r < 0.0:
        raise DataError("range threshold must be a non-negative real")
    t = np.asarray(y_true, dtype=np.float64)
    p = np.asarray(y_pred, dtype=np.float64)
    if t.ndim == 1:
        t = t.reshape(-1, 1)
    if p.ndim == 1:
        p = p.reshape(-1, 1)
    if t.shape != p.shape:
        raise DataError(f"shape mismatch: {t.shape} vs {p.shape}")
    dist = np.sqrt(np.sum((t - p) ** 2, axis=1))
    return float(np.mean(dist <= r))
