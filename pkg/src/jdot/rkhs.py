"""Kernels for the hypothesis class: linear and RBF.

The RBF convention is k(x, x') = exp(-g * ||x - x'||^2); when no
bandwidth is given it defaults to g = 1 / (2 * median pairwise squared
distance) on the fit's support inputs.
"""

from dataclasses import dataclass

import numpy as np

from .accel import ops
from .errors import DataError

KERNEL_KINDS = ("linear", "rbf")


@dataclass(frozen=True)
class Kernel:
    """Kernel family plus its RBF bandwidth.

    bandwidth None means "resolve by the median heuristic on the support
    inputs at fit time"; fitted predictors always carry a concrete value.
    """

    kind: str = "rbf"
    bandwidth: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}")
        if self.bandwidth is not None:
            if not np.isfinite(self.bandwidth) or self.bandwidth <= 0.0:
                raise DataError("bandwidth must be a positive finite real")


def median_bandwidth(X) -> float:
    """g = 1 / (2 * median of pairwise squared distances), 1.0 on degenerate data."""
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DataError("support inputs must be a non-empty 2-D array")
    n = arr.shape[0]
    if n < 2:
        return 1.0
    d = ops.sqdist_matrix(arr, arr)
    iu = np.triu_indices(n, k=1)
    med = float(np.median(d[iu]))
    if med <= 0.0:
        return 1.0
    return 1.0 / (2.0 * med)


def resolve_kernel(kernel: Kernel, X) -> Kernel:
    """Return a kernel with a concrete bandwidth for the given support."""
    if kernel.kind == "rbf" and kernel.bandwidth is None:
        return Kernel(kind="rbf", bandwidth=median_bandwidth(X))
    return kernel


def kernel_matrix(kernel: Kernel, X, Y=None) -> np.ndarray:
    """Gram matrix k(x_i, y_j); Y defaults to X."""
    xa = np.ascontiguousarray(X, dtype=np.float64)
    ya = xa if Y is None else np.ascontiguousarray(Y, dtype=np.float64)
    if xa.ndim != 2 or ya.ndim != 2:
        raise DataError("kernel inputs must be 2-D arrays")
    if xa.shape[1] != ya.shape[1]:
        raise DataError(
            f"feature dimensions differ: {xa.shape[1]} vs {ya.shape[1]}"
        )
    if kernel.kind == "linear":
        return xa @ ya.T
    if kernel.bandwidth is None:
        raise DataError("rbf kernel used without a resolved bandwidth")
    return np.exp(-kernel.bandwidth * ops.sqdist_matrix(xa, ya))
