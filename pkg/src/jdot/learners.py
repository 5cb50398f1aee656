"""Hypothesis fitting against a transport plan.

Given a coupling between source and target samples, the learning block
reduces to weighted problems over the target support: kernel ridge
regression on plan-averaged targets, or a one-vs-all squared-hinge
classifier on plan-induced class proportions. Both fits take the ridge
weight on the joint-objective scale and rescale it internally by the
support size, so each is the exact block minimizer of the alternating
objective in bcd.
"""

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .accel import ops
from .errors import DataError, SolverError
from .ot import TransportPlan
from .rkhs import Kernel, kernel_matrix, resolve_kernel

TASKS = ("regression", "classification-ova")


@dataclass
class Predictor:
    """Kernel expansion over its support points.

    Predictions are f(x) = sum_j coefficients_j * k(x, x_j) + intercept,
    vector-valued for regression (m outputs) or K one-vs-all score
    components for classification. ``fit_info`` carries transient solver
    diagnostics and is not serialized.
    """

    kernel: Kernel
    support_points: np.ndarray
    coefficients: np.ndarray
    intercept: np.ndarray
    task: str = "regression"
    fit_info: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        self.support_points = np.ascontiguousarray(
            self.support_points, dtype=np.float64
        )
        self.coefficients = np.ascontiguousarray(
            self.coefficients, dtype=np.float64
        )
        self.intercept = np.ascontiguousarray(self.intercept, dtype=np.float64)
        if self.task not in TASKS:
            raise DataError(f"unknown task {self.task!r}")
        if self.support_points.ndim != 2 or self.coefficients.ndim != 2:
            raise DataError("support points and coefficients must be 2-D")
        if self.coefficients.shape[0] != self.support_points.shape[0]:
            raise DataError("one coefficient row per support point required")
        if self.intercept.shape != (self.coefficients.shape[1],):
            raise DataError("intercept length must match the output count")

    @property
    def n_outputs(self) -> int:
        return self.coefficients.shape[1]


@dataclass
class TransportedTargets:
    """Plan-averaged regression targets for each target sample."""

    y_hat: np.ndarray

    def __post_init__(self):
        self.y_hat = np.ascontiguousarray(self.y_hat, dtype=np.float64)
        if self.y_hat.ndim == 1:
            self.y_hat = self.y_hat.reshape(-1, 1)
        if not np.all(np.isfinite(self.y_hat)):
            raise DataError("transported targets contain non-finite values")


@dataclass
class TransportedProportions:
    """Plan-induced class distribution for each target sample."""

    p_hat: np.ndarray

    def __post_init__(self):
        self.p_hat = np.ascontiguousarray(self.p_hat, dtype=np.float64)
        if self.p_hat.ndim != 2:
            raise DataError("proportions must be 2-D (N_t, K)")
        if not np.all(np.isfinite(self.p_hat)):
            raise DataError("proportions contain non-finite values")


def transported_targets(plan: TransportPlan, Y_s) -> TransportedTargets:
    """y_hat_j = N_t * sum_i coupling_ij * y_i_src.

    With column sums equal to 1/N_t each transported target is a convex
    combination of the source labels.
    """
    y = np.ascontiguousarray(Y_s, dtype=np.float64)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    if y.shape[0] != plan.n_source:
        raise DataError(
            f"label count {y.shape[0]} does not match plan rows {plan.n_source}"
        )
    y_hat = plan.n_target * (plan.coupling.T @ y)
    return TransportedTargets(y_hat=y_hat)


def transported_proportions(
    plan: TransportPlan, class_idx, n_classes: int
) -> TransportedProportions:
    """p_hat = N_t * coupling' * onehot(class_idx), rows renormalized to 1.

    The renormalization is a no-op (float noise level) for feasible exact
    plans; for entropic plans with marginal violations up to their
    tolerance it projects each row back onto the simplex scale.
    """
    y = np.asarray(class_idx)
    if y.ndim != 1 or y.shape[0] != plan.n_source:
        raise DataError("class indices must be 1-D with one entry per source row")
    if n_classes < 1:
        raise DataError("n_classes must be >= 1")
    yi = y.astype(np.int64)
    if np.any(yi < 0) or np.any(yi >= n_classes):
        raise DataError(f"class indices must lie in [0, {n_classes})")
    onehot = np.zeros((plan.n_source, n_classes), dtype=np.float64)
    onehot[np.arange(plan.n_source), yi] = 1.0
    p_hat = plan.n_target * (plan.coupling.T @ onehot)
    row_sums = p_hat.sum(axis=1)
    if np.any(row_sums <= 0.0):
        raise DataError("plan has an all-zero column; proportions undefined")
    p_hat /= row_sums[:, None]
    return TransportedProportions(p_hat=p_hat)


def _as_support(X) -> np.ndarray:
    arr = np.ascontiguousarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise DataError("support inputs must be a non-empty 2-D array")
    if not np.all(np.isfinite(arr)):
        raise DataError("support inputs contain non-finite values")
    return arr


def fit_krr_weighted(
    X_t, targets, kernel: Kernel, lam: float
) -> Predictor:
    """Kernel ridge fit on transported targets.

    Solves the stationarity system (K + N_t * lam * I) a = y_hat by
    Cholesky factorization, with one refinement step if needed; the
    relative residual of the system is kept below 1e-8 or a SolverError
    carrying a condition estimate is raised. No intercept is fitted.
    """
    x = _as_support(X_t)
    if isinstance(targets, TransportedTargets):
        y = targets.y_hat
    else:
        y = TransportedTargets(y_hat=targets).y_hat
    if y.shape[0] != x.shape[0]:
        raise DataError(
            f"target count {y.shape[0]} does not match support size {x.shape[0]}"
        )
    if not np.isfinite(lam) or lam <= 0.0:
        raise DataError("lam must be a positive finite real")
    kern = resolve_kernel(kernel, x)
    K = kernel_matrix(kern, x)
    n = x.shape[0]
    system = K + (n * lam) * np.eye(n)
    try:
        cho = scipy.linalg.cho_factor(system, lower=True)
        a = scipy.linalg.cho_solve(cho, y)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "ridge system is not positive definite at solver precision",
            condition_estimate=float(np.linalg.cond(system)),
        ) from exc
    y_norm = float(np.linalg.norm(y))
    denom = y_norm if y_norm > 0.0 else 1.0
    residual = y - system @ a
    rel = float(np.linalg.norm(residual)) / denom
    if rel > 1e-10:
        a = a + scipy.linalg.cho_solve(cho, residual)
        residual = y - system @ a
        rel = float(np.linalg.norm(residual)) / denom
    if rel > 1e-8:
        raise SolverError(
            f"ridge solve residual {rel:.3e} exceeds 1e-8",
            condition_estimate=float(np.linalg.cond(system)),
        )
    return Predictor(
        kernel=kern,
        support_points=x.copy(),
        coefficients=a,
        intercept=np.zeros(y.shape[1], dtype=np.float64),
        task="regression",
        fit_info={"residual": rel, "converged": True},
    )


def hinge_objective(K, P, lam, A, b) -> float:
    """Weighted one-vs-all squared-hinge objective at coefficients (A, b).

    J = sum_jk [P_jk * max(0, 1 - S_jk)^2 + (1 - P_jk) * max(0, 1 + S_jk)^2]
    + lam * sum_k a_k' K a_k with scores S = K A + 1 b'; lam here is the
    explicit ridge weight of this expression (callers working on the
    joint-objective scale multiply by the support size first).
    """
    return float(
        ops.hinge_objective(
            np.ascontiguousarray(K, dtype=np.float64),
            np.ascontiguousarray(P, dtype=np.float64),
            float(lam),
            np.ascontiguousarray(A, dtype=np.float64),
            np.ascontiguousarray(b, dtype=np.float64),
        )
    )


def hinge_gradient(K, P, lam, A, b, fit_intercept: bool = True):
    """Analytic gradient of ``hinge_objective`` w.r.t. (A, b)."""
    gA, gb = ops.hinge_gradient(
        np.ascontiguousarray(K, dtype=np.float64),
        np.ascontiguousarray(P, dtype=np.float64),
        float(lam),
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        fit_intercept,
    )
    return gA, gb


def fit_hinge_ova(
    X_t,
    props,
    kernel: Kernel,
    lam: float,
    tol: float = 1e-6,
    max_iter: int = 5000,
    fit_intercept: bool = False,
    warm_start: Predictor | None = None,
) -> Predictor:
    """One-vs-all squared-hinge kernel classifier on transported proportions.

    Full-batch descent with backtracking line search on the smooth
    squared-hinge objective; stops when the gradient norm falls below
    tol * (1 + |objective|). A fit that exhausts max_iter is returned
    flagged (fit_info["converged"] = False), not raised. ``warm_start``
    reuses the coefficients of a previous predictor on the same support.
    """
    x = _as_support(X_t)
    if isinstance(props, TransportedProportions):
        P = props.p_hat
    else:
        P = TransportedProportions(p_hat=props).p_hat
    n, n_classes = P.shape
    if n != x.shape[0]:
        raise DataError(
            f"proportion rows {n} do not match support size {x.shape[0]}"
        )
    if np.any(P < 0.0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-6):
        raise DataError("proportions must be non-negative rows summing to 1")
    if not np.isfinite(lam) or lam <= 0.0:
        raise DataError("lam must be a positive finite real")
    kern = resolve_kernel(kernel, x)
    K = kernel_matrix(kern, x)
    A0 = np.zeros((n, n_classes), dtype=np.float64)
    b0 = np.zeros(n_classes, dtype=np.float64)
    if warm_start is not None:
        same_shape = warm_start.coefficients.shape == (n, n_classes)
        if same_shape and np.array_equal(warm_start.support_points, x):
            A0 = warm_start.coefficients.copy()
            b0 = warm_start.intercept.copy()
    A, b, n_iter, grad_norm, objective, status = ops.hinge_descent(
        K,
        np.ascontiguousarray(P),
        float(n * lam),
        float(tol),
        np.int64(max_iter),
        A0,
        b0,
        fit_intercept,
    )
    return Predictor(
        kernel=kern,
        support_points=x.copy(),
        coefficients=A,
        intercept=b,
        task="classification-ova",
        fit_info={
            "converged": status in (0, 2),
            "status": int(status),
            "n_iter": int(n_iter),
            "grad_norm": float(grad_norm),
            "objective": float(objective),
        },
    )


def decision_scores(model: Predictor, X) -> np.ndarray:
    """Raw outputs f(x): (n, m) predictions or (n, K) one-vs-all scores."""
    x = np.ascontiguousarray(X, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    if x.shape[1] != model.support_points.shape[1]:
        raise DataError(
            f"feature dimension {x.shape[1]} does not match the model's "
            f"{model.support_points.shape[1]}"
        )
    Kx = kernel_matrix(model.kernel, x, model.support_points)
    return Kx @ model.coefficients + model.intercept[None, :]


def predict(model: Predictor, X) -> np.ndarray:
    """Predictions: (n, m) reals for regression, class indices otherwise.

    Classification returns argmax over the K scores; ties go to the
    lowest class index.
    """
    scores = decision_scores(model, X)
    if model.task == "classification-ova":
        return np.argmax(scores, axis=1)
    return scores


def rkhs_norm_sq(model: Predictor) -> float:
    """sum_k a_k' K a_k on the model's own support."""
    K = kernel_matrix(model.kernel, model.support_points)
    return float(np.sum(model.coefficients * (K @ model.coefficients)))


def to_json_dict(model: Predictor) -> dict:
    """JSON-ready form: kernel, support points, coefficients, intercept, task."""
    return {
        "task": model.task,
        "kernel": {
            "kind": model.kernel.kind,
            "bandwidth": model.kernel.bandwidth,
        },
        "support_points": model.support_points.tolist(),
        "coefficients": model.coefficients.tolist(),
        "intercept": model.intercept.tolist(),
    }


def from_json_dict(payload: dict) -> Predictor:
    try:
        kernel = Kernel(
            kind=payload["kernel"]["kind"],
            bandwidth=payload["kernel"]["bandwidth"],
        )
        return Predictor(
            kernel=kernel,
            support_points=np.asarray(payload["support_points"], dtype=np.float64),
            coefficients=np.asarray(payload["coefficients"], dtype=np.float64),
            intercept=np.asarray(payload["intercept"], dtype=np.float64),
            task=payload["task"],
        )
    except KeyError as exc:
        raise DataError(f"predictor payload missing field {exc}") from exc


def save_predictor(model: Predictor, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(to_json_dict(model), fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_predictor(path) -> Predictor:
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc}") from exc
    with fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON: {exc}") from exc
    return from_json_dict(payload)
