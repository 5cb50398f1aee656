"""Discrete optimal transport between two uniform empirical measures.

Exact solves go through a transportation-simplex kernel with a fixed
deterministic pivot rule, so degenerate optima are reproducible;
entropic solves run log-domain Sinkhorn sweeps. Only uniform marginals
(1/N_s rows, 1/N_t columns) are supported.
"""

from dataclasses import dataclass

import numpy as np

from .accel import ops
from .errors import DataError, SolverError


@dataclass
class CostMatrix:
    """Dense non-negative cost grid between source and target samples."""

    values: np.ndarray
    n_source: int
    n_target: int

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DataError("cost matrix must be 2-D")
        ns, nt = self.values.shape
        if ns < 1 or nt < 1:
            raise DataError("cost matrix must be non-empty")
        if (ns, nt) != (self.n_source, self.n_target):
            raise DataError(
                f"cost shape {self.values.shape} does not match declared "
                f"counts ({self.n_source}, {self.n_target})"
            )
        if not np.all(np.isfinite(self.values)):
            raise DataError("cost matrix contains non-finite entries")
        if np.any(self.values < 0.0):
            raise DataError("cost matrix contains negative entries")

    @classmethod
    def from_values(cls, values) -> "CostMatrix":
        arr = np.ascontiguousarray(values, dtype=np.float64)
        if arr.ndim != 2:
            raise DataError("cost matrix must be 2-D")
        return cls(arr, arr.shape[0], arr.shape[1])


@dataclass
class TransportPlan:
    """Coupling between uniform marginals with its linear objective.

    ``objective`` is always the linear transport cost <coupling, C> of the
    solved instance, also for entropic solves (the entropy term is not
    included). ``converged`` is False when an entropic solve stopped at
    its iteration budget with ``marginal_error`` above tolerance; such
    plans are returned flagged rather than raising.
    """

    coupling: np.ndarray
    objective: float
    method: str = "exact"
    n_iter: int = 0
    marginal_error: float = 0.0
    converged: bool = True

    def __post_init__(self):
        self.coupling = np.ascontiguousarray(self.coupling, dtype=np.float64)
        if self.coupling.ndim != 2:
            raise DataError("coupling must be 2-D")
        if not np.all(np.isfinite(self.coupling)):
            raise DataError("coupling contains non-finite entries")
        if np.any(self.coupling < 0.0):
            raise DataError("coupling contains negative entries")
        self.objective = float(self.objective)

    @property
    def n_source(self) -> int:
        return self.coupling.shape[0]

    @property
    def n_target(self) -> int:
        return self.coupling.shape[1]


def _as_cost(cost) -> CostMatrix:
    if isinstance(cost, CostMatrix):
        return cost
    return CostMatrix.from_values(cost)


def default_max_pivots(ns: int, nt: int) -> int:
    """Pivot budget; generous next to the typical O((ns+nt)^2 / 4) count."""
    return 50 * (ns + nt) ** 2 + 5000


def solve_exact(cost, max_pivots: int | None = None) -> TransportPlan:
    """Minimize <coupling, C> over couplings of uniform marginals, exactly.

    Deterministic for a fixed input: the simplex kernel uses a fixed
    entering/leaving pivot rule, so whichever optimal vertex it lands on
    is reproducible. Raises SolverError if the pivot budget is exhausted.
    """
    c = _as_cost(cost)
    ns, nt = c.n_source, c.n_target
    if max_pivots is None:
        max_pivots = default_max_pivots(ns, nt)
    plan, _u, _v, n_pivots, status = ops.solve_uniform_transport(
        c.values, np.int64(max_pivots)
    )
    if status != 0:
        raise SolverError(
            f"transport simplex exceeded its pivot budget ({max_pivots}) "
            f"on a {ns}x{nt} instance"
        )
    objective = float(np.sum(plan * c.values))
    result = TransportPlan(
        coupling=plan,
        objective=objective,
        method="exact",
        n_iter=int(n_pivots),
        converged=True,
    )
    row_err, col_err = marginal_violation(result)
    result.marginal_error = max(row_err, col_err)
    if result.marginal_error > 1e-9:
        raise SolverError(
            f"exact plan violates marginals by {result.marginal_error:.3e}"
        )
    return result


def solve_entropic(
    cost, epsilon: float, max_iter: int = 10000, tol: float = 1e-6
) -> TransportPlan:
    """Entropy-regularized transport via log-domain Sinkhorn iterations.

    Minimizes <coupling, C> + epsilon * sum(coupling * log(coupling)) up
    to marginal tolerance ``tol``; the stabilized potential updates keep
    epsilon down to 1e-3 * max(C) finite. Non-convergence after
    ``max_iter`` is flagged on the returned plan, not raised.
    """
    c = _as_cost(cost)
    if not np.isfinite(epsilon) or epsilon <= 0.0:
        raise DataError("epsilon must be a positive finite real")
    if max_iter < 1:
        raise DataError("max_iter must be >= 1")
    if tol <= 0.0:
        raise DataError("tol must be positive")
    ns, nt = c.n_source, c.n_target
    a = np.full(ns, 1.0 / ns, dtype=np.float64)
    b = np.full(nt, 1.0 / nt, dtype=np.float64)
    plan, err, n_iter = ops.sinkhorn_log(
        c.values, a, b, float(epsilon), float(tol), np.int64(max_iter)
    )
    objective = float(np.sum(plan * c.values))
    return TransportPlan(
        coupling=plan,
        objective=objective,
        method="entropic",
        n_iter=int(n_iter),
        marginal_error=float(err),
        converged=bool(err < tol),
    )


def marginal_violation(plan: TransportPlan) -> tuple[float, float]:
    """Max absolute deviation of row sums from 1/N_s and column sums from 1/N_t."""
    coupling = plan.coupling
    ns, nt = coupling.shape
    row_err = float(np.max(np.abs(coupling.sum(axis=1) - 1.0 / ns)))
    col_err = float(np.max(np.abs(coupling.sum(axis=0) - 1.0 / nt)))
    return row_err, col_err
