"""Shared fixtures and reference oracles for the test suite.

The oracles here are deliberately slow and simple: exhaustive
permutation search, a generic LP solver, and plain double loops.
Fast-path results are always checked against one of these.
"""

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from jdot.ot import CostMatrix, solve_exact, solve_entropic
from jdot.rkhs import Kernel
from jdot.learners import fit_hinge_ova, fit_krr_weighted


def rng(seed):
    return np.random.default_rng(seed)


def perm_bruteforce(C):
    """Exact square-problem optimum by enumerating all permutations."""
    n = C.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = 0.0
        for i, j in enumerate(perm):
            total += C[i, j]
        best = min(best, total / n)
    return best


def linprog_objective(C):
    """Uniform-marginal transport optimum via a generic LP solver."""
    ns, nt = C.shape
    a_eq = np.zeros((ns + nt, ns * nt))
    for i in range(ns):
        a_eq[i, i * nt : (i + 1) * nt] = 1.0
    for j in range(nt):
        a_eq[ns + j, j::nt] = 1.0
    b_eq = np.concatenate([np.full(ns, 1.0 / ns), np.full(nt, 1.0 / nt)])
    res = linprog(C.ravel(), A_eq=a_eq, b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0
    return float(res.fun)


def random_plan(ns, nt, seed):
    """A feasible uniform-marginal coupling with generic support."""
    C = rng(seed).uniform(0.0, 1.0, size=(ns, nt))
    return solve_exact(CostMatrix.from_values(C))


@pytest.fixture(scope="session", autouse=True)
def warm_backend():
    """Touch every accelerated kernel once so compile time stays out
    of the timed tests."""
    g = rng(0)
    C = CostMatrix.from_values(g.uniform(0.0, 1.0, size=(3, 4)))
    solve_exact(C)
    solve_entropic(C, epsilon=0.5, max_iter=50)
    X = g.normal(size=(5, 2))
    kern = Kernel(kind="rbf", bandwidth=0.7)
    fit_krr_weighted(X, g.normal(size=(5, 1)), kern, lam=0.1)
    P = np.full((5, 3), 1.0 / 3.0)
    fit_hinge_ova(X, P, kern, lam=0.1, max_iter=5)
    yield
