"""End-to-end acceptance gate.

Ten criteria, each printed as a PASS/FAIL line with its measured
numbers. Run with ``pytest tests/test_acceptance.py -v -s`` to see the
lines as they complete.
"""

import json
import math
import time

import numpy as np
from conftest import perm_bruteforce, rng

from jdot.bcd import JdotConfig, jdot_fit
from jdot.cli import main
from jdot.cost import feature_distance_matrix, heuristic_alpha
from jdot.datasets import gen_1d_regression_shift, gen_rotated_gaussians
from jdot.learners import (
    fit_krr_weighted,
    hinge_gradient,
    hinge_objective,
    predict,
)
from jdot.metrics import accuracy, mse
from jdot.ot import CostMatrix, marginal_violation, solve_entropic, solve_exact
from jdot.rkhs import Kernel, kernel_matrix, resolve_kernel


def report(number, ok, detail):
    line = f"ACCEPTANCE {number}: {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def test_criterion_01_exact_transport_matches_bruteforce():
    g = rng(1001)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(g.integers(2, 7))
        C = g.uniform(0.0, 10.0, size=(n, n))
        plan = solve_exact(CostMatrix.from_values(C))
        worst = max(worst, abs(plan.objective - perm_bruteforce(C)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and elapsed < 5.0
    report(
        1,
        ok,
        f"200 square instances, max |objective - brute force| = "
        f"{worst:.2e} (tol 1e-9), runtime {elapsed:.2f}s (< 5s)",
    )


def test_criterion_02_all_plans_meet_marginals():
    g = rng(1002)
    worst_exact = 0.0
    worst_entropic = 0.0
    n_plans = 0
    for _ in range(60):
        ns, nt = int(g.integers(2, 9)), int(g.integers(2, 9))
        C = CostMatrix.from_values(g.uniform(0.0, 4.0, size=(ns, nt)))
        p = solve_exact(C)
        worst_exact = max(worst_exact, *marginal_violation(p))
        n_plans += 1
    for _ in range(20):
        ns, nt = int(g.integers(2, 7)), int(g.integers(2, 7))
        C = CostMatrix.from_values(g.uniform(0.0, 2.0, size=(ns, nt)))
        p = solve_entropic(C, epsilon=0.1, tol=1e-6, max_iter=100000)
        violation = max(marginal_violation(p))
        assert p.converged
        worst_entropic = max(worst_entropic, violation)
        n_plans += 1
    ok = worst_exact <= 1e-9 and worst_entropic <= 1e-6
    report(
        2,
        ok,
        f"{n_plans} plans, worst exact violation {worst_exact:.2e} "
        f"(tol 1e-9), worst entropic violation {worst_entropic:.2e} "
        f"(declared tol 1e-6)",
    )


def test_criterion_03_entropic_antidiagonal():
    C = CostMatrix.from_values([[1.0, 0.0], [0.0, 1.0]])
    exact = solve_exact(C)
    plan = solve_entropic(C, epsilon=1e-3)
    gap = abs(plan.objective - 0.0)
    ok = gap <= 1e-2 and plan.objective >= exact.objective - 1e-15
    report(
        3,
        ok,
        f"2x2 antidiagonal, entropic objective {plan.objective:.3e} "
        f"(within 1e-2 of 0, >= exact {exact.objective:.1e})",
    )


def test_criterion_04_krr_stationarity():
    g = rng(1004)
    worst = 0.0
    for trial in range(100):
        n = int(g.integers(2, 50))
        d = int(g.integers(1, 5))
        X = g.normal(size=(n, d)) * g.uniform(0.1, 3.0)
        y_hat = g.normal(size=(n, 1)) * g.uniform(0.1, 5.0)
        kern = (
            Kernel(kind="linear")
            if trial % 4 == 0
            else resolve_kernel(Kernel(kind="rbf"), X)
        )
        lam = float(g.uniform(1e-4, 1.0))
        model = fit_krr_weighted(X, y_hat, kern, lam=lam)
        K = kernel_matrix(model.kernel, X)
        lhs = (K + n * lam * np.eye(n)) @ model.coefficients
        rel = float(
            np.linalg.norm(lhs - y_hat) / max(np.linalg.norm(y_hat), 1e-300)
        )
        worst = max(worst, rel)
    ok = worst <= 1e-8
    report(
        4,
        ok,
        f"100 weighted ridge fits, worst normal-equation residual "
        f"{worst:.2e} (tol 1e-8)",
    )


def test_criterion_05_hinge_gradient_finite_differences():
    g = rng(1005)
    step = 1e-5
    worst = 0.0
    for _ in range(20):
        n = int(g.integers(4, 20))
        K_cls = int(g.integers(2, 5))
        X = g.normal(size=(n, 2))
        P = g.uniform(0.01, 1.0, size=(n, K_cls))
        P /= P.sum(axis=1, keepdims=True)
        lam = float(g.uniform(0.01, 0.5))
        kern = resolve_kernel(Kernel(kind="rbf"), X)
        K = kernel_matrix(kern, X)
        A = g.normal(size=(n, K_cls))
        b = g.normal(size=K_cls)
        gA, gb = hinge_gradient(K, P, lam, A, b, fit_intercept=True)
        for _ in range(20):
            i = int(g.integers(0, n))
            k = int(g.integers(0, K_cls))
            up, dn = A.copy(), A.copy()
            up[i, k] += step
            dn[i, k] -= step
            fd = (
                hinge_objective(K, P, lam, up, b)
                - hinge_objective(K, P, lam, dn, b)
            ) / (2.0 * step)
            rel = abs(fd - gA[i, k]) / max(abs(fd), abs(gA[i, k]), 1.0)
            worst = max(worst, rel)
    ok = worst <= 1e-5
    report(
        5,
        ok,
        f"20 instances x 20 coordinates, worst |analytic - central "
        f"difference| = {worst:.2e} relative (tol 1e-5, step {step})",
    )


def test_criterion_06_bcd_descent_on_regression_toys():
    worst = -np.inf
    for seed in range(1, 51):
        src, tgt = gen_1d_regression_shift(40, seed=seed)
        cfg = JdotConfig(task="regression", max_iter=8)
        trace = jdot_fit(src, tgt.X, cfg)
        objs = [s.objective for s in trace.iterations]
        for prev, nxt in zip(objs, objs[1:]):
            rise = (nxt - prev) / (1.0 + abs(prev))
            worst = max(worst, rise)
    ok = worst <= 1e-8
    report(
        6,
        ok,
        f"50 seeded regression runs, worst normalized half-step rise "
        f"{worst:.2e} (tol 1e-8)",
    )


def test_criterion_07_toy_classification_gains():
    t0 = time.perf_counter()
    seeds = (1, 2, 3, 4, 5)
    strong_alphas = (0.5, 1.0, 10.0)
    rotation = math.pi / 4.0
    min_gain = np.inf
    strong_finals = []
    weak_finals = []
    max_converged_at = 0
    for seed in seeds:
        src, tgt = gen_rotated_gaussians(40, rotation, seed=seed)
        base_model = None
        for alpha in strong_alphas + (0.1,):
            cfg = JdotConfig(
                task="classification", alpha=alpha, max_iter=15, rel_tol=1e-5
            )
            trace = jdot_fit(src, tgt.X, cfg)
            if base_model is None:
                base_model = trace.initial_model
                base_acc = accuracy(tgt.y, predict(base_model, tgt.X))
            final = accuracy(tgt.y, predict(trace.final_model, tgt.X))
            if alpha == 0.1:
                weak_finals.append(final)
            else:
                strong_finals.append(final)
                min_gain = min(min_gain, final - base_acc)
                assert trace.converged, f"no settle within 15 (seed {seed})"
                max_converged_at = max(max_converged_at, trace.converged_at)
    elapsed = time.perf_counter() - t0
    strong_mean = float(np.mean(strong_finals))
    weak_mean = float(np.mean(weak_finals))
    ok = (
        min_gain >= 0.10
        and strong_mean >= weak_mean
        and elapsed < 30.0
    )
    report(
        7,
        ok,
        f"seeds 1-5: min gain over baseline {min_gain:+.3f} (needs >= "
        f"+0.10 each run), mean final accuracy alpha in {{0.5,1,10}} = "
        f"{strong_mean:.3f} >= alpha=0.1 mean {weak_mean:.3f}, all runs "
        f"settled within 15 iterations (max {max_converged_at}), "
        f"runtime {elapsed:.1f}s (< 30s)",
    )


def test_criterion_08_toy_regression_beats_baseline():
    wins = 0
    pairs = []
    for seed in (1, 2, 3, 4, 5):
        src, tgt = gen_1d_regression_shift(120, seed=seed)
        cfg = JdotConfig(task="regression", max_iter=10)
        trace = jdot_fit(src, tgt.X, cfg)
        base = mse(tgt.y, predict(trace.initial_model, tgt.X))
        final = mse(tgt.y, predict(trace.final_model, tgt.X))
        wins += int(final < base)
        pairs.append((base, final))
    ok = wins == 5
    detail = ", ".join(f"{b:.3f}->{f:.3f}" for b, f in pairs)
    report(8, ok, f"shifted 1-D toys, target MSE baseline->adapted: {detail} ({wins}/5 wins)")


def test_criterion_09_heuristic_alpha_oracle():
    worst = 0.0
    checked = 0
    for seed in (1, 2, 3):
        for kind in ("classification", "regression"):
            if kind == "classification":
                src, tgt = gen_rotated_gaussians(25, math.pi / 4.0, seed=seed)
            else:
                src, tgt = gen_1d_regression_shift(60, seed=seed)
            dist = feature_distance_matrix(src.X, tgt.X)
            biggest = 0.0
            for i in range(dist.shape[0]):
                for j in range(dist.shape[1]):
                    biggest = max(biggest, dist[i, j])
            got = heuristic_alpha(dist)
            resolved = jdot_fit(
                src, tgt.X, JdotConfig(task=kind, max_iter=1)
            ).resolved["alpha"]
            worst = max(worst, abs(got - 1.0 / biggest))
            worst = max(worst, abs(resolved - 1.0 / biggest))
            checked += 1
    ok = worst <= 1e-12
    report(
        9,
        ok,
        f"{checked} toy datasets, max |alpha - 1/max distance| = "
        f"{worst:.2e} (tol 1e-12, loop oracle)",
    )


def test_criterion_10_toy_reports_byte_identical(tmp_path):
    args = [
        "toy",
        "rotated-gaussians",
        "--alpha",
        "0.5,1",
        "--n-per-class",
        "10",
        "--iters",
        "5",
        "--seed",
        "7",
    ]
    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0

    def canonical_bytes(path):
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        payload.pop("timing")  # wall time is the only timestamp-like field
        return json.dumps(payload, sort_keys=True, indent=2).encode()

    b1 = canonical_bytes(out1 / "report.json")
    b2 = canonical_bytes(out2 / "report.json")
    same_series = (out1 / "series.csv").read_bytes() == (
        out2 / "series.csv"
    ).read_bytes()
    ok = b1 == b2 and same_series
    report(
        10,
        ok,
        f"two identical toy invocations: reports byte-identical after "
        f"dropping wall time ({len(b1)} bytes), series files "
        f"{'identical' if same_series else 'DIFFER'}",
    )
