"""Acceptance criteria, one test each.

Every test prints a single ``PASS``/``FAIL`` line with the measured numbers;
the lines are also collected and repeated in the pytest terminal summary.
Run directly (``python3 tests/test_acceptance.py``) to get just the lines.
"""

import math
import time

import numpy as np
import pytest

from entropic_sdot import (
    Atoms,
    build_diagram,
    case_study_subopt,
    cell_masses,
    conditional,
    cost,
    diagnostics,
    dual_gap,
    entropy,
    facet_weights,
    fit_rate,
    kl_and_entropic_cost,
    load_scenario,
    make_density,
    phi,
    run_sweep,
    sinkhorn_solve,
    solve_unregularized,
    suboptimality,
)
from entropic_sdot.identities import identity_suite
from entropic_sdot.oracle import DiscreteProblem, dense_sinkhorn, discretize

GAUSSIAN_CONSTANT = math.pi**2 / (24 * math.sqrt(2 * math.pi))
LAPLACE_CONSTANT = math.pi**2 / 48
SQUARE_CONSTANT = math.pi**2 / 6

RESULTS = []
_CACHE = {}


def report(number, passed, detail):
    line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}: {detail}"
    RESULTS.append(line)
    print(line)
    return passed


def _sweep(name, etas=None):
    key = (name, tuple(etas) if etas else None)
    if key not in _CACHE:
        sc = load_scenario(name)
        t0 = time.perf_counter()
        rows = run_sweep(sc.problem, etas or sc.etas, spec=sc.quadrature)
        _CACHE[key] = (rows, time.perf_counter() - t0)
    return _CACHE[key]


def _row(rows, eta):
    return next(r for r in rows if r.eta == eta)


# ---------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    checks = [c for c in identity_suite() if c.name.startswith("Li2(-")]
    elapsed = time.perf_counter() - t0
    worst = max(abs(c.residual) for c in checks[1:])
    ok = all(c.passed for c in checks) and elapsed < 1.0
    return ok, (f"|Li2(-1) + pi^2/12| = {abs(checks[0].residual):.1e}, "
                f"max inversion residual = {worst:.1e}, {elapsed:.2f} s")


def criterion_2():
    t0 = time.perf_counter()
    checks = [c for c in identity_suite() if c.name.startswith("int ")]
    elapsed = time.perf_counter() - t0
    ok = len(checks) == 6 and all(c.passed for c in checks) and elapsed < 1.0
    return ok, f"max |integral + Li2(-1/c)| = {max(abs(c.residual) for c in checks):.1e}, {elapsed:.2f} s"


def criterion_3():
    rows, elapsed = _sweep("fig1a_gaussian")
    scaled = _row(rows, 1024.0).suboptimality_scaled
    rel = abs(scaled / GAUSSIAN_CONSTANT - 1)
    tail = [r.suboptimality_scaled for r in rows if r.eta >= 64]
    change = max(abs(b / a - 1) for a, b in zip(tail, tail[1:]))
    ok = rel <= 0.02 and change < 0.05 and elapsed < 60
    return ok, (f"eta^2 subopt(1024) = {scaled:.6f} vs {GAUSSIAN_CONSTANT:.6f} (rel {rel:.1e}), "
                f"max successive change {change:.1e}, {elapsed:.1f} s")


def criterion_4():
    rows, elapsed = _sweep("fig1b_laplace")
    scaled = _row(rows, 1024.0).suboptimality_scaled
    rel = abs(scaled / LAPLACE_CONSTANT - 1)
    ok = rel <= 0.02 and elapsed < 60
    return ok, f"eta^2 subopt(1024) = {scaled:.6f} vs {LAPLACE_CONSTANT:.6f} (rel {rel:.1e}), {elapsed:.1f} s"


def criterion_5():
    sc = load_scenario("uniform_symmetric")
    dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
    worst = 0.0
    for eta in (8.0, 32.0, 128.0):
        pipeline = suboptimality(sinkhorn_solve(dual, eta, spec=sc.quadrature))
        closed = case_study_subopt(sc.density, eta, sc.quadrature)
        worst = max(worst, abs(pipeline / closed - 1))
    return worst <= 1e-3, f"max relative gap to the closed form over eta in {{8, 32, 128}}: {worst:.1e}"


def criterion_6():
    sc = load_scenario("uniform_symmetric")
    dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
    eta = 1024.0
    sol = sinkhorn_solve(dual, eta, spec=sc.quadrature)
    h = entropy(sc.atoms.weights)
    ent_nu = sol.entropic_cost_nu()
    first = eta * (ent_nu - dual.w2_squared)
    second = eta**2 * (dual.w2_squared + h / eta - ent_nu)
    r1 = abs(first / math.log(2) - 1)
    r2 = abs(second / LAPLACE_CONSTANT - 1)
    ok = r1 <= 0.02 and r2 <= 0.10
    return ok, (f"eta (ent_nu - W2^2) = {first:.6f} vs log 2 (rel {r1:.1e}); "
                f"eta^2 (W2^2 + H/eta - ent_nu) = {second:.6f} vs {LAPLACE_CONSTANT:.6f} (rel {r2:.1e})")


def criterion_7():
    sc = load_scenario("uniform_asymmetric")
    dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
    etas = (8.0, 32.0, 128.0, 512.0)
    # independent solves from g*: a warm start would only inject the previous eta's rounding
    gaps = [dual_gap(sinkhorn_solve(dual, eta, spec=sc.quadrature))[1] for eta in etas]
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = decreasing and gaps[-1] <= 0.05
    seq = ", ".join(f"{g:.2e}" for g in gaps)
    return ok, (f"eta |g_eta - g*|_inf over eta = 8, 32, 128, 512: [{seq}]; "
                f"strictly decreasing: {decreasing}, final <= 0.05: {gaps[-1] <= 0.05}")


def criterion_8():
    worst_identity = 0.0
    limits = []
    for name, constant in (("fig1a_gaussian", GAUSSIAN_CONSTANT), ("fig1b_laplace", LAPLACE_CONSTANT),
                           ("uniform_symmetric", LAPLACE_CONSTANT)):
        rows, _ = _sweep(name)
        for r in rows:
            # phi() already enforces the identity; recompute the residual for the report
            resid = abs(r.phi - r.eta * (r.w2_squared - r.entropic_cost)) / max(1.0, abs(r.phi))
            worst_identity = max(worst_identity, resid)
        limits.append(abs(_row(rows, 1024.0).phi_scaled / constant - 1))
    ok = worst_identity <= 1e-6 and max(limits) <= 0.10
    return ok, (f"max relative identity residual {worst_identity:.1e} over three sweeps; "
                f"max |eta Phi(1024) / C - 1| = {max(limits):.1e}")


def criterion_9():
    etas = [2.0**k for k in range(5, 11)]
    power_rows, _ = _sweep("powerlaw_p05")
    gauss_rows, _ = _sweep("fig1a_gaussian")
    p_slope = fit_rate([r for r in power_rows if r.eta in etas], eta_min=32)[0]
    g_slope = fit_rate([r for r in gauss_rows if r.eta in etas], eta_min=32)[0]
    ok = abs(p_slope + 1.5) <= 0.1 and abs(g_slope + 2.0) <= 0.05
    return ok, f"power-law slope {p_slope:.4f} (target -1.5 +- 0.1), gaussian slope {g_slope:.4f} (target -2 +- 0.05)"


def criterion_10():
    t0 = time.perf_counter()
    sc = load_scenario("uniform_asymmetric")
    eta = 8.0
    dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
    sol = sinkhorn_solve(dual, eta, spec=sc.quadrature)
    x, w = discretize(sc.density, 2000)
    ref = dense_sinkhorn(DiscreteProblem(x, w, sc.atoms, eta))
    elapsed = time.perf_counter() - t0
    c = cost(sol)
    rel = abs(ref.cost - c) / c
    gdiff = float(np.max(np.abs(ref.g - sol.g_eta)))
    ok = rel <= 1e-3 and gdiff <= 1e-3 and elapsed < 30
    return ok, f"cost rel diff {rel:.1e}, g sup diff {gdiff:.1e}, {elapsed:.1f} s"


def criterion_11():
    t0 = time.perf_counter()
    sc = load_scenario("square2d_two_atoms")
    dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
    sol = sinkhorn_solve(dual, 64.0, spec=sc.quadrature)
    scaled = 64.0**2 * suboptimality(sol)
    elapsed = time.perf_counter() - t0
    rel = abs(scaled / SQUARE_CONSTANT - 1)
    ok = rel <= 0.10 and elapsed < 300
    return ok, f"eta^2 subopt(64) = {scaled:.6f} vs {SQUARE_CONSTANT:.6f} (rel {rel:.1e}), {elapsed:.1f} s"


def criterion_12():
    rng = np.random.default_rng(12)
    failures = []
    square = make_density("uniform2d", polygon=[[0, 0], [1, 0], [1, 1], [0, 1]])
    gauss = make_density("gaussian", mean=0.1, sigma=0.8)
    for trial in range(6):
        if trial % 2:
            atoms = Atoms.uniform(rng.uniform(0.05, 0.95, (4, 2)))
            density, g = square, rng.uniform(-0.05, 0.05, 4)
            pts = rng.uniform(0, 1, (200, 2))
        else:
            y = np.sort(rng.uniform(-2, 2, 4)).reshape(-1, 1)
            atoms = Atoms.uniform(y)
            density, g = gauss, rng.uniform(-1, 1, 4)
            pts = rng.uniform(-6.4, 6.4, (200, 1))
        diagram = build_diagram(atoms, g, density)
        own = np.argmin(diagram.power(pts), axis=1)
        worst_slack = min(diagram.slacks(i, pts[k:k + 1]).min() for k, i in enumerate(own))
        if worst_slack < -1e-12:
            failures.append(f"slack {worst_slack:.1e}")
        w = facet_weights(diagram)
        if not np.array_equal(w, w.T):
            failures.append("facet symmetry")
        if abs(cell_masses(diagram).sum() - 1) > 1e-12:
            failures.append("mass conservation")
        rows = conditional(atoms, g, 10.0 ** rng.uniform(-1, 3), pts).sum(axis=1)
        if np.max(np.abs(rows - 1)) > 1e-15:
            failures.append("conditional rows")
    for name in ("uniform_asymmetric", "fig1a_gaussian"):
        sc = load_scenario(name)
        dual = solve_unregularized(sc.density, sc.atoms, spec=sc.quadrature)
        for eta in (4.0, 37.0, 300.0):
            sol = sinkhorn_solve(dual, eta, spec=sc.quadrature)
            kl_rho, kl_nu, _ = kl_and_entropic_cost(sol)
            if abs(kl_nu - kl_rho - entropy(sc.atoms.weights)) > 1e-9:
                failures.append("KL shift")
            decomposition = suboptimality(sol, check=False)
            direct = cost(sol) - dual.w2_squared
            if abs(decomposition - direct) > max(1e-8, 1e-3 * decomposition) or decomposition < -1e-9:
                failures.append(f"decomposition {name} eta={eta:g}")
    grid = [(a, b) for a in np.linspace(0, 50, 101) for b in np.linspace(0, 1, 51)]
    if any(math.log1p(a * b) < math.log1p(a) * math.log1p(b) for a, b in grid):
        failures.append("log inequality")
    detail = "all property checks hold" if not failures else "failed: " + ", ".join(failures)
    return not failures, detail + " (slacks, facet symmetry, masses, row sums, KL shift, decomposition, log inequality)"


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9, criterion_10, criterion_11, criterion_12]


@pytest.mark.parametrize("number", range(1, 13), ids=lambda n: f"criterion_{n}")
def test_acceptance(number):
    passed, detail = CRITERIA[number - 1]()
    assert report(number, passed, detail), detail


if __name__ == "__main__":
    for k, fn in enumerate(CRITERIA, start=1):
        report(k, *fn())
