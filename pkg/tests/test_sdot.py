import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entropic_sdot import (
    Atoms,
    ConvergenceError,
    make_density,
    solve_quantile_1d,
    solve_unregularized,
    transport_map,
    w2_squared,
)
from entropic_sdot.powercell import cell_masses
from entropic_sdot.sdot import dual_objective


def test_symmetric_problem(symmetric_dual):
    np.testing.assert_allclose(symmetric_dual.g_star, [0.0, 0.0], atol=1e-14)
    # 2 * 1/2 * int_0^1 (x - 1)^2 dx
    assert symmetric_dual.w2_squared == pytest.approx(1 / 3, rel=1e-14)


def test_asymmetric_problem(skewed_dual):
    np.testing.assert_allclose(skewed_dual.g_star, [-1.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(skewed_dual.masses, [0.25, 0.75], atol=1e-12)
    assert skewed_dual.exact_gap <= 1e-10
    # 1/2 int_{-1}^{-1/2} (x + 1)^2 dx + 1/2 int_{-1/2}^{1} (x - 1)^2 dx
    assert skewed_dual.w2_squared == pytest.approx(1 / 48 + 27 / 48, rel=1e-14)


def test_transport_map(skewed_dual):
    assert transport_map(skewed_dual, np.array([[-0.6], [-0.4], [0.9]])).tolist() == [0, 1, 1]


def test_single_atom(gaussian):
    sol = solve_unregularized(gaussian, Atoms.uniform([[0.0]]))
    assert sol.g_star.tolist() == [0.0]
    assert sol.w2_squared == pytest.approx(1.0, abs=1e-12)


def test_normalisation_and_dual_value(random_dual):
    nu = random_dual.atoms.weights
    assert abs(nu @ random_dual.g_star) <= 1e-12
    # strong duality: F(g*) = W2^2
    assert dual_objective(random_dual.diagram) == pytest.approx(random_dual.w2_squared, rel=1e-10)
    assert np.all(np.diff(random_dual.objective_history) >= -1e-12)


def test_2d_square(square_dual):
    np.testing.assert_allclose(square_dual.masses, [0.5, 0.5], atol=1e-8)
    # each half-square sends mass to its centre line: int (x - 1/4)^2 over [0, 1/2] doubled
    assert square_dual.w2_squared == pytest.approx(1 / 96 * 10, rel=1e-10)


def test_atoms_outside_support(uniform):
    atoms = Atoms(np.array([[-3.0], [0.2], [5.0]]), np.array([0.2, 0.5, 0.3]))
    sol = solve_unregularized(uniform, atoms)
    np.testing.assert_allclose(sol.masses, atoms.weights, atol=1e-10)
    assert sol.exact_gap <= 1e-9


def test_iteration_cap(uniform, skewed_atoms):
    with pytest.raises(ConvergenceError) as info:
        solve_unregularized(uniform, skewed_atoms, max_iter=0)
    assert info.value.residual > 0


def test_quantile_requires_1d(square):
    with pytest.raises(ValueError):
        solve_quantile_1d(square, Atoms.uniform([[0.2, 0.2], [0.8, 0.8]]))


@pytest.mark.parametrize("family, params", [
    ("gaussian", {"mean": 0.2, "sigma": 0.7}),
    ("laplace", {"mean": -0.1, "scale": 0.5}),
    ("power_law", {"exponent": 0.5}),
    ("uniform", {"low": -1.0, "high": 2.0}),
])
def test_newton_matches_quantile_solution(family, params):
    rng = np.random.default_rng(3)
    y = np.sort(rng.uniform(-1.5, 1.5, 5)).reshape(-1, 1)
    w = rng.uniform(0.3, 1.0, 5)
    sol = solve_unregularized(make_density(family, **params), Atoms(y, w / w.sum()))
    assert sol.residual <= 1e-10
    assert sol.exact_gap <= 1e-9


@given(st.integers(2, 6), st.integers(0, 2**31))
def test_dual_feasibility_and_marginals(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.uniform(-2, 2, n)
    if np.min(np.diff(np.sort(y))) < 1e-2:
        return
    w = rng.uniform(0.2, 1.0, n)
    density = make_density("gaussian", mean=0.0, sigma=1.0)
    sol = solve_unregularized(density, Atoms(y.reshape(-1, 1), w / w.sum()))
    np.testing.assert_allclose(cell_masses(sol.diagram), sol.atoms.weights, atol=1e-9)
    # the potential f*(x) = min_j (|x - y_j|^2 - g_j) is dual feasible by construction:
    # f*(x) + g_j <= |x - y_j|^2 with equality on the own cell
    x = rng.uniform(-8, 8, 200).reshape(-1, 1)
    power = sol.diagram.power(x)
    f = power.min(axis=1)
    cost = (x - sol.atoms.positions[:, 0]) ** 2
    assert np.all(f[:, None] + sol.g_star[None, :] <= cost + 1e-12)
    assert w2_squared(sol) == pytest.approx(sol.w2_squared, rel=1e-14)
