import numpy as np
import pytest

from entropic_sdot import Atoms, ConvergenceError, DiscreteProblem, cost, dense_sinkhorn, discretize, make_density
from entropic_sdot import kl_and_entropic_cost, sinkhorn_solve


def test_discretize_examples(uniform, gaussian):
    x, w = discretize(uniform, 4)
    np.testing.assert_allclose(x, [-0.75, -0.25, 0.25, 0.75])
    np.testing.assert_allclose(w, [0.25] * 4, rtol=1e-14)
    _, w = discretize(gaussian, 2)
    np.testing.assert_allclose(w, [0.5, 0.5], rtol=1e-14)
    for d in (gaussian, make_density("power_law", exponent=0.5), make_density("laplace", mean=0.2, scale=0.5)):
        for n in (3, 101, 1000):
            assert discretize(d, n)[1].sum() == pytest.approx(1.0, abs=1e-12)


def test_discretize_singular_cell_mass():
    # middle cell of 5 on [-1, 1] is [-0.2, 0.2]; mass = sqrt(0.2)
    _, w = discretize(make_density("power_law", exponent=0.5), 5)
    assert w[2] == pytest.approx(np.sqrt(0.2), rel=1e-12)


def test_discretize_rejects_2d(square):
    with pytest.raises(ValueError):
        discretize(square, 10)


def test_single_point_single_atom():
    res = dense_sinkhorn(DiscreteProblem([0.3], [1.0], Atoms.uniform([[1.0]]), 5.0))
    assert res.cost == pytest.approx(0.49)
    assert res.kl_rho == 0.0
    assert res.g.tolist() == [0.0]


def test_symmetric_grid_gives_zero_potential(uniform, two_atoms):
    x, w = discretize(uniform, 200)
    res = dense_sinkhorn(DiscreteProblem(x, w, two_atoms, 4.0))
    np.testing.assert_allclose(res.g, [0.0, 0.0], atol=1e-14)


def test_refinement_convergence(uniform, skewed_atoms):
    costs = []
    for n in (250, 500, 1000, 2000):
        x, w = discretize(uniform, n)
        costs.append(dense_sinkhorn(DiscreteProblem(x, w, skewed_atoms, 8.0)).cost)
    diffs = np.abs(np.diff(costs))
    assert np.all(diffs[1:] < diffs[:-1])


@pytest.mark.parametrize("eta", [2.0, 8.0, 16.0])
def test_agreement_with_semidiscrete(skewed_dual, uniform, eta):
    x, w = discretize(uniform, 2000)
    ref = dense_sinkhorn(DiscreteProblem(x, w, skewed_dual.atoms, eta))
    sol = sinkhorn_solve(skewed_dual, eta)
    c = cost(sol)
    assert abs(ref.cost - c) <= max(2e-3 * c, (2.0 / 2000) ** 2 * eta)
    assert np.max(np.abs(ref.g - sol.g_eta)) <= 1e-3
    assert ref.kl_rho == pytest.approx(kl_and_entropic_cost(sol)[0], rel=1e-6)


def test_gaussian_agreement(random_dual):
    x, w = discretize(random_dual.density, 4000)
    ref = dense_sinkhorn(DiscreteProblem(x, w, random_dual.atoms, 4.0))
    sol = sinkhorn_solve(random_dual, 4.0)
    assert ref.cost == pytest.approx(cost(sol), rel=1e-5)
    np.testing.assert_allclose(ref.g, sol.g_eta, atol=1e-5)


def test_iteration_cap(uniform, skewed_atoms):
    x, w = discretize(uniform, 100)
    with pytest.raises(ConvergenceError):
        dense_sinkhorn(DiscreteProblem(x, w, skewed_atoms, 16.0), max_iter=3)


def test_problem_validation(skewed_atoms):
    with pytest.raises(ValueError):
        DiscreteProblem([0.0, 1.0], [1.0], skewed_atoms, 1.0)
    with pytest.raises(ValueError):
        DiscreteProblem([0.0, 1.0], [1.0, 0.0], skewed_atoms, 1.0)
    with pytest.raises(ValueError):
        DiscreteProblem([0.0], [1.0], Atoms.uniform([[0.0, 0.0]]), 1.0)
