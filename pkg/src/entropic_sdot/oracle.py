"""Brute-force reference: discretize a 1D density and run dense log-domain Sinkhorn.

Only meant for moderate eta (say eta <= 16) where a few thousand grid
points resolve the coupling; it shares no code with the semi-discrete
solver beyond the density objects.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._validation import check_eta
from .exceptions import ConvergenceError
from .measure import QuadratureSpec, integrate_1d

__all__ = ["DiscreteProblem", "discretize", "dense_sinkhorn", "OracleResult"]

_GL_ORDER = 20


@dataclass(eq=False)
class DiscreteProblem:
    """Grid points with probability weights, target atoms and eta."""

    points: np.ndarray
    weights: np.ndarray
    atoms: object
    eta: float

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1)
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        if self.points.shape != self.weights.shape:
            raise ValueError("points and weights differ in length")
        if np.any(self.weights <= 0):
            raise ValueError("grid weights must be positive")
        if self.atoms.dim != 1:
            raise ValueError("the dense oracle is one-dimensional")
        self.eta = check_eta(self.eta)

    @property
    def cost_matrix(self):
        y = self.atoms.positions[:, 0]
        return (self.points[:, None] - y[None, :]) ** 2


def discretize(density, n_points, spec=None):
    """Midpoint grid of ``n_points`` equal cells over the support.

    Each point carries the density mass of its cell, renormalised to sum to
    one. Cells are integrated with a fixed Gauss-Legendre rule, or adaptively
    when they contain a kink or an integrable singularity.

    Returns
    -------
    points, weights : ndarray
    """
    if density.dim != 1:
        raise ValueError("discretize is one-dimensional")
    n_points = int(n_points)
    if n_points < 1:
        raise ValueError("need at least one grid point")
    lo, hi = (float(v) for v in density.support)
    edges = np.linspace(lo, hi, n_points + 1)
    points = 0.5 * (edges[:-1] + edges[1:])
    t, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    half = 0.5 * (edges[1:] - edges[:-1])
    x = points[:, None] + half[:, None] * t[None, :]
    mass = (density.pdf(x.ravel()).reshape(x.shape) * w[None, :]).sum(1) * half
    special = [p for p in density.breakpoints] + [s[0] for s in density.singular_points]
    spec = spec or QuadratureSpec()
    for p in special:
        for k in np.flatnonzero((edges[:-1] <= p) & (p <= edges[1:])):
            mass[k] = integrate_1d(density.pdf, (edges[k], edges[k + 1]), spec,
                                   breakpoints=[q for q in density.breakpoints if edges[k] < q < edges[k + 1]],
                                   singular_points=[s for s in density.singular_points
                                                    if edges[k] <= s[0] <= edges[k + 1]])
    # drop empty cells (density zero there); positivity is required downstream
    keep = mass > 0
    return points[keep], mass[keep] / mass[keep].sum()


@dataclass
class OracleResult:
    cost: float
    kl_rho: float
    g: np.ndarray
    iterations: int
    residual: float


def dense_sinkhorn(problem, tol=1e-12, max_iter=100_000):
    """Alternating log-domain Sinkhorn on a discretized problem.

    The reference measure is grid weights times counting measure on the
    atoms, matching the semi-discrete convention. The target marginal is the
    atom weights.

    Returns
    -------
    OracleResult
        ``cost`` and ``kl_rho`` of the final coupling and the atom-side
        potential ``g`` normalised to ``sum(nu * g) == 0``.

    Raises
    ------
    ConvergenceError
        If ``max_j |log(m_j / nu_j)|`` is still above ``tol`` after ``max_iter`` sweeps.
    """
    eta = problem.eta
    mu = problem.weights
    nu = problem.atoms.weights
    log_nu = np.log(nu)
    c = problem.cost_matrix
    # log pi_kj = log mu_k - eta (c_kj - f_k - g_j); the f-update normalises every row
    g = np.zeros(len(nu))
    for it in range(max_iter + 1):
        z = -eta * (c - g[None, :])
        logp = z - logsumexp(z, axis=1, keepdims=True)
        log_m = logsumexp(logp + np.log(mu)[:, None], axis=0)
        res = float(np.max(np.abs(log_m - log_nu)))
        if res <= tol:
            break
        if it == max_iter:
            raise ConvergenceError(f"dense Sinkhorn did not converge in {max_iter} sweeps (residual {res:.3e})",
                                   residual=res, iterations=it)
        g += (log_nu - log_m) / eta
    p = np.exp(logp)
    cost = float(mu @ (p * c).sum(1))
    with np.errstate(divide="ignore", invalid="ignore"):
        plogp = np.where(p > 0, p * logp, 0.0)
    kl_rho = float(mu @ plogp.sum(1))
    return OracleResult(cost=cost, kl_rho=kl_rho, g=g - nu @ g, iterations=it, residual=res)
