"""Unregularized semi-discrete optimal transport for the squared Euclidean cost.

The dual potential g* maximises the concave function

    F(g) = sum_j nu_j g_j + int min_j (|x - y_j|^2 - g_j) dmu(x),

whose gradient is ``nu_j - mu(S_j(g))``. ``solve_unregularized`` runs a
damped Newton ascent on F; in 1D the optimum is also available in closed
form from the quantiles of mu (``solve_quantile_1d``), which is used as a
cross-check.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import ConvergenceError
from .measure import QuadratureSpec
from .powercell import build_diagram, cell_masses, cell_rule, facet_weights

__all__ = [
    "DualSolution",
    "solve_unregularized",
    "solve_quantile_1d",
    "dual_objective",
    "w2_squared",
    "transport_map",
    "default_tol",
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = {1: 1e-10, 2: 1e-8}


def default_tol(dim):
    return DEFAULT_TOL[dim]


@dataclass(eq=False)
class DualSolution:
    """Result of ``solve_unregularized``.

    Attributes
    ----------
    g_star : ndarray
        Optimal dual weights, normalised so that ``sum(nu * g_star) == 0``.
    w2_squared : float
        Squared 2-Wasserstein distance.
    diagram : PowerDiagram
        Power diagram at ``g_star`` (the optimal transport cells).
    residual : float
        ``max_j |mu(S_j) - nu_j|`` at the returned weights.
    """

    g_star: np.ndarray
    w2_squared: float
    diagram: object
    residual: float
    masses: np.ndarray = None
    iterations: int = 0
    objective_history: list = field(default_factory=list)
    exact_gap: float = None

    @property
    def atoms(self):
        return self.diagram.atoms

    @property
    def density(self):
        return self.diagram.density


def _normalize(g, nu):
    return g - float(nu @ g)


def dual_objective(diagram, spec=None):
    """Value of the unregularized dual F at the diagram's weights."""
    y = diagram.atoms.positions
    total = float(diagram.atoms.weights @ diagram.g)
    for i in range(diagram.n):
        nodes, w = cell_rule(diagram, i, spec)
        if len(w):
            total += float(w @ (((nodes - y[i]) ** 2).sum(1) - diagram.g[i]))
    return total


def w2_squared(solution_or_diagram, spec=None):
    """Transport cost ``sum_i int_{S_i} |x - y_i|^2 dmu`` of the power-cell map."""
    diagram = getattr(solution_or_diagram, "diagram", solution_or_diagram)
    y = diagram.atoms.positions
    total = 0.0
    for i in range(diagram.n):
        nodes, w = cell_rule(diagram, i, spec)
        if len(w):
            total += float(w @ ((nodes - y[i]) ** 2).sum(1))
    return total


def transport_map(solution, x):
    """Index of the atom each point is sent to (lowest index on ties)."""
    diagram = getattr(solution, "diagram", solution)
    return np.argmin(diagram.power(x), axis=1)


def _hessian(diagram, spec):
    """Negated Hessian of F: weighted graph Laplacian with w_ij / (2 |y_i - y_j|)."""
    w = facet_weights(diagram, spec)
    dist = diagram.atoms.distances()
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.where(w > 0, w / (2.0 * dist), 0.0)
    lap = -off
    np.fill_diagonal(lap, off.sum(1))
    return lap


def _voronoi_start(atoms, density):
    """Weights whose power cells are the Voronoi cells of the atoms shrunk into the support.

    With z_i = c + s (y_i - c), the choice g_i = |y_i|^2 - |z_i|^2 / s makes
    S_i(g) the Voronoi cell of z_i, which has positive mass when every z_i is
    interior to the support.
    """
    y = atoms.positions
    if density.dim == 1:
        lo, hi = density.support
        c = np.array([0.5 * (lo + hi)])
        radius = 0.25 * (hi - lo)
    else:
        poly = np.asarray(density.support)
        c = poly.mean(axis=0)
        edges = np.roll(poly, -1, axis=0) - poly
        normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        normals /= np.linalg.norm(normals, axis=1)[:, None]
        radius = 0.5 * float(np.min(((poly - c) * normals).sum(1)))
    spread = float(np.max(np.linalg.norm(y - c, axis=1)))
    s = min(1.0, radius / spread) if spread > 0 else 1.0
    z = c + s * (y - c)
    return (y**2).sum(1) - (z**2).sum(1) / s


def solve_quantile_1d(density, atoms):
    """Exact 1D dual weights from the quantiles of ``density``.

    With atoms sorted, the breakpoint between consecutive cells sits at the
    quantile of the cumulative target weight; each breakpoint fixes the
    difference of consecutive weights.
    """
    if atoms.dim != 1:
        raise ValueError("the quantile construction is one-dimensional")
    y = atoms.positions[:, 0]
    nu = atoms.weights
    order = np.argsort(y)
    ys, ws = y[order], nu[order]
    cum = np.cumsum(ws)[:-1]
    g_sorted = np.zeros(len(ys))
    for k, q in enumerate(cum):
        b = density.ppf(float(q))
        # b = (y_{k+1}^2 - y_k^2 - g_{k+1} + g_k) / (2 (y_{k+1} - y_k))
        g_sorted[k + 1] = g_sorted[k] + ys[k + 1] ** 2 - ys[k] ** 2 - 2.0 * b * (ys[k + 1] - ys[k])
    g = np.empty_like(g_sorted)
    g[order] = g_sorted
    return _normalize(g, nu)


def solve_unregularized(density, atoms, tol=None, spec=None, max_iter=100, check_exact=True):
    """Damped Newton ascent on the semi-discrete dual.

    Parameters
    ----------
    density : Density
    atoms : Atoms
    tol : float, optional
        Stop when ``max_j |mu(S_j) - nu_j| <= tol``. Defaults to 1e-10 in 1D
        and 1e-8 in 2D.
    spec : QuadratureSpec, optional
    max_iter : int
    check_exact : bool
        In 1D, also compute the quantile solution and record the sup-norm gap.

    Returns
    -------
    DualSolution

    Raises
    ------
    ConvergenceError
        If the iteration cap is hit or a damped step cannot be found (for
        instance when a cell cannot be re-inflated).
    """
    spec = spec or QuadratureSpec()
    tol = default_tol(density.dim) if tol is None else float(tol)
    nu = atoms.weights
    n = atoms.n

    def state(g):
        diagram = build_diagram(atoms, g, density)
        masses = cell_masses(diagram, spec)
        return diagram, masses

    g = np.zeros(n)
    diagram, masses = state(g)
    if n > 1 and np.min(masses / nu) < 0.5:
        g_alt = _voronoi_start(atoms, density)
        diagram_alt, masses_alt = state(g_alt)
        if np.min(masses_alt / nu) > np.min(masses / nu):
            g, diagram, masses = g_alt, diagram_alt, masses_alt
    if n > 1 and np.min(masses) <= 0.0:
        raise ConvergenceError("initial weights leave a cell empty", residual=float(np.max(np.abs(masses - nu))))
    floor = 0.5 * min(float(np.min(masses)), float(np.min(nu)))
    residual = float(np.max(np.abs(masses - nu)))
    objective = dual_objective(diagram, spec)
    history = [objective]
    it = 0
    while residual > tol:
        if it >= max_iter:
            raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {residual:.3e})",
                                   residual=residual, iterations=it)
        it += 1
        grad = nu - masses
        lap = _hessian(diagram, spec)
        # fix the last coordinate; the Laplacian restricted to the rest is positive definite
        try:
            step = scipy.linalg.solve(lap[:-1, :-1], grad[:-1], assume_a="pos")
        except (np.linalg.LinAlgError, ValueError):
            step = np.linalg.lstsq(lap[:-1, :-1], grad[:-1], rcond=None)[0]
        step = np.append(step, 0.0)
        step -= nu @ step
        grad_norm = np.linalg.norm(grad)
        alpha = 1.0
        while True:
            g_new = g + alpha * step
            diagram_new, masses_new = state(g_new)
            ok = np.min(masses_new) >= floor
            ok = ok and np.linalg.norm(nu - masses_new) <= (1.0 - 0.5 * alpha) * grad_norm
            if ok:
                objective_new = dual_objective(diagram_new, spec)
                ok = objective_new >= objective - 1e-13 * max(1.0, abs(objective))
            if ok:
                break
            alpha *= 0.5
            if alpha < 2.0**-40:
                raise ConvergenceError("damped Newton step failed to keep cells inflated",
                                       residual=residual, iterations=it)
        g, diagram, masses, objective = g_new, diagram_new, masses_new, objective_new
        history.append(objective)
        residual = float(np.max(np.abs(masses - nu)))
        logger.debug("newton it=%d alpha=%.3g residual=%.3e", it, alpha, residual)

    g = _normalize(g, nu)
    diagram = build_diagram(atoms, g, density)
    sol = DualSolution(g_star=g, w2_squared=w2_squared(diagram, spec), diagram=diagram,
                       residual=residual, masses=masses, iterations=it, objective_history=history)
    if check_exact and density.dim == 1 and n > 1:
        g_exact = solve_quantile_1d(density, atoms)
        sol.exact_gap = float(np.max(np.abs(g_exact - g)))
        if sol.exact_gap > 10 * tol:
            warnings.warn(f"Newton and quantile potentials differ by {sol.exact_gap:.3e}", RuntimeWarning,
                          stacklevel=2)
    return sol
