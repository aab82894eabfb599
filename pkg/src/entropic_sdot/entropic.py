"""Entropically regularized semi-discrete transport.

With reference measure mu (x) counting measure on the atoms, the optimal
coupling has conditional law

    p_j(x) = exp(-eta (|x - y_j|^2 - g_j)) / sum_k exp(-eta (|x - y_k|^2 - g_k)),

and the potential g_eta solves the marginal equations ``int p_j dmu = nu_j``.
Internally the solver works with the scaled gap ``d = eta (g - g*)``: on the
unregularized cell S_i the logits become ``d_j - eta * slack_ij(x)``, which
keeps every exponent bounded and avoids cancellation between large costs.
All integrals are taken cell by cell over the cells of g*, with quadrature
refined to the scale 1/eta next to every facet.
"""

import logging
from dataclasses import dataclass, fields

import numpy as np
import scipy.linalg
from scipy.special import logsumexp

from ._validation import check_eta
from .exceptions import ConsistencyError, ConvergenceError
from .measure import QuadratureSpec
from .problem import Problem
from .powercell import cell_rule
from .sdot import DualSolution, default_tol, solve_unregularized

__all__ = [
    "EntropicSolution",
    "DiagnosticsRow",
    "soft_potential",
    "conditional",
    "sinkhorn_solve",
    "cost",
    "suboptimality",
    "kl_and_entropic_cost",
    "phi",
    "dual_gap",
    "diagnostics",
]

logger = logging.getLogger(__name__)

MAX_ITER = {"sinkhorn": 100_000, "newton": 200}
MAX_RULE_REBUILDS = 3


def soft_potential(atoms, g, eta, x):
    """Soft minimum ``-(1/eta) log sum_j exp(-eta (|x - y_j|^2 - g_j))``.

    Tends to ``min_j (|x - y_j|^2 - g_j)`` as eta grows.
    """
    eta = check_eta(eta)
    c = _costs(atoms, x)
    return -logsumexp(-eta * (c - np.asarray(g)[None, :]), axis=1) / eta


def conditional(atoms, g, eta, x, j=None):
    """Conditional probabilities ``p_j(x)`` of the entropic coupling.

    Returns the full ``(N, n)`` matrix (rows sum to one), or column ``j``.
    """
    eta = check_eta(eta)
    c = _costs(atoms, x)
    logits = -eta * (c - np.asarray(g, dtype=float)[None, :])
    p = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
    p /= p.sum(axis=1, keepdims=True)
    return p if j is None else p[:, j]


def _costs(atoms, x):
    pts = np.asarray(x, dtype=float).reshape(-1, atoms.dim)
    y = atoms.positions
    return ((pts[:, None, :] - y[None, :, :]) ** 2).sum(-1)


class _CellQuadrature:
    """Nodes of all cells of g*, with density-weighted weights and per-node slacks."""

    def __init__(self, dual, eta, spec, d):
        diagram = dual.diagram
        atoms = diagram.atoms
        n = atoms.n
        nodes, weights, cells = [], [], []
        for i in range(n):
            if diagram.cells[i] is None:
                continue

            def adapt_on(pts, i=i):
                s = diagram.slacks(i, pts)
                logits = d[None, :] - eta * s
                p = np.exp(logits - logsumexp(logits, axis=1, keepdims=True))
                return np.column_stack([p, p * s])

            x, w = cell_rule(diagram, i, spec, integrand=adapt_on, length_scale=1.0 / eta)
            nodes.append(x)
            weights.append(w)
            cells.append(np.full(len(w), i))
        self.nodes = np.concatenate(nodes)
        self.weights = np.concatenate(weights)
        self.cell = np.concatenate(cells)
        y = atoms.positions
        sq = (y**2).sum(1)
        g = diagram.g
        lin = 2.0 * self.nodes @ y.T  # (N, n): 2 <x, y_j>
        own = self.cell
        # slack_{c(x), j}(x) = 2<x, y_c - y_j> - |y_c|^2 + |y_j|^2 - g_j + g_c
        self.slack = (lin[np.arange(len(own)), own][:, None] - lin
                      - sq[own][:, None] + sq[None, :] - g[None, :] + g[own][:, None])
        self.slack[np.arange(len(own)), own] = 0.0
        self.cost = ((self.nodes[:, None, :] - y[None, :, :]) ** 2).sum(-1)
        self.f_star = self.cost[np.arange(len(own)), own] - g[own]
        self.eta = eta

    def __len__(self):
        return len(self.weights)

    def logits(self, d):
        return d[None, :] - self.eta * self.slack

    def log_conditional(self, d):
        z = self.logits(d)
        lse = logsumexp(z, axis=1, keepdims=True)
        return z - lse, lse[:, 0]

    def masses(self, d):
        logp, _ = self.log_conditional(d)
        return self.weights @ np.exp(logp)


@dataclass(eq=False)
class EntropicSolution:
    """Result of ``sinkhorn_solve``.

    Attributes
    ----------
    eta : float
    g_eta : ndarray
        Entropic dual weights, normalised so that ``sum(nu * g_eta) == 0``.
    d_eta : ndarray
        Scaled gap ``eta * (g_eta - g_star)``.
    marginal_residual : float
        ``max_j |log(m_j / nu_j)|`` at the returned weights.
    dual : DualSolution
        The unregularized solution the gap is measured against.
    """

    eta: float
    g_eta: np.ndarray
    d_eta: np.ndarray
    marginal_residual: float
    dual: DualSolution
    iterations: int
    method: str
    _quad: _CellQuadrature = None

    @property
    def atoms(self):
        return self.dual.atoms

    def masses(self):
        return self._quad.masses(self.d_eta)

    def entropic_cost_nu(self):
        """``cost + KL(pi | mu x nu) / eta``."""
        kl_rho, kl_nu, ent_rho = kl_and_entropic_cost(self)
        return ent_rho + (kl_nu - kl_rho) / self.eta


def _residual(m, nu):
    with np.errstate(divide="ignore"):
        return float(np.max(np.abs(np.log(m / nu))))


def _sinkhorn_loop(quad, d, nu, tol, max_iter):
    log_nu = np.log(nu)
    for it in range(max_iter + 1):
        m = quad.masses(d)
        res = _residual(m, nu)
        if res <= tol:
            return d, res, it
        if it == max_iter:
            break
        d = d + log_nu - np.log(m)
        d -= nu @ d
    raise ConvergenceError(f"Sinkhorn did not converge in {max_iter} iterations (residual {res:.3e})",
                           residual=res, iterations=max_iter)


def _newton_loop(quad, d, nu, tol, max_iter):
    # Newton on the concave semi-dual sum nu_j d_j - int log sum_j exp(logit_j) dmu
    for it in range(max_iter + 1):
        logp, _ = quad.log_conditional(d)
        p = np.exp(logp)
        m = quad.weights @ p
        res = _residual(m, nu)
        if res <= tol:
            return d, res, it
        if it == max_iter:
            break
        jac = np.diag(m) - (p * quad.weights[:, None]).T @ p
        rhs = nu - m
        try:
            step = scipy.linalg.solve(jac[:-1, :-1], rhs[:-1], assume_a="pos")
        except (np.linalg.LinAlgError, ValueError):
            step = np.linalg.lstsq(jac[:-1, :-1], rhs[:-1], rcond=None)[0]
        step = np.append(step, 0.0)
        alpha = 1.0
        while alpha > 2.0**-30:
            trial = d + alpha * step
            trial -= nu @ trial
            if _residual(quad.masses(trial), nu) < res:
                break
            alpha *= 0.5
        d = trial
    raise ConvergenceError(f"Newton did not converge in {max_iter} iterations (residual {res:.3e})",
                           residual=res, iterations=max_iter)


def sinkhorn_solve(problem, eta, tol=None, spec=None, g0=None, method="newton", max_iter=None):
    """Solve the entropic semi-discrete problem at regularization ``eta``.

    Parameters
    ----------
    problem : DualSolution or Problem
        The unregularized solution (solved on the fly for a ``Problem``).
    eta : float
        Inverse regularization strength.
    tol : float, optional
        Stop when ``max_j |log(m_j / nu_j)| <= tol``; 1e-10 in 1D, 1e-8 in 2D.
    g0 : array_like, optional
        Warm start for g (e.g. the solution at the previous eta); defaults to g*.
    method : {"newton", "sinkhorn"}
        ``"sinkhorn"`` is the fixed-point update
        ``g_j <- g_j + (log nu_j - log m_j) / eta``, which contracts at a rate
        of roughly ``1 - c / eta`` and so needs O(eta) sweeps. ``"newton"``
        solves the same marginal equations with damped Newton steps and
        usually converges in a handful of iterations. Both stop on the same
        residual test.
    max_iter : int, optional
        Defaults to 100000 Sinkhorn sweeps or 200 Newton steps.

    Returns
    -------
    EntropicSolution
    """
    eta = check_eta(eta)
    spec = spec or QuadratureSpec()
    if isinstance(problem, Problem):
        dual = solve_unregularized(problem.density, problem.atoms, spec=spec)
    elif isinstance(problem, DualSolution):
        dual = problem
    else:
        raise TypeError("problem must be a Problem or a DualSolution")
    tol = default_tol(dual.density.dim) if tol is None else float(tol)
    nu = dual.atoms.weights
    g_star = dual.g_star
    d = np.zeros(len(nu)) if g0 is None else eta * (np.asarray(g0, dtype=float) - g_star)
    d -= nu @ d
    loop = {"sinkhorn": _sinkhorn_loop, "newton": _newton_loop}.get(method)
    if loop is None:
        raise ValueError(f"unknown method {method!r}")
    max_iter = MAX_ITER[method] if max_iter is None else int(max_iter)
    iterations = 0
    quad = None
    for _ in range(MAX_RULE_REBUILDS):
        quad = _CellQuadrature(dual, eta, spec, d)
        d, res, it = loop(quad, d, nu, tol, max_iter - iterations)
        iterations += it
        if it == 0:
            break
    else:
        quad = _CellQuadrature(dual, eta, spec, d)
        d, res, it = loop(quad, d, nu, tol, max_iter - iterations)
        iterations += it
    logger.debug("eta=%g converged in %d iterations (residual %.2e, %d nodes)", eta, iterations, res, len(quad))
    g_eta = g_star + d / eta
    g_eta = g_eta - nu @ g_eta
    return EntropicSolution(eta=eta, g_eta=g_eta, d_eta=d, marginal_residual=res, dual=dual,
                            iterations=iterations, method=method, _quad=quad)


# ---------------------------------------------------------------------------
# functionals of the entropic coupling


def cost(solution, spec=None):
    """Transport cost ``E_pi[|x - y|^2]`` of the entropic coupling."""
    q = solution._quad
    logp, _ = q.log_conditional(solution.d_eta)
    return float(q.weights @ (np.exp(logp) * q.cost).sum(1))


def suboptimality(solution, spec=None, check=True):
    """Excess cost over W2^2, from the nonnegative slack decomposition.

    Computes ``sum_{i != j} int_{S_i} slack_ij p_j dmu``; with ``check`` the
    direct difference ``cost - W2^2`` must agree within
    ``max(1e-8, 1e-3 * value)``.
    """
    q = solution._quad
    logp, _ = q.log_conditional(solution.d_eta)
    value = float(q.weights @ (np.exp(logp) * q.slack).sum(1))
    if check:
        direct = cost(solution) - solution.dual.w2_squared
        if abs(direct - value) > max(1e-8, 1e-3 * abs(value)):
            raise ConsistencyError(
                f"slack decomposition {value:.6e} disagrees with cost - W2^2 = {direct:.6e}")
    return value


def kl_and_entropic_cost(solution, spec=None):
    """KL divergences of the coupling and the entropic cost.

    Returns
    -------
    kl_mu_rho : float
        KL against mu x (counting measure on the atoms); nonpositive.
    kl_mu_nu : float
        KL against mu x nu; equals ``kl_mu_rho + H(nu)`` at the optimum.
    entropic_cost : float
        ``cost + kl_mu_rho / eta``, which equals ``E_mu[f_eta]``.
    """
    q = solution._quad
    nu = solution.atoms.weights
    logp, _ = q.log_conditional(solution.d_eta)
    p = np.exp(logp)
    kl_rho = float(q.weights @ (p * logp).sum(1))
    kl_nu = float(q.weights @ (p * (logp - np.log(nu)[None, :])).sum(1))
    transport = float(q.weights @ (p * q.cost).sum(1))
    return kl_rho, kl_nu, transport + kl_rho / solution.eta


def expected_soft_potential(solution):
    """``E_mu[f_eta]`` with ``f_eta = f* - (1/eta) log sum_j exp(d_j - eta slack_ij)``."""
    q = solution._quad
    _, lse = q.log_conditional(solution.d_eta)
    return float(q.weights @ (q.f_star - lse / solution.eta))


def phi(solution, spec=None, check=True):
    """Value of the auxiliary objective at ``d = eta (g_eta - g*)``.

    ``sum_i int_{S_i} log(1 + sum_{j != i} exp(d_j - d_i - eta slack_ij)) dmu``.
    With ``check`` the identity ``phi = eta (W2^2 - entropic_cost)`` (reference
    mu x counting measure) is enforced to ``1e-6 * max(1, |phi|)``.
    """
    q = solution._quad
    d = solution.d_eta
    own = q.cell
    rows = np.arange(len(own))
    z = q.logits(d) - d[own][:, None]
    z[rows, own] = -np.inf
    # log(1 + sum e^z), shifted by max(0, max z) so nothing overflows
    shift = np.maximum(np.max(z, axis=1), 0.0)
    rest = np.exp(z - shift[:, None]).sum(1)
    integrand = np.where(shift > 0.0, shift + np.log(np.exp(-shift) + rest), np.log1p(rest))
    value = float(q.weights @ integrand)
    if check:
        _, _, ent_rho = kl_and_entropic_cost(solution)
        other = solution.eta * (solution.dual.w2_squared - ent_rho)
        if abs(value - other) > 1e-6 * max(1.0, abs(value)):
            raise ConsistencyError(f"phi = {value:.9e} but eta (W2^2 - entropic cost) = {other:.9e}")
    return value


def dual_gap(solution):
    """``d_eta = eta (g_eta - g*)`` and its sup norm."""
    d = solution.eta * (solution.g_eta - solution.dual.g_star)
    return d, float(np.max(np.abs(d)))


@dataclass
class DiagnosticsRow:
    """One row of an eta sweep; column order matches the CSV header."""

    eta: float
    cost: float
    w2_squared: float
    suboptimality: float
    suboptimality_scaled: float
    kl_mu_rho: float
    kl_mu_nu: float
    entropic_cost: float
    d_eta_inf_norm: float
    phi: float
    phi_scaled: float
    predicted_constant: float

    @classmethod
    def columns(cls):
        return [f.name for f in fields(cls)]

    def values(self):
        return [getattr(self, name) for name in self.columns()]

    @classmethod
    def failed(cls, eta, predicted_constant=float("nan")):
        nan = float("nan")
        return cls(eta, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan, predicted_constant)

    @property
    def entropy_nu(self):
        return self.kl_mu_nu - self.kl_mu_rho

    @property
    def entropic_cost_nu(self):
        return self.entropic_cost + (self.kl_mu_nu - self.kl_mu_rho) / self.eta


def diagnostics(solution, predicted_constant=float("nan"), check=True):
    """Collect every scalar diagnostic of a solved problem into a ``DiagnosticsRow``."""
    eta = solution.eta
    sub = suboptimality(solution, check=check)
    kl_rho, kl_nu, ent = kl_and_entropic_cost(solution)
    ph = phi(solution, check=check)
    _, gap = dual_gap(solution)
    return DiagnosticsRow(
        eta=eta,
        cost=cost(solution),
        w2_squared=solution.dual.w2_squared,
        suboptimality=sub,
        suboptimality_scaled=eta**2 * sub,
        kl_mu_rho=kl_rho,
        kl_mu_nu=kl_nu,
        entropic_cost=ent,
        d_eta_inf_norm=gap,
        phi=ph,
        phi_scaled=eta * ph,
        predicted_constant=predicted_constant,
    )
