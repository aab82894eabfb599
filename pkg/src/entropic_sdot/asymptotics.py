"""Large-eta predictions, the symmetric two-atom closed form, sweeps and rate fits."""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import linregress

from ._validation import check_eta
from .entropic import DiagnosticsRow, diagnostics, sinkhorn_solve
from .exceptions import ConsistencyError, ConvergenceError, QuadratureError
from .measure import QuadratureSpec, integrate_1d
from .powercell import facet_weights
from .problem import entropy
from .sdot import solve_unregularized
from .specialfn import zeta2

__all__ = [
    "Prediction",
    "predict_subopt_constant",
    "predict",
    "predicted_entropic_cost",
    "case_study_subopt",
    "fit_rate",
    "run_sweep",
    "SweepError",
]

logger = logging.getLogger(__name__)

DEFAULT_ETA_MIN = 32.0


@dataclass(frozen=True)
class Prediction:
    """Constants of the large-eta expansion.

    Attributes
    ----------
    subopt_constant : float
        ``C = zeta(2)/2 * sum_{i<j} w_ij / |y_i - y_j|``, the limit of
        ``eta**2 * (cost - W2^2)``.
    entropy_nu : float
        ``H(nu)``, the first-order coefficient of the entropic cost.
    w2_squared : float
    """

    subopt_constant: float
    entropy_nu: float
    w2_squared: float


def predict_subopt_constant(weights, atoms):
    """``zeta(2)/2 * sum_{i<j} w_ij / |y_i - y_j|`` from a facet-weight matrix."""
    w = np.asarray(weights, dtype=float)
    dist = atoms.distances()
    iu = np.triu_indices(atoms.n, k=1)
    return float(0.5 * zeta2() * np.sum(w[iu] / dist[iu]))


def predict(dual, spec=None):
    """``Prediction`` for a solved unregularized problem."""
    w = facet_weights(dual.diagram, spec)
    return Prediction(subopt_constant=predict_subopt_constant(w, dual.atoms),
                      entropy_nu=entropy(dual.atoms.weights), w2_squared=dual.w2_squared)


def predicted_entropic_cost(prediction, eta):
    """Two-term expansion ``W2^2 + H(nu)/eta - C/eta^2``."""
    eta = check_eta(eta)
    return prediction.w2_squared + prediction.entropy_nu / eta - prediction.subopt_constant / eta**2


def case_study_subopt(density, eta, spec=None):
    """Suboptimality for atoms {-1, +1} with equal weights and a symmetric density.

    On this problem the coupling is a logistic sigmoid in x and

        cost - W2^2 = 8 int_0^inf x / (1 + exp(4 eta x)) mu(x) dx.

    Evaluated by direct quadrature; it does not touch the transport solvers.
    """
    eta = check_eta(eta)
    spec = spec or QuadratureSpec()
    lo, hi = density.support
    if density.dim != 1 or not math.isclose(lo, -hi, rel_tol=1e-12, abs_tol=1e-15):
        raise ValueError("case_study_subopt needs a 1D density on a support symmetric about 0")

    def f(x):
        # x / (1 + e^{4 eta x}) written with e^{-4 eta x} to avoid overflow
        e = np.exp(-4.0 * eta * x)
        return x * e / (1.0 + e) * density.pdf(x)

    refinement = [(0.0, 1.0 / eta)] + [r for r in density.refinement_points if r[0] >= 0]
    breakpoints = [b for b in density.breakpoints if 0 < b < hi]
    singular = [s for s in density.singular_points if 0 <= s[0] <= hi]
    return 8.0 * integrate_1d(f, (0.0, hi), spec, refinement_points=refinement,
                              breakpoints=breakpoints, singular_points=singular)


def fit_rate(rows, eta_min=DEFAULT_ETA_MIN, column="suboptimality"):
    """Least-squares slope of ``log(column)`` against ``log(eta)``.

    Rows with ``eta < eta_min`` or a non-positive (or NaN) value are skipped.

    Returns
    -------
    slope, intercept, r_squared : float

    Raises
    ------
    ValueError
        Fewer than three usable rows.
    """
    pts = [(r.eta, getattr(r, column)) for r in rows]
    pts = [(e, v) for e, v in pts if e >= eta_min and np.isfinite(v) and v > 0]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 rows with eta >= {eta_min} and positive {column}, got {len(pts)}")
    eta, val = np.log(np.array(pts)).T
    fit = linregress(eta, val)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2)


class SweepError(RuntimeError):
    """Some eta values of a sweep failed; ``rows`` holds all rows, failed ones as NaN."""

    def __init__(self, message, rows, failures):
        super().__init__(message)
        self.rows = rows
        self.failures = failures


def run_sweep(problem, eta_list, tol=None, spec=None, method="newton", warm_start=True, strict=True):
    """Entropic diagnostics over an ascending list of eta values.

    The unregularized problem is solved once; each entropic solve is
    warm-started from the previous eta. A failed eta yields a row of NaNs
    (except eta and the predicted constant) and the sweep continues from the
    last good potential.

    Parameters
    ----------
    problem : Problem or DualSolution
    eta_list : sequence of float
        Must be strictly increasing.
    strict : bool
        Raise ``SweepError`` at the end if any eta failed.

    Returns
    -------
    list of DiagnosticsRow
    """
    etas = [check_eta(float(e)) for e in eta_list]
    if any(b <= a for a, b in zip(etas, etas[1:])):
        raise ValueError("eta_list must be strictly increasing")
    spec = spec or QuadratureSpec()
    if hasattr(problem, "g_star"):
        dual = problem
    else:
        dual = solve_unregularized(problem.density, problem.atoms, spec=spec)
    constant = predict(dual, spec).subopt_constant
    rows, failures = [], []
    g0 = None
    for eta in etas:
        try:
            sol = sinkhorn_solve(dual, eta, tol=tol, spec=spec, g0=g0, method=method)
            rows.append(diagnostics(sol, predicted_constant=constant))
        except (ConvergenceError, ConsistencyError, QuadratureError) as exc:
            logger.warning("eta=%g failed: %s", eta, exc)
            rows.append(DiagnosticsRow.failed(eta, constant))
            failures.append((eta, exc))
            continue
        if warm_start:
            g0 = sol.g_eta
    if failures and strict:
        etas_failed = ", ".join(f"{e:g}" for e, _ in failures)
        raise SweepError(f"{len(failures)} eta value(s) failed: {etas_failed}", rows, failures)
    return rows
