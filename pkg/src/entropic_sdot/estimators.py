"""scikit-learn style wrappers around the solvers.

The source density is a constructor parameter; ``fit`` takes the atoms
(``X``, shape ``(n, d)``) and their weights, so a fitted estimator maps
source points to atoms.

>>> from entropic_sdot.measure import Uniform
>>> est = SemiDiscreteOT(Uniform(-1.0, 1.0)).fit([[-1.0], [1.0]], [0.25, 0.75])
>>> est.predict([[-0.6], [0.0]]).tolist()
[0, 1]
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_points
from .asymptotics import predict as _predict_constants
from .entropic import conditional, sinkhorn_solve, soft_potential
from .measure import QuadratureSpec
from .problem import Atoms
from .sdot import solve_unregularized, transport_map

__all__ = ["SemiDiscreteOT", "EntropicSemiDiscreteOT"]


class SemiDiscreteOT(BaseEstimator):
    """Unregularized semi-discrete transport from a density to weighted atoms.

    Parameters
    ----------
    density : Density
    tol : float, optional
        Cell-mass tolerance of the Newton solver.
    quadrature : QuadratureSpec, optional

    Attributes
    ----------
    atoms_ : Atoms
    g_star_ : ndarray of shape (n_atoms,)
    w2_squared_ : float
    solution_ : DualSolution
    """

    def __init__(self, density, tol=None, quadrature=None):
        self.density = density
        self.tol = tol
        self.quadrature = quadrature

    def _spec(self):
        return self.quadrature if self.quadrature is not None else QuadratureSpec()

    def fit(self, X, sample_weight=None):
        """Solve for the dual weights of atoms ``X`` with masses ``sample_weight`` (uniform if None)."""
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        n = len(X)
        weights = np.full(n, 1.0 / n) if sample_weight is None else sample_weight
        self.atoms_ = Atoms(X, weights)
        self.solution_ = solve_unregularized(self.density, self.atoms_, tol=self.tol, spec=self._spec())
        self.g_star_ = self.solution_.g_star
        self.w2_squared_ = self.solution_.w2_squared
        self.n_features_in_ = self.atoms_.dim
        return self

    def predict(self, X):
        """Index of the atom each source point is transported to."""
        check_is_fitted(self, "solution_")
        return transport_map(self.solution_, check_points(X, self.n_features_in_))

    def transform(self, X):
        """Power distances ``|x - y_j|^2 - g_j``, shape ``(n_samples, n_atoms)``."""
        check_is_fitted(self, "solution_")
        return self.solution_.diagram.power(check_points(X, self.n_features_in_))

    def predicted_constants(self):
        """``Prediction`` (large-eta constants) for the fitted problem."""
        check_is_fitted(self, "solution_")
        return _predict_constants(self.solution_, self._spec())


class EntropicSemiDiscreteOT(SemiDiscreteOT):
    """Entropically regularized semi-discrete transport at a fixed ``eta``.

    Parameters
    ----------
    density : Density
    eta : float
        Inverse regularization strength.
    tol : float, optional
        Tolerance of the unregularized solve.
    entropic_tol : float, optional
        Marginal tolerance ``max_j |log(m_j / nu_j)|``.
    method : {"newton", "sinkhorn"}
    quadrature : QuadratureSpec, optional

    Attributes
    ----------
    g_eta_ : ndarray of shape (n_atoms,)
    entropic_solution_ : EntropicSolution
    """

    def __init__(self, density, eta=64.0, tol=None, entropic_tol=None, method="newton", quadrature=None):
        super().__init__(density, tol=tol, quadrature=quadrature)
        self.eta = eta
        self.entropic_tol = entropic_tol
        self.method = method

    def fit(self, X, sample_weight=None):
        super().fit(X, sample_weight)
        self.entropic_solution_ = sinkhorn_solve(self.solution_, self.eta, tol=self.entropic_tol,
                                                 spec=self._spec(), method=self.method)
        self.g_eta_ = self.entropic_solution_.g_eta
        return self

    def predict_proba(self, X):
        """Conditional law of the target atom given x, rows sum to one."""
        check_is_fitted(self, "entropic_solution_")
        return conditional(self.atoms_, self.g_eta_, self.eta, check_points(X, self.n_features_in_))

    def predict(self, X):
        """Most likely atom under the entropic coupling."""
        return np.argmax(self.predict_proba(X), axis=1)

    def transform(self, X):
        """Costs shifted by ``g_eta``: ``|x - y_j|^2 - g_eta_j``."""
        check_is_fitted(self, "entropic_solution_")
        pts = check_points(X, self.n_features_in_)
        y = self.atoms_.positions
        return ((pts[:, None, :] - y[None, :, :]) ** 2).sum(-1) - self.g_eta_[None, :]

    def soft_potential(self, X):
        """Entropic source potential ``f_eta`` at the points ``X``."""
        check_is_fitted(self, "entropic_solution_")
        return soft_potential(self.atoms_, self.g_eta_, self.eta, check_points(X, self.n_features_in_))
