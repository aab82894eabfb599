"""Exception types raised by the solvers and the quadrature layer."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature ran out of refinement before meeting its tolerance.

    The best available estimate and its error bound are kept on the exception
    so callers can decide whether the result is still usable.
    """

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap or could not make progress."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConsistencyError(RuntimeError):
    """Two independent routes to the same quantity disagreed beyond tolerance."""


class ScenarioError(ValueError):
    """A scenario document failed validation. ``path`` names the offending key."""

    def __init__(self, message, path=""):
        prefix = f"{path}: " if path else ""
        super().__init__(prefix + message)
        self.path = path
