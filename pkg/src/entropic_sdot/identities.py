"""Self-checks of the dilogarithm and the quadrature layer against known identities."""

import math
from dataclasses import dataclass

import numpy as np

from .measure import QuadratureSpec, integrate_1d
from .specialfn import dilog, zeta2

__all__ = ["IdentityCheck", "identity_suite", "log_integral", "weighted_log_integral"]

INVERSION_POINTS = (0.1, 1.0, 5.0, 10.0)
LOG_INTEGRAL_CONSTANTS = (0.5, 1.0, 2.0)
LOG_INTEGRAL_UPPER = 60.0


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    residual: float
    bound: float

    @property
    def passed(self):
        return bool(abs(self.residual) <= self.bound)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: |residual| = {abs(self.residual):.3e} (bound {self.bound:.0e})"


def log_integral(c, upper=LOG_INTEGRAL_UPPER, spec=None):
    """``int_0^upper log(1 + exp(-t) / c) dt``; tends to ``-Li2(-1/c)``."""
    return integrate_1d(lambda t: np.log1p(np.exp(-t) / c), (0.0, upper), spec)


def weighted_log_integral(c, upper=LOG_INTEGRAL_UPPER, spec=None):
    """``int_0^upper t exp(-t) / (c + exp(-t)) dt``; same limit as ``log_integral``."""
    return integrate_1d(lambda t: t * np.exp(-t) / (c + np.exp(-t)), (0.0, upper), spec)


def identity_suite(spec=None):
    """Run every identity check and return the list of ``IdentityCheck``."""
    spec = spec or QuadratureSpec()
    out = [IdentityCheck("Li2(-1) = -pi^2/12", float(dilog(-1.0)) + math.pi**2 / 12, 1e-12)]
    for a in INVERSION_POINTS:
        r = float(dilog(-a) + dilog(-1.0 / a)) + zeta2() + 0.5 * math.log(a) ** 2
        out.append(IdentityCheck(f"Li2(-a) + Li2(-1/a) = -zeta(2) - log(a)^2/2, a = {a:g}", r, 1e-10))
    r = float(dilog(-math.e) + dilog(-1.0 / math.e)) + zeta2() + 0.5
    out.append(IdentityCheck("Li2(-e) + Li2(-1/e) = -zeta(2) - 1/2", r, 1e-12))
    for c in LOG_INTEGRAL_CONSTANTS:
        target = -float(dilog(-1.0 / c))
        out.append(IdentityCheck(f"int log(1 + e^-t / c) dt = -Li2(-1/c), c = {c:g}",
                                 log_integral(c, spec=spec) - target, 1e-8))
        out.append(IdentityCheck(f"int t e^-t / (c + e^-t) dt = -Li2(-1/c), c = {c:g}",
                                 weighted_log_integral(c, spec=spec) - target, 1e-8))
    return out
