"""Source densities on 1D intervals and 2D convex polygons.

Unbounded families are truncated where the discarded tail mass is below
1e-12 and renormalised, so every density integrates to one over ``support``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.special import ndtr

from .._geometry import as_polygon, polygon_area
from .quadrature import QuadratureSpec, integrate_polygon

__all__ = [
    "Density",
    "Gaussian",
    "Laplace",
    "Uniform",
    "PowerLaw",
    "Uniform2D",
    "Gaussian2D",
    "make_density",
    "eval_density",
    "FAMILIES",
]

GAUSSIAN_TRUNCATION = 8.0
LAPLACE_TRUNCATION = 30.0
POWER_LAW_REFINEMENT = 1e-6


class Density:
    """Base class: a probability density with bounded support.

    Subclasses provide ``pdf``, ``support`` and ``dim``; 1D families also
    provide ``cdf`` (and inherit a root-finding ``ppf``).
    """

    family = "abstract"
    dim = 1

    def pdf(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.pdf(x)

    # quadrature hints: locations where the pdf is not smooth
    @property
    def breakpoints(self):
        return ()

    @property
    def singular_points(self):
        return ()

    @property
    def refinement_points(self):
        return ()

    def pdf_limit(self, x, side):
        """One-sided limit of the pdf at ``x`` from the left (side=-1) or right (+1)."""
        target = math.inf if side > 0 else -math.inf
        return float(self.pdf(np.array([np.nextafter(float(x), target)]))[0])

    def ppf(self, q):
        """Quantile function by bracketed root finding on ``cdf``."""
        lo, hi = self.support
        if q <= 0.0:
            return lo
        if q >= 1.0:
            return hi
        return brentq(lambda x: self.cdf(x) - q, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps,
                      maxiter=500)

    def params(self):
        raise NotImplementedError


def _as_1d(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class Gaussian(Density):
    mean: float = 0.0
    sigma: float = 1.0
    family = "gaussian"

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("gaussian sigma must be positive")

    @property
    def support(self):
        half = GAUSSIAN_TRUNCATION * self.sigma
        return (self.mean - half, self.mean + half)

    @property
    def _mass(self):
        return float(ndtr(GAUSSIAN_TRUNCATION) - ndtr(-GAUSSIAN_TRUNCATION))

    def pdf(self, x):
        x = _as_1d(x)
        z = (x - self.mean) / self.sigma
        val = np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.sigma * self._mass)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), val, 0.0)

    def cdf(self, x):
        lo, hi = self.support
        x = min(max(float(x), lo), hi)
        return float((ndtr((x - self.mean) / self.sigma) - ndtr(-GAUSSIAN_TRUNCATION)) / self._mass)

    def params(self):
        return {"mean": self.mean, "sigma": self.sigma}


@dataclass(frozen=True)
class Laplace(Density):
    mean: float = 0.0
    scale: float = 1.0
    family = "laplace"

    def __post_init__(self):
        if not self.scale > 0:
            raise ValueError("laplace scale must be positive")

    @property
    def support(self):
        half = LAPLACE_TRUNCATION * self.scale
        return (self.mean - half, self.mean + half)

    @property
    def breakpoints(self):
        return (self.mean,)

    @property
    def _mass(self):
        return -math.expm1(-LAPLACE_TRUNCATION)

    def pdf(self, x):
        x = _as_1d(x)
        val = np.exp(-np.abs(x - self.mean) / self.scale) / (2 * self.scale * self._mass)
        lo, hi = self.support
        return np.where((x >= lo) & (x <= hi), val, 0.0)

    def cdf(self, x):
        lo, hi = self.support
        x = min(max(float(x), lo), hi)
        tail = math.exp(-LAPLACE_TRUNCATION)
        z = (x - self.mean) / self.scale
        if z <= 0:
            raw = 0.5 * math.exp(z) - 0.5 * tail
        else:
            raw = 1.0 - 0.5 * math.exp(-z) - 0.5 * tail
        return raw / self._mass

    def params(self):
        return {"mean": self.mean, "scale": self.scale}


@dataclass(frozen=True)
class Uniform(Density):
    low: float = -1.0
    high: float = 1.0
    family = "uniform"

    def __post_init__(self):
        if not self.high > self.low:
            raise ValueError("uniform support must have high > low")

    @property
    def support(self):
        return (self.low, self.high)

    def pdf(self, x):
        x = _as_1d(x)
        return np.where((x >= self.low) & (x <= self.high), 1.0 / (self.high - self.low), 0.0)

    def cdf(self, x):
        x = min(max(float(x), self.low), self.high)
        return (x - self.low) / (self.high - self.low)

    def ppf(self, q):
        return self.low + min(max(q, 0.0), 1.0) * (self.high - self.low)

    def params(self):
        return {"support": [self.low, self.high]}


@dataclass(frozen=True)
class PowerLaw(Density):
    """Density proportional to ``|x|**-exponent`` on ``[low, high]``.

    On the default support [-1, 1] the constant is ``(1 - exponent) / 2``.
    """

    exponent: float = 0.5
    low: float = -1.0
    high: float = 1.0
    family = "power_law"

    def __post_init__(self):
        if not 0.0 <= self.exponent < 1.0:
            raise ValueError("power_law exponent must lie in [0, 1)")
        if not self.high > self.low:
            raise ValueError("power_law support must have high > low")

    @property
    def support(self):
        return (self.low, self.high)

    def _antiderivative(self, x):
        q = 1.0 - self.exponent
        return math.copysign(abs(x) ** q, x) / q

    @property
    def constant(self):
        return 1.0 / (self._antiderivative(self.high) - self._antiderivative(self.low))

    @property
    def singular_points(self):
        if self.exponent > 0 and self.low <= 0.0 <= self.high:
            return ((0.0, self.exponent),)
        return ()

    @property
    def refinement_points(self):
        if self.exponent > 0 and self.low < 0.0 < self.high:
            return ((0.0, POWER_LAW_REFINEMENT),)
        return ()

    def pdf(self, x):
        x = _as_1d(x)
        with np.errstate(divide="ignore"):
            val = self.constant * np.abs(x) ** (-self.exponent)
        return np.where((x >= self.low) & (x <= self.high), val, 0.0)

    def cdf(self, x):
        x = min(max(float(x), self.low), self.high)
        return self.constant * (self._antiderivative(x) - self._antiderivative(self.low))

    def params(self):
        return {"exponent": self.exponent, "support": [self.low, self.high]}


def _inside_polygon(poly, pts, eps=1e-12):
    nxt = np.roll(poly, -1, axis=0)
    edge = nxt - poly
    rel = pts[:, None, :] - poly[None, :, :]
    cross = edge[None, :, 0] * rel[:, :, 1] - edge[None, :, 1] * rel[:, :, 0]
    return np.all(cross >= -eps, axis=1)


@dataclass(frozen=True, eq=False)
class Uniform2D(Density):
    polygon: np.ndarray = field(default_factory=lambda: np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float))
    family = "uniform2d"
    dim = 2

    def __post_init__(self):
        poly = as_polygon(self.polygon)
        if len(poly) < 3 or polygon_area(poly) <= 0:
            raise ValueError("uniform2d polygon must be non-degenerate")
        object.__setattr__(self, "polygon", poly)

    @property
    def support(self):
        return self.polygon

    def pdf(self, x):
        pts = np.asarray(x, dtype=float).reshape(-1, 2)
        return np.where(_inside_polygon(self.polygon, pts), 1.0 / polygon_area(self.polygon), 0.0)

    def pdf_limit(self, x, side):
        return 1.0 / polygon_area(self.polygon)

    def params(self):
        return {"polygon": self.polygon.tolist()}


@dataclass(frozen=True, eq=False)
class Gaussian2D(Density):
    """Gaussian restricted to a convex polygon and renormalised there."""

    mean: np.ndarray = field(default_factory=lambda: np.zeros(2))
    covariance: np.ndarray = field(default_factory=lambda: np.eye(2))
    polygon: np.ndarray = None
    family = "gaussian2d"
    dim = 2

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).reshape(2)
        cov = np.asarray(self.covariance, dtype=float).reshape(2, 2)
        if not np.allclose(cov, cov.T) or np.any(np.linalg.eigvalsh(cov) <= 0):
            raise ValueError("gaussian2d covariance must be symmetric positive definite")
        poly = self.polygon
        if poly is None:
            half = GAUSSIAN_TRUNCATION * np.sqrt(np.diag(cov))
            poly = [mean + [-half[0], -half[1]], mean + [half[0], -half[1]],
                    mean + [half[0], half[1]], mean + [-half[0], half[1]]]
        poly = as_polygon(poly)
        if len(poly) < 3 or polygon_area(poly) <= 0:
            raise ValueError("gaussian2d polygon must be non-degenerate")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "polygon", poly)
        object.__setattr__(self, "_precision", np.linalg.inv(cov))
        object.__setattr__(self, "_norm", 1.0)
        spec = QuadratureSpec(rel_tol=1e-13, abs_tol=1e-16)
        mass = integrate_polygon(self._raw, poly, spec)
        object.__setattr__(self, "_norm", 1.0 / mass)

    def _raw(self, pts):
        d = pts - self.mean
        quad = np.einsum("ni,ij,nj->n", d, self._precision, d)
        det = np.linalg.det(self.covariance)
        return self._norm * np.exp(-0.5 * quad) / (2 * math.pi * math.sqrt(det))

    @property
    def support(self):
        return self.polygon

    def pdf(self, x):
        pts = np.asarray(x, dtype=float).reshape(-1, 2)
        return np.where(_inside_polygon(self.polygon, pts), self._raw(pts), 0.0)

    def pdf_limit(self, x, side):
        return float(self._raw(np.asarray(x, dtype=float).reshape(1, 2))[0])

    def params(self):
        return {"mean": self.mean.tolist(), "covariance": self.covariance.tolist(),
                "polygon": self.polygon.tolist()}


FAMILIES = {
    "gaussian": Gaussian,
    "laplace": Laplace,
    "uniform": Uniform,
    "power_law": PowerLaw,
    "uniform2d": Uniform2D,
    "gaussian2d": Gaussian2D,
}


def make_density(family, **params):
    """Build a density from its family name and scenario-style parameters.

    ``support`` (1D) is accepted as a two-element list for the bounded families.

    >>> make_density("gaussian", mean=0.0, sigma=1.0).family
    'gaussian'
    """
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown density family {family!r}; expected one of {sorted(FAMILIES)}")
    params = dict(params)
    if "support" in params and cls in (Uniform, PowerLaw):
        low, high = params.pop("support")
        params["low"], params["high"] = float(low), float(high)
    return cls(**params)


def eval_density(density, x):
    """Pointwise density value, zero outside the support."""
    return density.pdf(x)
