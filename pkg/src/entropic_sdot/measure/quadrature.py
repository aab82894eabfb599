"""Deterministic adaptive Gauss-Legendre quadrature.

Integrands are evaluated in batches: ``f`` receives an array of points
(shape ``(N,)`` on intervals, ``(N, 2)`` on polygons) and returns either
``(N,)`` values or an ``(N, C)`` array of C components integrated together.
Every element (panel or triangle) carries two estimates, one from the base
rule and one from its children; their difference is the error indicator and
the children estimate is the reported value. Refinement proceeds in rounds:
each round splits every element whose indicator exceeds its share of the
tolerance, so the work per round is one vectorised call of ``f``.

``rule_1d`` and ``rule_polygon`` return the final nodes and weights so that a
caller integrating many related functions (e.g. inside a fixed-point loop)
can adapt once and reuse the rule.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .._geometry import as_polygon, centroid, polygon_area, split_polygon
from ..exceptions import QuadratureError

__all__ = [
    "QuadratureSpec",
    "Rule",
    "rule_1d",
    "rule_polygon",
    "integrate_1d",
    "integrate_polygon",
    "integrate_segment",
    "refinement_grid",
]

_EPS = np.finfo(float).eps
# refinement grid: panels of width scale/4 out to 12 * scale on each side
_REFINE_REACH = 12
_REFINE_DIVISIONS = 4
_MAX_ELEMENTS = 2_000_000


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and rule sizes for the adaptive integrators.

    Parameters
    ----------
    rel_tol, abs_tol : float
        Each component must satisfy ``error <= max(abs_tol, rel_tol * |value|)``.
    max_depth : int
        Maximum number of bisections of any initial element.
    base_order : int
        Gauss-Legendre nodes per panel (per direction on triangles).
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-15
    max_depth: int = 40
    base_order: int = 15

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.base_order < 5:
            raise ValueError("base_order must be at least 5")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")

    def replace(self, **changes):
        fields = dict(rel_tol=self.rel_tol, abs_tol=self.abs_tol,
                      max_depth=self.max_depth, base_order=self.base_order)
        fields.update(changes)
        return QuadratureSpec(**fields)


@dataclass(frozen=True)
class Rule:
    """Adapted nodes and weights, plus the estimate they were adapted on."""

    nodes: np.ndarray
    weights: np.ndarray
    value: np.ndarray
    error: np.ndarray

    def integrate(self, f):
        if len(self.weights) == 0:
            return 0.0
        vals = np.asarray(f(self.nodes), dtype=float)
        out = np.tensordot(self.weights, vals, axes=(0, 0))
        return float(out) if np.ndim(out) == 0 else out

    def __len__(self):
        return len(self.weights)


@lru_cache(maxsize=None)
def _gauss_legendre_01(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _triangle_reference(order):
    # collapsed (Duffy) product rule on the reference triangle, weights sum to 1/2
    s, ws = _gauss_legendre_01(order)
    u = np.repeat(s, order)
    t = np.tile(s, order)
    v = t * (1.0 - u)
    w = np.repeat(ws, order) * np.tile(ws, order) * (1.0 - u)
    for arr in (u, v, w):
        arr.setflags(write=False)
    return u, v, w


def refinement_grid(location, scale, lo, hi):
    """Breakpoints giving panels of width ``scale/4`` within ``12*scale`` of ``location``.

    Beyond that reach panel widths double outwards until ``[lo, hi]`` is covered.
    """
    if not (scale > 0 and np.isfinite(scale)):
        return np.empty(0)
    k = np.arange(-_REFINE_REACH * _REFINE_DIVISIONS, _REFINE_REACH * _REFINE_DIVISIONS + 1)
    pts = [location + k * (scale / _REFINE_DIVISIONS)]
    # geometric continuation so a lone coarse panel never straddles the decaying tail
    reach = _REFINE_REACH * scale
    span = max(location - lo, hi - location)
    n_geo = int(np.ceil(np.log2(span / reach))) if span > reach else 0
    if n_geo > 0:
        dist = reach * 2.0 ** np.arange(1, n_geo + 1)
        pts.extend([location - dist, location + dist])
    pts = np.concatenate(pts)
    return pts[(pts > lo) & (pts < hi)]


# ---------------------------------------------------------------------------
# generic round-based driver


def _as_components(vals, n_points):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        return vals.reshape(n_points, 1), True
    return vals.reshape(n_points, -1), False


def _adapt(f, kernel, elems, spec):
    """Refine ``elems`` until the summed error indicators meet ``spec``.

    ``kernel`` supplies ``points(elems) -> (xp, wp, xc, wc)`` with parent and
    children nodes/weights, and ``split(elems) -> elems``.
    Returns the accepted elements and per-element (value, error) arrays.
    """
    done_elems, done_val, done_err = [], [], []
    pending = elems
    scalar = True
    while True:
        if kernel.count(pending):
            xp, wp, xc, wc = kernel.points(pending)
            n_el, qp = wp.shape
            qc = wc.shape[1]
            pts = np.concatenate([xp.reshape((n_el * qp,) + xp.shape[2:]),
                                  xc.reshape((n_el * qc,) + xc.shape[2:])])
            vals, scalar = _as_components(f(pts), len(pts))
            vp = vals[: n_el * qp].reshape(n_el, qp, -1)
            vc = vals[n_el * qp:].reshape(n_el, qc, -1)
            parent = np.einsum("eq,eqc->ec", wp, vp)
            child = np.einsum("eq,eqc->ec", wc, vc)
            floor = 64 * _EPS * np.einsum("eq,eqc->ec", np.abs(wc), np.abs(vc))
            err = np.abs(parent - child)
            err = np.where(err <= floor, 0.0, err)
            if not np.all(np.isfinite(child)):
                raise QuadratureError("integrand produced non-finite values")
            done_elems.append(pending)
            done_val.append(child)
            done_err.append(err)
        elems_all = kernel.concat(done_elems)
        val = np.concatenate(done_val)
        err = np.concatenate(done_err)
        total = val.sum(axis=0)
        total_err = err.sum(axis=0)
        tol = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.all(total_err <= tol):
            return elems_all, val, err, scalar
        n_all = len(val)
        share = np.max(err / tol, axis=1) * n_all
        want = share > 1.0
        depth_ok = kernel.depth(elems_all) < spec.max_depth
        split = want & depth_ok
        if not split.any() or n_all > _MAX_ELEMENTS:
            estimate = total[0] if scalar else total
            bound = total_err[0] if scalar else total_err
            raise QuadratureError(
                f"adaptive quadrature did not reach tolerance (error {np.max(total_err):.3e} "
                f"> {np.min(tol):.3e}) after {n_all} elements",
                estimate=estimate, error=bound)
        keep = ~split
        done_elems = [kernel.take(elems_all, keep)]
        done_val = [val[keep]]
        done_err = [err[keep]]
        pending = kernel.split(kernel.take(elems_all, split))


class _PanelKernel:
    """Panels on a line: columns a, b, kind, exponent, depth.

    kind 0 is the plain rule; kind 1 (2) maps s -> s**k towards the left
    (right) endpoint, which removes an |x - end|**(1 - 1/k) endpoint singularity.
    """

    def __init__(self, order):
        self.s, self.w = _gauss_legendre_01(order)

    @staticmethod
    def count(elems):
        return len(elems)

    @staticmethod
    def concat(parts):
        return np.concatenate(parts) if parts else np.empty((0, 5))

    @staticmethod
    def take(elems, mask):
        return elems[mask]

    @staticmethod
    def depth(elems):
        return elems[:, 4]

    def _nodes(self, a, b, kind, kexp):
        s, w = self.s[None, :], self.w[None, :]
        a, b, kind, kexp = (c[:, None] for c in (a, b, kind, kexp))
        h = b - a
        sk = s ** kexp
        jac = kexp * s ** (kexp - 1.0)
        x_lin = a + h * s
        x = np.where(kind == 1, a + h * sk, np.where(kind == 2, b - h * sk, x_lin))
        wt = np.where(kind == 0, w * h, w * h * jac)
        return x, wt

    def _children(self, elems):
        a, b, kind, kexp, depth = elems.T
        m = 0.5 * (a + b)
        left = np.column_stack([a, m, np.where(kind == 1, 1.0, 0.0), kexp, depth + 1])
        right = np.column_stack([m, b, np.where(kind == 2, 2.0, 0.0), kexp, depth + 1])
        return left, right

    def points(self, elems):
        a, b, kind, kexp, _ = elems.T
        xp, wp = self._nodes(a, b, kind, kexp)
        left, right = self._children(elems)
        xl, wl = self._nodes(*left[:, :4].T)
        xr, wr = self._nodes(*right[:, :4].T)
        return xp, wp, np.concatenate([xl, xr], axis=1), np.concatenate([wl, wr], axis=1)

    def split(self, elems):
        left, right = self._children(elems)
        return np.concatenate([left, right])

    def leaf_rule(self, elems):
        _, _, xc, wc = self.points(elems)
        return xc.reshape(-1), wc.reshape(-1)


class _TriangleKernel:
    """Triangles stored as (E, 7): three vertices flattened plus depth."""

    def __init__(self, order):
        self.u, self.v, self.w = _triangle_reference(order)

    @staticmethod
    def count(elems):
        return len(elems)

    @staticmethod
    def concat(parts):
        return np.concatenate(parts) if parts else np.empty((0, 7))

    @staticmethod
    def take(elems, mask):
        return elems[mask]

    @staticmethod
    def depth(elems):
        return elems[:, 6]

    def _nodes(self, tri):
        v0, v1, v2 = tri[:, 0:2], tri[:, 2:4], tri[:, 4:6]
        e1, e2 = v1 - v0, v2 - v0
        jac = np.abs(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])
        x = (v0[:, None, :] + self.u[None, :, None] * e1[:, None, :]
             + self.v[None, :, None] * e2[:, None, :])
        return x, jac[:, None] * self.w[None, :]

    @staticmethod
    def _children(tri):
        v0, v1, v2 = tri[:, 0:2], tri[:, 2:4], tri[:, 4:6]
        d = tri[:, 6:7] + 1
        m01, m12, m20 = 0.5 * (v0 + v1), 0.5 * (v1 + v2), 0.5 * (v2 + v0)
        return [np.hstack(c + (d,)) for c in
                ((v0, m01, m20), (m01, v1, m12), (m20, m12, v2), (m01, m12, m20))]

    def points(self, elems):
        xp, wp = self._nodes(elems)
        xs, ws = zip(*(self._nodes(c) for c in self._children(elems)))
        return xp, wp, np.concatenate(xs, axis=1), np.concatenate(ws, axis=1)

    def split(self, elems):
        return np.concatenate(self._children(elems))

    def leaf_rule(self, elems):
        _, _, xc, wc = self.points(elems)
        return xc.reshape(-1, 2), wc.reshape(-1)


# ---------------------------------------------------------------------------
# intervals


def _initial_panels(lo, hi, breakpoints, refinement_points, singular_points):
    pts = [lo, hi]
    pts.extend(b for b in breakpoints if lo < b < hi)
    sing = {}
    for loc, p in singular_points:
        if lo <= loc <= hi and p > 0:
            sing[float(loc)] = 1.0 / (1.0 - p)
            if lo < loc < hi:
                pts.append(loc)
    for loc, scale in refinement_points:
        if lo < loc < hi:
            pts.append(loc)
        pts.extend(refinement_grid(loc, scale, lo, hi))
    edges = np.unique(np.asarray(pts, dtype=float))
    rows = []
    for a, b in zip(edges[:-1], edges[1:]):
        ka, kb = sing.get(float(a)), sing.get(float(b))
        if ka and kb:
            m = 0.5 * (a + b)
            rows.append((a, m, 1.0, ka, 0.0))
            rows.append((m, b, 2.0, kb, 0.0))
        elif ka:
            rows.append((a, b, 1.0, ka, 0.0))
        elif kb:
            rows.append((a, b, 2.0, kb, 0.0))
        else:
            rows.append((a, b, 0.0, 1.0, 0.0))
    return np.array(rows, dtype=float).reshape(-1, 5)


def rule_1d(f, interval, spec=None, refinement_points=(), breakpoints=(), singular_points=()):
    """Adapt a Gauss-Legendre rule for ``f`` on ``interval``.

    Parameters
    ----------
    f : callable
        Vectorised integrand, ``(N,) -> (N,)`` or ``(N,) -> (N, C)``.
    interval : (float, float)
    spec : QuadratureSpec, optional
    refinement_points : sequence of (location, length_scale)
        Panels are pre-split to width ``length_scale/4`` within
        ``12*length_scale`` of each location.
    breakpoints : sequence of float
        Kinks or jumps of ``f``; always panel edges.
    singular_points : sequence of (location, exponent)
        Integrable ``|x - location|**-exponent`` singularities; panels touching
        them use a graded power map.

    Returns
    -------
    Rule
    """
    spec = spec or QuadratureSpec()
    lo, hi = float(interval[0]), float(interval[1])
    if not hi > lo:
        zero = np.zeros(1)
        return Rule(np.empty(0), np.empty(0), zero, zero)
    kernel = _PanelKernel(spec.base_order)
    elems = _initial_panels(lo, hi, breakpoints, refinement_points, singular_points)
    elems, val, err, scalar = _adapt(f, kernel, elems, spec)
    order = np.lexsort((elems[:, 1], elems[:, 0]))
    nodes, weights = kernel.leaf_rule(elems[order])
    value, error = val.sum(axis=0), err.sum(axis=0)
    if scalar:
        value, error = value[0], error[0]
    return Rule(nodes, weights, value, error)


def integrate_1d(f, interval, spec=None, refinement_points=(), breakpoints=(),
                 singular_points=(), return_error=False):
    """Integrate ``f`` over ``interval`` to the tolerances of ``spec``.

    See ``rule_1d`` for the arguments. Raises ``QuadratureError`` (carrying the
    best estimate and its error bound) if ``spec.max_depth`` is exhausted.

    >>> round(integrate_1d(lambda x: 0.5 + 0 * x, (-1, 1)), 12)
    1.0
    """
    rule = rule_1d(f, interval, spec, refinement_points, breakpoints, singular_points)
    value = rule.value if np.ndim(rule.value) else float(rule.value)
    if return_error:
        return value, rule.error
    return value


def integrate_segment(f, start, end, spec=None, refinement_points=()):
    """Line integral of ``f`` (a function of 2D points) along a segment, by arclength.

    ``refinement_points`` are given as (arclength from ``start``, length_scale).
    """
    p0 = np.asarray(start, dtype=float)
    p1 = np.asarray(end, dtype=float)
    length = float(np.linalg.norm(p1 - p0))
    if length == 0.0:
        return 0.0
    u = (p1 - p0) / length
    return integrate_1d(lambda t: f(p0[None, :] + t[:, None] * u[None, :]),
                        (0.0, length), spec, refinement_points=refinement_points)


# ---------------------------------------------------------------------------
# polygons


def _fan(poly):
    c = centroid(poly)
    nxt = np.roll(poly, -1, axis=0)
    rows = [np.concatenate([c, p, q, [0.0]]) for p, q in zip(poly, nxt)]
    return np.array(rows)


def _cut_pieces(poly, cuts):
    pieces = [poly]
    area = polygon_area(poly)
    for normal, offset in cuts:
        normal = np.asarray(normal, dtype=float)
        vals = poly @ normal
        if not (vals.min() < offset < vals.max()):
            continue
        nxt = []
        for piece in pieces:
            nxt.extend(split_polygon(piece, normal, offset, min_area=1e-15 * area))
        pieces = nxt
    return pieces


def rule_polygon(f, polygon, spec=None, cuts=()):
    """Adapt a triangle-based rule for ``f`` on a convex polygon.

    The polygon is first split along every line ``<normal, x> = offset`` in
    ``cuts``; each convex piece is fanned into triangles from its centroid and
    triangles are refined by midpoint subdivision.
    """
    spec = spec or QuadratureSpec()
    poly = as_polygon(polygon)
    if len(poly) < 3 or polygon_area(poly) == 0.0:
        zero = np.zeros(1)
        return Rule(np.empty((0, 2)), np.empty(0), zero, zero)
    kernel = _TriangleKernel(spec.base_order)
    elems = np.concatenate([_fan(piece) for piece in _cut_pieces(poly, cuts)])
    elems, val, err, scalar = _adapt(f, kernel, elems, spec)
    nodes, weights = kernel.leaf_rule(elems)
    value, error = val.sum(axis=0), err.sum(axis=0)
    if scalar:
        value, error = value[0], error[0]
    return Rule(nodes, weights, value, error)


def integrate_polygon(f, polygon, spec=None, cuts=(), return_error=False):
    """Integrate ``f`` (a function of ``(N, 2)`` points) over a convex polygon.

    >>> round(integrate_polygon(lambda x: 1 + 0 * x[:, 0], [(0, 0), (1, 0), (0, 1)]), 12)
    0.5
    """
    rule = rule_polygon(f, polygon, spec, cuts)
    value = rule.value if np.ndim(rule.value) else float(rule.value)
    if return_error:
        return value, rule.error
    return value
