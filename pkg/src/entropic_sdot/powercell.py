"""Power (Laguerre) diagrams of weighted atoms restricted to a density's support.

For a weight vector ``g`` the cell of atom i is

    S_i = {x : |x - y_i|^2 - g_i <= |x - y_j|^2 - g_j for all j},

and the slack of atom j at a point x of S_i is the affine function

    slack_ij(x) = 2 <x, y_i - y_j> - |y_i|^2 + |y_j|^2 - g_j + g_i,

which vanishes on the facet shared by S_i and S_j. Facet weights are the
(d-1)-dimensional integrals of the density over those facets.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._geometry import INSIDE_EPS, as_polygon, clip_halfplane, clip_line, halfplanes, polygon_area
from .measure import QuadratureSpec, integrate_segment, rule_1d, rule_polygon
from .problem import Atoms

__all__ = [
    "PowerDiagram",
    "build_diagram",
    "cell_mass",
    "cell_masses",
    "cell_rule",
    "facet_weight",
    "facet_weights",
    "slice_weight",
    "slack",
    "adjacency_connected",
    "DisconnectedAdjacencyWarning",
]

MIN_FACET_LENGTH = 1e-12


class DisconnectedAdjacencyWarning(UserWarning):
    """The facet-adjacency graph of the cells is not connected."""


@dataclass(frozen=True, eq=False)
class PowerDiagram:
    """Cells and facets of a power diagram clipped to ``density.support``.

    ``cells[i]`` is ``(lo, hi)`` in 1D or a counter-clockwise ``(k, 2)``
    polygon in 2D, or ``None`` for an empty cell. ``facets`` maps ``(i, j)``
    with ``i < j`` to the separating point (1D, a float) or segment (2D, a
    ``(2, 2)`` array of endpoints); non-adjacent pairs are absent.
    """

    atoms: Atoms
    g: np.ndarray
    density: object
    cells: tuple
    facets: dict

    @property
    def n(self):
        return self.atoms.n

    @property
    def dim(self):
        return self.atoms.dim

    def power(self, x):
        """Power distances ``|x - y_j|^2 - g_j`` for points ``(N, d)``, shape ``(N, n)``."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        y = self.atoms.positions
        return ((x[:, None, :] - y[None, :, :]) ** 2).sum(-1) - self.g[None, :]

    def slacks(self, i, x):
        """All slacks ``slack_ij(x)`` for fixed i, shape ``(N, n)``."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        y = self.atoms.positions
        sq = (y**2).sum(1)
        lin = 2.0 * x @ (y[i] - y).T
        return lin - sq[i] + sq[None, :] - self.g[None, :] + self.g[i]

    def slack(self, i, j, x):
        return slack(self, i, j, x)

    def cell_halfplanes(self, i, exclude=()):
        """Rows ``(a, b)`` with S_i = {x : <a, x> <= b} (support constraints excluded)."""
        y = self.atoms.positions
        sq = (y**2).sum(1)
        A, c = [], []
        for k in range(self.n):
            if k == i or k in exclude:
                continue
            A.append(-2.0 * (y[i] - y[k]))
            c.append(-sq[i] + sq[k] - self.g[k] + self.g[i])
        return np.array(A).reshape(-1, self.dim), np.array(c)

    def is_empty(self, i):
        return self.cells[i] is None


def slack(diagram, i, j, x):
    """Affine slack of atom j at points x, relative to atom i (zero when i == j)."""
    x = np.asarray(x, dtype=float)
    pts = x.reshape(-1, diagram.dim)
    y = diagram.atoms.positions
    g = diagram.g
    if i == j:
        val = np.zeros(len(pts))
    else:
        val = (2.0 * pts @ (y[i] - y[j]) - y[i] @ y[i] + y[j] @ y[j] - g[j] + g[i])
    if x.ndim == 0 or (diagram.dim > 1 and x.ndim == 1):
        return float(val[0])
    return val


# ---------------------------------------------------------------------------
# construction


def build_diagram(atoms, g, density):
    """Power diagram of ``atoms`` with weights ``g`` on the support of ``density``.

    Raises
    ------
    ValueError
        On a length mismatch between ``g`` and the atoms, or a dimension mismatch.
    """
    g = np.asarray(g, dtype=float).reshape(-1)
    if g.shape != (atoms.n,):
        raise ValueError(f"weight vector has length {g.shape[0]}, expected {atoms.n}")
    if atoms.dim != density.dim:
        raise ValueError("atoms and density dimensions differ")
    g = g.copy()
    g.setflags(write=False)
    if atoms.dim == 1:
        cells, facets = _build_1d(atoms, g, density.support)
    else:
        cells, facets = _build_2d(atoms, g, as_polygon(density.support))
    return PowerDiagram(atoms, g, density, tuple(cells), facets)


def _build_1d(atoms, g, support):
    lo_s, hi_s = float(support[0]), float(support[1])
    y = atoms.positions[:, 0]
    n = len(y)
    sq = y**2
    cells = []
    for i in range(n):
        lo, hi = lo_s, hi_s
        for j in range(n):
            if j == i:
                continue
            # slack_ij(x) >= 0  <=>  2 x (y_i - y_j) >= y_i^2 - y_j^2 + g_j - g_i
            b = (sq[i] - sq[j] + g[j] - g[i]) / (2.0 * (y[i] - y[j]))
            if y[i] > y[j]:
                lo = max(lo, b)
            else:
                hi = min(hi, b)
        # + 0.0 turns a signed zero into +0.0
        cells.append((float(lo) + 0.0, float(hi) + 0.0) if hi > lo else None)
    facets = {}
    scale = max(1.0, float(np.max(np.abs(sq))), float(np.max(np.abs(g))))
    for i in range(n):
        for j in range(i + 1, n):
            b = (sq[i] - sq[j] + g[j] - g[i]) / (2.0 * (y[i] - y[j]))
            if not lo_s <= b <= hi_s:
                continue
            power = (b - y) ** 2 - g
            if np.all(power >= power[i] - INSIDE_EPS * scale):
                facets[(i, j)] = float(b) + 0.0
    return cells, facets


def _build_2d(atoms, g, support):
    y = atoms.positions
    n = len(y)
    sq = (y**2).sum(1)
    cells = []
    for i in range(n):
        poly = support
        for j in range(n):
            if j == i or poly is None:
                continue
            a = 2.0 * (y[j] - y[i])
            b = sq[j] - sq[i] - g[j] + g[i]
            poly = clip_halfplane(poly, a, b)
        cells.append(poly if poly is not None and polygon_area(poly) > 0 else None)
    A_s, c_s = halfplanes(support)
    facets = {}
    for i in range(n):
        for j in range(i + 1, n):
            seg = _level_segment(y, sq, g, i, j, 0.0, A_s, c_s)
            if seg is not None:
                facets[(i, j)] = seg
    return cells, facets


def _level_segment(y, sq, g, i, j, t, A_s, c_s):
    """Segment {slack_ij = t} inside the support and the other constraints of S_i."""
    a = 2.0 * (y[i] - y[j])
    rhs = t + sq[i] - sq[j] + g[j] - g[i]
    norm2 = float(a @ a)
    point = a * (rhs / norm2)
    direction = np.array([-a[1], a[0]]) / np.sqrt(norm2)
    others = [k for k in range(len(y)) if k not in (i, j)]
    A = [-2.0 * (y[i] - y[k]) for k in others]
    c = [-sq[i] + sq[k] - g[k] + g[i] for k in others]
    A_all = np.vstack([A_s] + ([np.array(A)] if A else []))
    c_all = np.concatenate([c_s, np.array(c)])
    span = clip_line(point, direction, A_all, c_all)
    if span is None or span[1] - span[0] < MIN_FACET_LENGTH:
        return None
    return np.array([point + span[0] * direction, point + span[1] * direction])


# ---------------------------------------------------------------------------
# integrals over cells and facets


def _facet_points_1d(diagram, i):
    lo, hi = diagram.cells[i]
    pts = []
    for (a, b), loc in diagram.facets.items():
        if i in (a, b) and (abs(loc - lo) <= 1e-12 * max(1, abs(lo)) or abs(loc - hi) <= 1e-12 * max(1, abs(hi))):
            pts.append(loc)
    return pts


def _facet_cuts_2d(diagram, i, length_scale):
    cuts = []
    y = diagram.atoms.positions
    poly = diagram.cells[i]
    for (a, b), _ in diagram.facets.items():
        if i not in (a, b):
            continue
        j = b if a == i else a
        normal = 2.0 * (y[i] - y[j])
        rate = float(np.linalg.norm(normal))
        # slack_ij = <normal, x> + const; cut at slack = k * rate * scale / 4
        const = -y[i] @ y[i] + y[j] @ y[j] - diagram.g[j] + diagram.g[i]
        vals = poly @ normal + const
        tmax = float(vals.max())
        step = rate * length_scale / 4.0
        ts = list(step * np.arange(1, 49))
        reach = 48 * step
        while reach < tmax:
            reach *= 2.0
            ts.append(reach)
        cuts.extend((normal, t - const) for t in ts if t < tmax)
    return cuts


def cell_rule(diagram, i, spec=None, integrand=None, length_scale=None):
    """Quadrature rule on cell i with the density folded into the weights.

    Parameters
    ----------
    integrand : callable, optional
        Extra factors ``(N, d) -> (N, C)`` the rule should resolve in addition
        to the density itself.
    length_scale : float, optional
        If given, the rule is pre-refined to this scale next to the cell's facets.

    Returns
    -------
    nodes : ndarray (N, d)
    weights : ndarray (N,)
        Quadrature weight times density value, so that
        ``weights @ h(nodes)`` approximates the integral of h against the density.
    """
    spec = spec or QuadratureSpec()
    density = diagram.density
    cell = diagram.cells[i]
    d = diagram.dim
    if cell is None:
        return np.empty((0, d)), np.empty(0)

    def f(x):
        pts = x.reshape(-1, d)
        mu = density.pdf(pts if d == 2 else pts[:, 0])
        if integrand is None:
            return mu
        extra = np.asarray(integrand(pts), dtype=float).reshape(len(pts), -1)
        return np.column_stack([mu, mu[:, None] * extra])

    if d == 1:
        refinement = list(density.refinement_points)
        if length_scale is not None:
            refinement += [(p, length_scale) for p in _facet_points_1d(diagram, i)]
        rule = rule_1d(f, cell, spec, refinement_points=refinement,
                       breakpoints=density.breakpoints, singular_points=density.singular_points)
        nodes = rule.nodes.reshape(-1, 1)
        mu = density.pdf(rule.nodes)
    else:
        cuts = _facet_cuts_2d(diagram, i, length_scale) if length_scale is not None else ()
        rule = rule_polygon(f, cell, spec, cuts=cuts)
        nodes = rule.nodes
        mu = density.pdf(nodes)
    return nodes, rule.weights * mu


def cell_mass(diagram, i, spec=None):
    """Density mass of cell i (zero for an empty cell)."""
    _, w = cell_rule(diagram, i, spec)
    return float(w.sum())


def cell_masses(diagram, spec=None):
    return np.array([cell_mass(diagram, i, spec) for i in range(diagram.n)])


def facet_weight(diagram, i, j, spec=None):
    """Integral of the density over the facet between cells i and j.

    In 1D this is the density at the separating point (one-sided limit when the
    point sits on the support boundary); zero for non-adjacent cells.
    """
    if i == j:
        raise ValueError("facet weight is defined only for i != j")
    key = (min(i, j), max(i, j))
    facet = diagram.facets.get(key)
    if facet is None:
        return 0.0
    density = diagram.density
    if diagram.dim == 1:
        lo, hi = density.support
        if lo < facet < hi:
            return float(density.pdf(np.array([facet]))[0])
        return density.pdf_limit(facet, +1 if facet == lo else -1)
    return integrate_segment(density.pdf, facet[0], facet[1], spec)


def facet_weights(diagram, spec=None):
    """Symmetric ``(n, n)`` matrix of facet weights (zero diagonal).

    Each unordered pair is computed once, so the matrix is exactly symmetric.
    """
    n = diagram.n
    w = np.zeros((n, n))
    for (i, j) in diagram.facets:
        w[i, j] = w[j, i] = facet_weight(diagram, i, j, spec)
    return w


def slice_weight(diagram, i, j, t, spec=None):
    """Density integral over the level set {x in S_i : slack_ij(x) = t}, t >= 0."""
    if i == j:
        raise ValueError("slices are defined only for i != j")
    if diagram.cells[i] is None or t < 0:
        return 0.0
    density = diagram.density
    y = diagram.atoms.positions
    sq = (y**2).sum(1)
    g = diagram.g
    if diagram.dim == 1:
        x = (t + sq[i] - sq[j] + g[j] - g[i]) / (2.0 * (y[i, 0] - y[j, 0]))
        lo, hi = diagram.cells[i]
        tol = 1e-13 * max(1.0, abs(x))
        if not lo - tol <= x <= hi + tol:
            return 0.0
        s_lo, s_hi = density.support
        if s_lo < x < s_hi:
            return float(density.pdf(np.array([x]))[0])
        return density.pdf_limit(x, +1 if x <= s_lo else -1)
    A_s, c_s = halfplanes(as_polygon(density.support))
    seg = _level_segment(y, sq, g, i, j, t, A_s, c_s)
    if seg is None:
        return 0.0
    return integrate_segment(density.pdf, seg[0], seg[1], spec)


def adjacency_connected(weights, threshold=0.0):
    """Connectivity of the graph with edges ``{(i, j) : w_ij > threshold}``.

    Returns
    -------
    connected : bool
    labels : ndarray of int
        Component label of every atom.

    A disconnected graph triggers a ``DisconnectedAdjacencyWarning``; it is a
    diagnostic, not an error.
    """
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    if n <= 1:
        return True, np.zeros(n, dtype=int)
    adj = csr_matrix(w > threshold)
    count, labels = connected_components(adj, directed=False)
    if count > 1:
        warnings.warn(f"facet adjacency graph has {count} components", DisconnectedAdjacencyWarning,
                      stacklevel=2)
    return count == 1, labels
