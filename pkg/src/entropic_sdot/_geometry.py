"""Small convex-polygon helpers shared by the quadrature and power-cell code."""

import numpy as np

INSIDE_EPS = 1e-12


def as_polygon(vertices):
    """Return vertices as a float (k, 2) array in counter-clockwise order."""
    poly = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(poly) >= 3 and signed_area(poly) < 0:
        poly = poly[::-1].copy()
    return poly


def signed_area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def polygon_area(poly):
    if poly is None or len(poly) < 3:
        return 0.0
    return abs(signed_area(poly))


def centroid(poly):
    """Area centroid of a non-degenerate polygon (vertex mean as fallback)."""
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * cross.sum()
    if abs(a) < 1e-300:
        return poly.mean(axis=0)
    cx = ((x + xn) * cross).sum() / (6 * a)
    cy = ((y + yn) * cross).sum() / (6 * a)
    return np.array([cx, cy])


def clip_halfplane(poly, a, b, eps=INSIDE_EPS):
    """Sutherland-Hodgman clip of a convex polygon to {x : <a, x> <= b}.

    Returns None when nothing of positive extent remains.
    """
    if poly is None or len(poly) == 0:
        return None
    a = np.asarray(a, dtype=float)
    scale = max(1.0, float(np.linalg.norm(a)), abs(b))
    vals = poly @ a - b
    inside = vals <= eps * scale
    if inside.all():
        return poly
    if not inside.any():
        return None
    out = []
    k = len(poly)
    for idx in range(k):
        cur, nxt = poly[idx], poly[(idx + 1) % k]
        vc, vn = vals[idx], vals[(idx + 1) % k]
        ic, inn = inside[idx], inside[(idx + 1) % k]
        if ic:
            out.append(cur)
        if ic != inn:
            t = vc / (vc - vn)
            out.append(cur + t * (nxt - cur))
    if len(out) < 3:
        return None
    out = _dedupe(np.array(out))
    if len(out) < 3 or polygon_area(out) <= 0.0:
        return None
    return out


def _dedupe(poly, tol=1e-15):
    keep = [0]
    for idx in range(1, len(poly)):
        if np.max(np.abs(poly[idx] - poly[keep[-1]])) > tol:
            keep.append(idx)
    if len(keep) > 1 and np.max(np.abs(poly[keep[-1]] - poly[keep[0]])) <= tol:
        keep.pop()
    return poly[keep]


def split_polygon(poly, a, b, min_area=0.0):
    """Split a convex polygon by the line <a, x> = b into its (up to) two parts."""
    parts = []
    for piece in (clip_halfplane(poly, a, b, eps=0.0), clip_halfplane(poly, -np.asarray(a), -b, eps=0.0)):
        if piece is not None and polygon_area(piece) > min_area:
            parts.append(piece)
    return parts


def halfplanes(poly):
    """Outward edge normals ``A`` and offsets ``c`` with poly = {x : A x <= c}."""
    nxt = np.roll(poly, -1, axis=0)
    edge = nxt - poly
    normals = np.column_stack([edge[:, 1], -edge[:, 0]])
    offsets = np.einsum("ij,ij->i", normals, poly)
    return normals, offsets


def clip_line(point, direction, A, c, lo=-np.inf, hi=np.inf, eps=INSIDE_EPS):
    """Parameter interval [lo, hi] of ``point + s * direction`` inside {A x <= c}.

    Returns None if the interval is empty.
    """
    for a_row, c_val in zip(A, c):
        rate = float(a_row @ direction)
        slack = float(c_val - a_row @ point)
        scale = max(1.0, float(np.linalg.norm(a_row)), abs(c_val))
        if abs(rate) <= 1e-300:
            if slack < -eps * scale:
                return None
            continue
        bound = slack / rate
        if rate > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
        if lo > hi:
            return None
    return lo, hi
