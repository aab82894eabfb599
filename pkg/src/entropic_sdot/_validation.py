"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array

WEIGHT_SUM_TOL = 1e-12


def check_atom_positions(positions):
    """Return positions as a finite float ``(n, d)`` array with distinct rows.

    One-dimensional input of shape ``(n,)`` is read as n points on the line.
    """
    arr = np.asarray(positions, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_2d=True, dtype=float, copy=True)
    if arr.shape[1] not in (1, 2):
        raise ValueError(f"atoms must be 1- or 2-dimensional, got dimension {arr.shape[1]}")
    _, counts = np.unique(arr, axis=0, return_counts=True)
    if np.any(counts > 1):
        raise ValueError("atom positions must be pairwise distinct")
    arr.setflags(write=False)
    return arr


def check_atom_weights(weights, n, tol=WEIGHT_SUM_TOL):
    """Validate positive weights summing to one; the result is renormalised exactly."""
    if weights is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (n,):
        raise ValueError(f"expected {n} atom weights, got {w.shape[0]}")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("atom weights must be finite and strictly positive")
    total = w.sum()
    if abs(total - 1.0) > tol:
        raise ValueError(f"atom weights must sum to 1 (got {float(total)!r})")
    w = w / total
    w.setflags(write=False)
    return w


def check_eta(eta):
    if not isinstance(eta, numbers.Real) or not np.isfinite(eta) or eta <= 0:
        raise ValueError(f"eta must be a positive finite number, got {eta!r}")
    return float(eta)


def check_points(x, dim):
    """Return query points as ``(N, dim)``; 1D input of shape ``(N,)`` is accepted."""
    arr = np.asarray(x, dtype=float)
    if dim == 1 and arr.ndim <= 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_2d=True, dtype=float)
    if arr.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got {arr.shape[1]}")
    return arr
