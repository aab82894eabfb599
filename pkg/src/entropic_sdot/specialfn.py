"""Real dilogarithm and the zeta(2) constant.

``dilog`` evaluates Li2 on the real half-line (-inf, 1]. Arguments are mapped
into |z| <= 1/2, where the defining power series converges geometrically:

* z < -2 uses the inversion identity
  Li2(z) = -zeta(2) - log(-z)**2 / 2 - Li2(1/z);
* -2 <= z < -1/2 uses Landen's identity
  Li2(z) = -log(1 - z)**2 / 2 - Li2(z / (z - 1)), followed by the reflection
  below when z / (z - 1) > 1/2;
* 1/2 < z <= 1 uses the reflection
  Li2(z) = zeta(2) - log(z) log(1 - z) - Li2(1 - z).
"""

import math

import numpy as np

__all__ = ["dilog", "zeta2"]

_ZETA2 = math.pi**2 / 6.0
_SERIES_RTOL = 1e-16
_SERIES_MAX_TERMS = 200


def zeta2():
    """Return zeta(2) = pi**2 / 6."""
    return _ZETA2


def _series(z):
    # sum_{k>=1} z**k / k**2, meant for |z| <= 1/2 but valid on |z| <= 1
    total = 0.0
    power = 1.0
    for k in range(1, _SERIES_MAX_TERMS + 1):
        power *= z
        term = power / (k * k)
        total += term
        if abs(term) <= _SERIES_RTOL * abs(total):
            break
    return total


def _reflect(z):
    # 1/2 < z < 1
    return _ZETA2 - math.log(z) * math.log1p(-z) - _series(1.0 - z)


def _landen(z):
    # -2 <= z < 0
    w = z / (z - 1.0)
    inner = _series(w) if w <= 0.5 else _reflect(w)
    return -0.5 * math.log1p(-z) ** 2 - inner


def _transformed(z):
    """Evaluate through the functional identities, never the raw series at z."""
    if z < -2.0:
        return -_ZETA2 - 0.5 * math.log(-z) ** 2 - _dilog_scalar(1.0 / z)
    if z < 0.0:
        return _landen(z)
    if z == 1.0:
        return _ZETA2
    if z > 0.5:
        return _reflect(z)
    if z == 0.0:
        return 0.0
    # 0 < z <= 1/3: z / (z - 1) lies in [-1/2, 0); 1/3 < z <= 1/2: 1 - z lies in [1/2, 2/3)
    if z <= 1.0 / 3.0:
        return -0.5 * math.log1p(-z) ** 2 - _series(z / (z - 1.0))
    return _ZETA2 - math.log(z) * math.log1p(-z) - _series(1.0 - z)


def _dilog_scalar(z):
    if math.isnan(z):
        return math.nan
    if z > 1.0:
        raise ValueError(f"dilog is real only for z <= 1, got {z!r}")
    if z == -math.inf:
        return -math.inf
    if abs(z) <= 0.5:
        return _series(z)
    return _transformed(z)


def dilog(z):
    """Real dilogarithm Li2(z) = sum_{k>=1} z**k / k**2 for z <= 1.

    Parameters
    ----------
    z : float or array_like
        Argument(s), each at most 1.

    Returns
    -------
    float or ndarray
        Li2 evaluated elementwise; a float for scalar input.

    Raises
    ------
    ValueError
        If any argument exceeds 1 (Li2 is complex there).

    Examples
    --------
    >>> round(dilog(-1.0) + math.pi**2 / 12, 15)
    0.0
    """
    if np.ndim(z) == 0:
        return _dilog_scalar(float(z))
    arr = np.asarray(z, dtype=float)
    out = np.empty_like(arr)
    for idx, value in np.ndenumerate(arr):
        out[idx] = _dilog_scalar(float(value))
    return out
