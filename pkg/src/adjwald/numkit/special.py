"""Gamma-family special functions implemented in-repo.

``log_gamma``, ``digamma``, ``trigamma`` and the higher polygamma
functions are computed by the classical scheme: shift the argument
upward with the recurrence until it is large, then evaluate the
asymptotic (de Moivre / Bernoulli-number) series.  With the shift
threshold at 12 and terms through B16, absolute accuracy is better
than 1e-13 over the positive axis, comfortably inside the 1e-12
contract for x >= 1.

All functions accept scalars or numpy arrays and require x > 0.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError

_SHIFT = 12.0

# Bernoulli numbers B2, B4, ..., B16
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
)


def _validated(x):
    arr = np.asarray(x, dtype=float)
    if arr.size and np.any(~(arr > 0.0)):
        raise DomainError("special functions require x > 0")
    return arr


def _shifted(arr):
    """Return (arr + n, per-element integer shift n) with arr + n >= _SHIFT."""
    n = np.maximum(0, np.ceil(_SHIFT - arr)).astype(int)
    return arr + n, n


def _recurrence_sum(arr, n, power):
    """sum_{j=0}^{n-1} (x+j)^(-power), elementwise for integer shifts n."""
    jmax = int(n.max()) if n.size else 0
    if jmax == 0:
        return np.zeros_like(arr)
    j = np.arange(jmax, dtype=float)
    with np.errstate(over="ignore", under="ignore"):
        terms = (arr[..., None] + j) ** (-power)
    return np.sum(np.where(j < n[..., None], terms, 0.0), axis=-1)


def log_gamma(x):
    """Natural logarithm of the gamma function for x > 0."""
    arr = _validated(x)
    z, n = _shifted(arr)
    jmax = int(n.max()) if n.size else 0
    if jmax:
        j = np.arange(jmax, dtype=float)
        logs = np.where(j < n[..., None], np.log(arr[..., None] + j), 0.0)
        shift = np.sum(logs, axis=-1)
    else:
        shift = np.zeros_like(arr)
    r2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    rk = 1.0 / z
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2.0 * k * (2.0 * k - 1.0)) * rk
        rk *= r2
    out = (z - 0.5) * np.log(z) - z + 0.5 * math.log(2.0 * math.pi) + series - shift
    return out if out.shape else float(out)


def digamma(x):
    """Logarithmic derivative of the gamma function for x > 0."""
    arr = _validated(x)
    z, n = _shifted(arr)
    shift = _recurrence_sum(arr, n, 1)
    with np.errstate(over="ignore"):
        r2 = 1.0 / (z * z)
    series = np.zeros_like(z)
    rk = r2
    for k, b in enumerate(_BERNOULLI, start=1):
        series += b / (2.0 * k) * rk
        rk *= r2
    out = np.log(z) - 0.5 / z - series - shift
    return out if out.shape else float(out)


def trigamma(x):
    """First derivative of digamma for x > 0."""
    arr = _validated(x)
    z, n = _shifted(arr)
    shift = _recurrence_sum(arr, n, 2)
    with np.errstate(over="ignore"):
        r = 1.0 / z
        r2 = r * r
    series = np.zeros_like(z)
    rk = r2 * r
    for b in _BERNOULLI:
        series += b * rk
        rk *= r2
    out = r + 0.5 * r2 + series + shift
    return out if out.shape else float(out)


def polygamma(order, x):
    """Polygamma function of integer order 0..3 for x > 0.

    Orders 2 and 3 feed the third and fourth derivatives of the
    gamma-family normalising constant; higher orders are not needed.
    """
    if order == 0:
        return digamma(x)
    if order == 1:
        return trigamma(x)
    if order not in (2, 3):
        raise DomainError(f"polygamma order {order} not supported")
    arr = _validated(x)
    z, n = _shifted(arr)
    m = order
    fact_m1 = float(math.factorial(m - 1))
    fact_m = float(math.factorial(m))
    shift = _recurrence_sum(arr, n, m + 1)
    r = 1.0 / z
    r2 = r * r
    series = fact_m1 * r**m + 0.5 * fact_m * r ** (m + 1)
    rk = r ** (m + 2)
    for k, b in enumerate(_BERNOULLI, start=1):
        # B_{2k} (2k+m-1)!/(2k)! = B_{2k} * prod_{i=1}^{m-1} (2k+i)
        prod = 1.0
        for i in range(1, m):
            prod *= 2 * k + i
        series += b * prod * rk
        rk *= r2
    sign = 1.0 if m % 2 == 1 else -1.0
    out = sign * (series + fact_m * shift)
    return out if out.shape else float(out)
