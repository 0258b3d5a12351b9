"""Small statistical primitives: chi-squared distribution and Pearson correlation.

The chi-squared inverse CDF is implemented from the regularized incomplete
gamma function so the test suite can check it against an independent oracle.
"""

from __future__ import annotations

import math

import numpy as np

_MAX_ITER = 300
_EPS = 1e-14


def _gammainc_lower_series(a, x):
    """Regularized lower incomplete gamma via its power series (x < a + 1)."""
    term = 1.0 / a
    total = term
    n = a
    for _ in range(_MAX_ITER):
        n += 1.0
        term *= x / n
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_upper_cf(a, x):
    """Regularized upper incomplete gamma via continued fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def gammainc_lower(a, x):
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("gammainc_lower requires x >= 0, a > 0")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        return _gammainc_lower_series(a, x)
    return 1.0 - _gammainc_upper_cf(a, x)


def chi2_cdf(x, dof):
    if x <= 0:
        return 0.0
    return gammainc_lower(dof / 2.0, x / 2.0)


def chi2_sf(x, dof):
    """Survival function 1 - CDF."""
    if x <= 0:
        return 1.0
    if x < dof + 2.0:
        return 1.0 - _gammainc_lower_series(dof / 2.0, x / 2.0)
    return _gammainc_upper_cf(dof / 2.0, x / 2.0)


def chi2_ppf(p, dof):
    """Inverse CDF (percent-point function) by bracketed bisection."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    lo, hi = 0.0, float(dof)
    while chi2_cdf(hi, dof) < p:
        hi *= 2.0
        if hi > 1e8:
            raise RuntimeError("chi2_ppf failed to bracket")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(mid, dof) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-12 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def pearson(x, y):
    """Pearson correlation; returns (r, degenerate_flag).

    A constant series has no defined correlation; it is reported as 0.0 with
    the flag set, matching the reward-curve contract.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"pearson: length mismatch {x.shape} vs {y.shape}")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = np.sqrt((xd * xd).sum())
    sy = np.sqrt((yd * yd).sum())
    if sx == 0.0 or sy == 0.0:
        return 0.0, True
    return float((xd * yd).sum() / (sx * sy)), False
