"""Student t distribution through the regularized incomplete beta function.

The continued fraction is evaluated with the modified Lentz method, vectorized
over numpy arrays so whole correlation grids go through in one call.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

_EPS = 1e-16
_FPMIN = 1e-300
_MAXIT = 20000


def _betacf(a, b, x):
    """Continued fraction for I_x(a, b); converges fast for x < (a+1)/(a+b+2)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for m in range(1, _MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        h = np.where(done, h, h * d * c)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _FPMIN, _FPMIN, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _FPMIN, _FPMIN, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc(a, b, x, y=None):
    """Regularized incomplete beta I_x(a, b).

    ``y`` may carry ``1 - x`` computed without cancellation by the caller.
    """
    a, b, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (a, b, x)))
    y = 1.0 - x if y is None else np.broadcast_to(np.asarray(y, dtype=float), x.shape)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("x must lie in [0, 1]")
    out = np.empty(x.shape)
    out[x == 0] = 0.0
    out[y == 0] = 1.0
    inner = (x > 0) & (y > 0)
    if inner.any():
        ai, bi, xi, yi = a[inner], b[inner], x[inner], y[inner]
        log_front = gammaln(ai + bi) - gammaln(ai) - gammaln(bi) + ai * np.log(xi) + bi * np.log(yi)
        front = np.exp(log_front)
        direct = xi < (ai + 1.0) / (ai + bi + 2.0)
        res = np.empty(xi.shape)
        if direct.any():
            res[direct] = front[direct] * _betacf(ai[direct], bi[direct], xi[direct]) / ai[direct]
        flip = ~direct
        if flip.any():
            res[flip] = 1.0 - front[flip] * _betacf(bi[flip], ai[flip], yi[flip]) / bi[flip]
        out[inner] = res
    return out


def student_t_two_sided(t, df):
    """P(|T| >= |t|) for T ~ Student(df)."""
    t = np.asarray(t, dtype=float)
    df = np.asarray(df, dtype=float)
    t2 = t * t
    with np.errstate(invalid="ignore"):
        x = df / (df + t2)
        y = t2 / (df + t2)
    big = np.isinf(t2)
    x = np.where(big, 0.0, x)
    y = np.where(big, 1.0, y)
    return betainc(df / 2.0, 0.5, x, y)


def student_t_cdf(t, df):
    """P(T <= t) for T ~ Student(df)."""
    t = np.asarray(t, dtype=float)
    tail = 0.5 * student_t_two_sided(t, df)
    return np.where(t >= 0, 1.0 - tail, tail)
