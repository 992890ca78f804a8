"""Panel Gauss-Kronrod rules, graded meshes and sequence extrapolation."""
from __future__ import annotations

import math

import numpy as np
from scipy.special import roots_jacobi

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XK_HALF = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WK_HALF = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG_HALF = np.array([
    0.0, 0.129484966168869693270611432679082,
    0.0, 0.279705391489276667901467771423780,
    0.0, 0.381830050505118944950369775488975,
    0.0, 0.417959183673469387755102040816327,
])

GK_X = np.concatenate([-_XK_HALF[:-1], _XK_HALF[::-1]])
GK_WK = np.concatenate([_WK_HALF[:-1], _WK_HALF[::-1]])
GK_WG = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])
# Weights of the error rule (Kronrod minus Gauss).
GK_WE = GK_WK - GK_WG


def panel_nodes(breaks):
    """Gauss-Kronrod nodes and weights on consecutive panels.

    Parameters
    ----------
    breaks : array_like, shape (..., P + 1)
        Increasing panel end points along the last axis.

    Returns
    -------
    x, wk, we : ndarray, shape (..., 15 * P)
        Nodes, Kronrod weights and error-rule weights.
    """
    b = np.asarray(breaks, dtype=float)
    a, c = b[..., :-1, None], b[..., 1:, None]
    half = 0.5 * (c - a)
    x = 0.5 * (a + c) + half * GK_X
    wk = half * GK_WK
    we = half * GK_WE
    shape = b.shape[:-1] + (-1,)
    return x.reshape(shape), wk.reshape(shape), we.reshape(shape)


def integrate(f, breaks):
    """Integrate a vectorized function over panels.

    Returns the Kronrod value and the sum of per-panel
    ``|Kronrod - Gauss|`` differences as error estimate.
    """
    x, wk, we = panel_nodes(breaks)
    fx = f(x)
    npan = len(np.asarray(breaks)) - 1
    err = np.abs((we * fx).reshape(npan, 15).sum(axis=1)).sum()
    return float(np.dot(wk, fx)), float(err)


def uniform_breaks(lo, hi, width):
    """Equal panels of width at most ``width`` covering ``[lo, hi]``."""
    n = max(1, int(math.ceil((hi - lo) / width)))
    return np.linspace(lo, hi, n + 1)


def geometric_breaks(lo, hi, width):
    """Panels of equal width on a logarithmic scale covering ``[lo, hi]``."""
    return np.exp(uniform_breaks(math.log(lo), math.log(hi), width))


def graded_nodes(n, grading, T=1.0):
    """Graded mesh ``T * (j / n) ** grading`` for ``j = 0..n``."""
    return T * (np.arange(n + 1) / n) ** grading


def jacobi_rule(n, a, b, power):
    """Rule for ``int_a^b (tau - a) ** power g(tau) d tau`` with ``power > -1``.

    Returns nodes and weights such that the integral is ``sum(w * g(x))``.
    """
    x, w = roots_jacobi(n, 0.0, power)
    h = 0.5 * (b - a)
    return a + h * (x + 1.0), w * h ** (power + 1.0)


def fitted_limit(values):
    """Extrapolate the limit of a sequence with geometric error decay.

    The last three terms fit ``L + C q**n``; the error order relative to
    a halving step is ``gamma = -log2(q)``.

    Returns
    -------
    limit : float
    gamma : float
        Fitted order, ``nan`` when no geometric fit exists.
    ok : bool
        False when the fit is degenerate and the last term is returned.
    """
    v = np.asarray(values, dtype=float)
    if len(v) < 3:
        return float(v[-1]), math.nan, False
    d1 = v[-2] - v[-3]
    d2 = v[-1] - v[-2]
    if d1 == 0.0 or d2 == 0.0:
        return float(v[-1]), math.inf if d2 == 0.0 else math.nan, d2 == 0.0
    q = d2 / d1
    if not 0.0 < q < 1.0:
        return float(v[-1]), math.nan, False
    return float(v[-1] + d2 * q / (1.0 - q)), -math.log2(q), True


def iterated_limit(values, depth=2):
    """Repeated Aitken extrapolation for errors with several power orders.

    Each level maps consecutive triples to their geometric-fit limit, which
    removes the leading order; ``depth`` levels remove that many orders.

    Returns
    -------
    limit, gamma, ok
        ``gamma`` is the leading fitted order; ``ok`` is False if any level
        degenerated, in which case the shallower estimate is returned.
    """
    level = np.asarray(values, dtype=float)
    limit, gamma, ok = fitted_limit(level)
    for _ in range(depth - 1):
        if len(level) < 5:
            break
        nxt = []
        for i in range(len(level) - 2):
            lim, _, good = fitted_limit(level[i:i + 3])
            if not good:
                return limit, gamma, ok
            nxt.append(lim)
        level = np.asarray(nxt)
        deeper, _, good = fitted_limit(level)
        if not good:
            break
        limit = deeper
    return limit, gamma, ok
