"""Wright function W(-z; -beta, delta) on the negative real axis.

The function is evaluated from its power series

    W(-z; -beta, delta) = sum_k (-z)**k / (k! Gamma(delta - beta k))

with reciprocal-gamma coefficients, a rigorous truncation bound and either
compensated float summation or extended precision when cancellation is
severe.  Bulk evaluation inside integrals goes through cached piecewise
Chebyshev tables built from the same series.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from numba import njit
from scipy.fft import dct
from scipy.special import gammaln, rgamma

from .config import EvalResult
from .quadrature import panel_nodes
from .errors import DomainError, NonConvergence

_EPS = np.finfo(float).eps
_LOG_PI = math.log(math.pi)


@dataclass(frozen=True)
class WrightParams:
    """Parameters of ``W(.; -beta, delta)`` with ``0 < beta < 1``."""

    beta: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta!r}")
        if not math.isfinite(self.delta):
            raise DomainError("delta must be finite")


def decay_exponent(z, beta):
    """Exponent ``Y`` of the envelope ``exp(-Y)`` of ``W(-z; -beta, delta)``."""
    return (1.0 - beta) * (beta ** beta * np.asarray(z, dtype=float)) ** (1.0 / (1.0 - beta))


def decay_argument(Y, beta):
    """Inverse of :func:`decay_exponent` in ``z``."""
    return (Y / (1.0 - beta)) ** (1.0 - beta) / beta ** beta


def _is_pole(x):
    return x <= 0.0 and abs(x - round(x)) < 1e-13


@lru_cache(maxsize=256)
def _log_coefficients(beta, delta, n):
    """``log|c_k|`` and ``sign(c_k)`` of ``c_k = 1 / (k! Gamma(delta - beta k))``."""
    k = np.arange(n)
    x = delta - beta * k
    logc = np.empty(n)
    sign = np.ones(n)
    pos = x > 0
    logc[pos] = -gammaln(x[pos])
    neg = ~pos
    xn = x[neg]
    frac = xn - np.round(xn)
    # 1/Gamma(x) = Gamma(1 - x) sin(pi x) / pi for x <= 0
    s = np.sin(np.pi * frac) * np.where(np.round(xn) % 2 == 0, 1.0, -1.0)
    with np.errstate(divide="ignore"):
        logc[neg] = gammaln(1.0 - xn) + np.log(np.abs(s)) - _LOG_PI
    sign[neg] = np.sign(s)
    poles = (x <= 0.0) & (x == np.round(x))
    sign[poles] = 0.0
    logc[poles] = -np.inf
    logc -= gammaln(k + 1.0)
    logc.setflags(write=False)
    sign.setflags(write=False)
    return logc, sign


def _truncation(z, beta, delta, tol, max_terms):
    """Number of terms ``K`` and a bound on the tail ``sum_{k>=K} |term_k|``."""
    a = 1.0 - delta
    # Ratio bound z * y**beta / (k + 1) decreases for k > k0.
    k0 = (beta * beta - a) / (beta * (1.0 - beta))
    lz = math.log(z)
    lo, n = 1, 256
    while lo <= max_terms:
        k = np.arange(lo, min(lo + n, max_terms + 1), dtype=float)
        y = a + beta * k
        ok = (delta - beta * k <= 0.0) & (k > k0)
        logB = k * lz + gammaln(np.maximum(y, 1e-300)) - gammaln(k + 1.0) - _LOG_PI
        rho = z * np.maximum(y, 0.0) ** beta / (k + 1.0)
        ok &= rho < 1.0
        with np.errstate(divide="ignore"):
            logtail = logB - np.log1p(-np.minimum(rho, 1.0 - 1e-16))
        ok &= logtail <= math.log(tol)
        idx = np.flatnonzero(ok)
        if idx.size:
            i = idx[0]
            return int(k[i]), float(math.exp(logtail[i])) * (1.0 + 1e-9)
        lo += n
        n *= 2
    raise NonConvergence(f"series for W(-{z}; -{beta}, {delta}) needs more than {max_terms} terms")


@lru_cache(maxsize=64)
def _mp_coefficients(beta, delta, dps, n):
    with mpmath.workdps(dps):
        b = mpmath.mpf(beta)
        d = mpmath.mpf(delta)
        out = []
        fact = mpmath.mpf(1)
        for k in range(n):
            if k:
                fact *= k
            out.append(mpmath.rgamma(d - b * k) / fact)
    return tuple(out)


def _mp_sum(z, beta, delta, K, dps):
    # Round the working precision up so coefficient tables are reused.
    dps = int(10 * math.ceil(dps / 10))
    coefs = _mp_coefficients(beta, delta, dps, _round_terms(K))
    with mpmath.workdps(dps):
        mz = -mpmath.mpf(z)
        s = mpmath.mpf(0)
        for c in reversed(coefs[:K]):
            s = s * mz + c
        return float(s), dps


def _round_terms(K):
    return int(64 * math.ceil(K / 64))


def wright_neg(z, params: WrightParams, tol=1e-15, max_terms=4096, rtol=None):
    """Evaluate ``W(-z; -beta, delta)`` for ``z >= 0``.

    Parameters
    ----------
    z : float
        Non-negative argument.
    params : WrightParams
    tol : float
        Absolute error target.
    max_terms : int
        Largest admissible number of series terms.
    rtol : float, optional
        If given, the absolute target is tightened to ``rtol * |W|``.

    Returns
    -------
    EvalResult
        Value and a bound on the truncation plus rounding error.

    Raises
    ------
    NonConvergence
        If the truncation bound cannot be met with ``max_terms`` terms.
    """
    z = float(z)
    if z < 0.0 or not math.isfinite(z):
        raise DomainError(f"z must be finite and non-negative, got {z!r}")
    if tol <= 0.0:
        raise DomainError("tol must be positive")
    beta, delta = float(params.beta), float(params.delta)
    if z == 0.0:
        return EvalResult(float(rgamma(delta)), 0.0)
    res = _series(z, beta, delta, tol, max_terms)
    if rtol is not None:
        for _ in range(4):
            target = rtol * abs(res.value)
            if res.err_est <= target or target == 0.0:
                break
            res = _series(z, beta, delta, min(tol, 0.5 * target), max_terms)
    return res


def _series(z, beta, delta, tol, max_terms):
    K, tail = _truncation(z, beta, delta, 0.5 * tol, max_terms)
    logc, sign = _log_coefficients(beta, delta, _round_terms(K))
    k = np.arange(K)
    lt = logc[:K] + k * math.log(z)
    mags = np.exp(lt)
    s_abs = float(mags.sum())
    live = mags > 0.0
    round_err = 4.0 * _EPS * float(np.dot(mags[live], 2.0 + np.abs(lt[live])))
    if round_err <= 0.5 * tol:
        terms = sign[:K] * mags * np.where(k % 2 == 0, 1.0, -1.0)
        return EvalResult(math.fsum(terms), tail + round_err)
    dps = max(math.log10(s_abs * K / (0.5 * tol)), 0.0) + 6
    value, used = _mp_sum(z, beta, delta, K, dps)
    return EvalResult(value, tail + s_abs * K * 10.0 ** (-used) + abs(value) * _EPS)


def wright_neg_reference(z, beta, delta, dps=60, terms=None):
    """Plain extended-precision partial sum, used as an independent check."""
    with mpmath.workdps(dps):
        mz = -mpmath.mpf(z)
        b, d = mpmath.mpf(beta), mpmath.mpf(delta)
        total = mpmath.mpf(0)
        term_pow = mpmath.mpf(1)
        fact = mpmath.mpf(1)
        n = terms or 4000
        small = 0
        for k in range(n):
            if k:
                term_pow *= mz
                fact *= k
            t = term_pow * mpmath.rgamma(d - b * k) / fact
            total += t
            if k > 10 and abs(t) < mpmath.mpf(10) ** (-dps) * (abs(total) + 1e-300):
                small += 1
                if small > 5:
                    break
            else:
                small = 0
        return total


def wright_moment(nu, params: WrightParams):
    """Exact moment ``int_0^inf z**(nu-1) W(-z; -beta, delta) dz = Gamma(nu)/Gamma(beta nu + delta)``."""
    if not nu > 0.0:
        raise DomainError("nu must be positive")
    arg = params.beta * nu + params.delta
    if _is_pole(arg):
        raise DomainError(f"beta*nu + delta = {arg} is a pole of Gamma")
    return float(math.gamma(nu) * rgamma(arg))


def wright_rl_shift(nu, c, t, params: WrightParams, tol=1e-30, rtol=1e-13, max_terms=4096):
    """``t**(delta+nu-1) W(-c t**(-beta); -beta, delta+nu)``.

    This is the fractional integral of order ``nu`` of
    ``t**(delta-1) W(-c t**(-beta); -beta, delta)``.
    """
    if not (nu > 0 and c >= 0 and t > 0):
        raise DomainError("nu > 0, c >= 0 and t > 0 are required")
    shifted = WrightParams(params.beta, params.delta + nu)
    w = wright_neg(c * t ** (-params.beta), shifted, tol=tol, rtol=rtol, max_terms=max_terms)
    return t ** (params.delta + nu - 1.0) * w.value


# ---------------------------------------------------------------------------
# Tabulated evaluation

_CHEB_DEG = 24
_CHEB_X = np.cos(np.pi * (np.arange(_CHEB_DEG + 1) + 0.5) / (_CHEB_DEG + 1))


@njit(cache=True)
def cheb_point(z, breaks, coefs):
    """Evaluate a piecewise Chebyshev table at one point; zero past the end."""
    n = breaks.shape[0] - 1
    if z >= breaks[n] or z < breaks[0]:
        return 0.0
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if breaks[mid] <= z:
            lo = mid
        else:
            hi = mid
    a = breaks[lo]
    b = breaks[lo + 1]
    x = (2.0 * z - a - b) / (b - a)
    x2 = 2.0 * x
    c = coefs[lo]
    b1 = 0.0
    b2 = 0.0
    for j in range(c.shape[0] - 1, 0, -1):
        tmp = x2 * b1 - b2 + c[j]
        b2 = b1
        b1 = tmp
    return x * b1 - b2 + c[0]


@njit(cache=True)
def _cheb_array(z, breaks, coefs, out):
    for i in range(z.size):
        out.flat[i] = cheb_point(z.flat[i], breaks, coefs)


class WrightTable:
    """Piecewise Chebyshev table of ``W(-z; -beta, delta)`` on ``[0, z_max]``.

    Beyond ``z_max`` the envelope is below ``exp(-decay)`` and the table
    returns zero.  Panels are refined until the trailing Chebyshev
    coefficients fall below ``rtol`` times the panel magnitude.
    """

    def __init__(self, beta, delta, decay=40.0, rtol=1e-14, max_terms=8192):
        self.params = WrightParams(beta, delta)
        self.beta, self.delta = float(beta), float(delta)
        self.decay = float(decay)
        self.rtol = float(rtol)
        self.max_terms = max_terms
        self.z_max = float(decay_argument(decay, beta))
        self._build()

    def _values(self, zs):
        out = np.empty(len(zs))
        env = np.exp(-decay_exponent(zs, self.beta))
        for i, z in enumerate(zs):
            tol = max(self.rtol * 1e-3 * env[i], 1e-300)
            out[i] = wright_neg(z, self.params, tol=tol, max_terms=self.max_terms).value
        return out

    def _fit(self, a, b):
        zs = 0.5 * (a + b) + 0.5 * (b - a) * _CHEB_X
        v = self._values(zs)
        c = dct(v, type=2) / (_CHEB_DEG + 1)
        c[0] *= 0.5
        return c, v

    def _build(self):
        width = min(1.0, self.z_max / 8.0)
        todo = list(zip(*[np.linspace(0.0, self.z_max, int(math.ceil(self.z_max / width)) + 1)[s]
                          for s in (slice(None, -1), slice(1, None))]))
        done = []
        scale = abs(float(rgamma(self.delta))) or 1.0
        while todo:
            a, b = todo.pop()
            c, v = self._fit(a, b)
            mag = np.max(np.abs(v))
            scale = max(scale, mag)
            vmin = np.min(np.abs(v))
            tail = np.max(np.abs(c[-4:]))
            spread = mag > 1e3 * vmin and np.all(np.sign(v) == np.sign(v[0]))
            if (tail > self.rtol * mag or spread) and b - a > 1e-6 * self.z_max:
                m = 0.5 * (a + b)
                todo.extend([(a, m), (m, b)])
            else:
                done.append((a, b, c))
        done.sort()
        self.breaks = np.array([d[0] for d in done] + [done[-1][1]])
        self.coefs = np.ascontiguousarray(np.array([d[2] for d in done]))
        self.scale = scale

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        out = np.empty(z.shape)
        _cheb_array(np.ascontiguousarray(z), self.breaks, self.coefs, out)
        return out if out.ndim else float(out)


@lru_cache(maxsize=512)
def _cached_table(beta, delta, decay, rtol):
    return WrightTable(beta, delta, decay=decay, rtol=rtol)


def wright_table(beta, delta, decay=40.0, rtol=1e-14):
    """Shared table for ``(beta, delta)``; parameters are rounded to 15 digits."""
    return _cached_table(float(f"{beta:.15g}"), float(f"{delta:.15g}"), float(decay), float(rtol))


# ---------------------------------------------------------------------------
# Numeric checks of the closed forms


def wright_profile(t, c, params: WrightParams, cutoff=60.0):
    """``t**(delta-1) W(-c t**(-beta); -beta, delta)`` at an array of ``t >= 0``.

    Points where the decay exponent exceeds ``cutoff`` (including ``t = 0``)
    return 0, since the value there is below ``exp(-cutoff)`` times the power.
    """
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    z = np.zeros_like(t)
    z[pos] = c * t[pos] ** -params.beta
    keep = pos & (decay_exponent(z, params.beta) <= cutoff)
    for i in np.flatnonzero(keep):
        w = wright_neg(z.flat[i], params, tol=1e-30, rtol=1e-13, max_terms=4096)
        out.flat[i] = t.flat[i] ** (params.delta - 1.0) * w.value
    return out


def moment_quadrature(nu, params: WrightParams, cutoff=40.0, panels_per_unit=4):
    """Numeric ``int_0^inf z**(nu-1) W(-z; -beta, delta) dz``.

    The integral is truncated where the decay exponent reaches ``cutoff``;
    the error estimate adds the Gauss-Kronrod panel gaps and a bound on the
    discarded tail from the local decay rate of the envelope.
    """
    if not nu > 0:
        raise DomainError("nu must be positive")
    b = params.beta
    z_end = float(decay_argument(cutoff, b))
    # geometric panels resolve z**(nu-1) at the origin
    z_lo = min(1.0, 0.25 * z_end)
    geo = np.exp(np.linspace(math.log(1e-16 * z_lo), math.log(z_lo), 25))
    uni = np.linspace(z_lo, z_end, max(2, int(math.ceil(panels_per_unit * (z_end - z_lo)))) + 1)
    br = np.concatenate([geo, uni[1:]])
    x, wk, we = panel_nodes(br)

    def f(zs):
        return np.array([z ** (nu - 1.0) * wright_neg(z, params, tol=1e-17, rtol=1e-12,
                                                      max_terms=4096).value for z in zs])

    fx = f(x)
    val = float(np.dot(wk, fx))
    err = float(np.abs((we * fx).reshape(-1, 15).sum(axis=1)).sum())
    # below the first break W = 1/Gamma(delta) - z/Gamma(delta - beta) + ...
    z0 = br[0]
    val += float(rgamma(params.delta)) * z0 ** nu / nu
    head = abs(float(rgamma(params.delta - b))) * z0 ** (nu + 1.0) / (nu + 1.0)
    # tail: the envelope exp(-Y) has d(log)/dz = Y / ((1-beta) z)
    end = abs(f(np.array([z_end]))[0])
    tail = 10.0 * end * (1.0 - b) * z_end / cutoff
    return EvalResult(val, err + head + tail)
