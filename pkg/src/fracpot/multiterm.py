"""Multi-term convolution kernels S^mu_m and w_mu(p, t).

Each factor ``h_j(t) = t**(mu_j - 1) W(-l_j t**(-alpha_j); -alpha_j, mu_j)``
is integrated in its mass variable ``zeta = l_j u**(-alpha_j)``, in which
the measure ``h_j(u) du`` becomes ``u**mu_j W(-zeta) d(log zeta) / alpha_j``
and the integration range is a fixed, bounded interval of ``log zeta``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import rgamma

from .config import EvalResult, QuadratureConfig
from .errors import ConfigError, DomainError, QuadratureFailure
from .quadrature import GK_WE, GK_WK, GK_X, panel_nodes
from .wright import WrightParams, cheb_point, wright_neg, wright_table

_DEFAULT_QUAD = QuadratureConfig()
# relative accuracy assumed for each tabulated factor value
_ROUNDING = 1e-13


@dataclass(frozen=True)
class MultiTermSpec:
    """Orders ``alpha_1 < ... < alpha_m`` in (0, 1) and weights ``lambda_k > 0``."""

    orders: tuple
    weights: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.orders)
        w = tuple(float(v) for v in self.weights)
        object.__setattr__(self, "orders", a)
        object.__setattr__(self, "weights", w)
        if len(a) == 0 or len(a) != len(w):
            raise ConfigError("orders and weights must be non-empty and of equal length")
        if any(not 0.0 < v < 1.0 for v in a):
            raise ConfigError(f"orders must lie in (0, 1): {a}")
        if any(y <= x for x, y in zip(a, a[1:])):
            raise ConfigError(f"orders must be strictly increasing: {a}")
        if any(not (v > 0.0 and math.isfinite(v)) for v in w):
            raise ConfigError(f"weights must be positive: {w}")

    @property
    def m(self):
        return len(self.orders)

    @property
    def alpha_m(self):
        return self.orders[-1]

    @property
    def lambda_m(self):
        return self.weights[-1]


@dataclass(frozen=True)
class MuSplit:
    """Decomposition ``mu = sum(parts)`` across the convolution factors."""

    mu: float
    parts: tuple

    def __post_init__(self):
        parts = tuple(float(v) for v in self.parts)
        object.__setattr__(self, "parts", parts)
        object.__setattr__(self, "mu", float(self.mu))
        if not parts:
            raise ConfigError("a split needs at least one part")
        if abs(math.fsum(parts) - self.mu) > 1e-12 * max(1.0, abs(self.mu)):
            raise ConfigError(f"parts {parts} do not sum to mu={self.mu}")

    @classmethod
    def even(cls, mu, m):
        return cls(mu, (mu / m,) * m)


@dataclass(frozen=True)
class BoundParams:
    """Constants of the ``w_mu`` majorant; ``big_C`` is fitted, never asserted."""

    kappa: float
    theta: float
    big_C: float = 1.0


def _split(spec, split, mu):
    if split is None:
        split = MuSplit.even(mu, spec.m)
    if len(split.parts) != spec.m:
        raise ConfigError("split length must equal the number of orders")
    return split


@dataclass(frozen=True)
class _Factor:
    alpha: float
    mu: float
    breaks: np.ndarray
    coefs: np.ndarray

    @property
    def z_max(self):
        return float(self.breaks[-1])

    def u_min(self, lf):
        """Below this argument the factor is zero to table accuracy."""
        return (lf / self.z_max) ** (1.0 / self.alpha)

    def __call__(self, u, lf):
        tab = _table(self.alpha, self.mu, None)
        return u ** (self.mu - 1.0) * tab(lf * u ** (-self.alpha))


def _table(alpha, mu, quad):
    q = quad or _DEFAULT_QUAD
    return wright_table(alpha, mu, decay=q.decay, rtol=q.wright_rtol)


def factors_for(spec, parts, quad=None):
    """Tabulated factors ``h_j`` for the orders of ``spec`` and exponents ``parts``."""
    out = []
    for a, mu in zip(spec.orders if isinstance(spec, MultiTermSpec) else spec, parts):
        tab = _table(a, mu, quad)
        out.append(_Factor(a, float(mu), tab.breaks, tab.coefs))
    return out


# ---------------------------------------------------------------------------
# Compiled two-factor convolution


@njit(cache=True)
def _half(sig, lA, lB, aA, aB, muA, muB, bA, cA, bB, cB, width, rnd):
    """int_0^{sig/2} hA(sig - u) hB(u) du in the mass variable of hB."""
    zc = bB[bB.shape[0] - 1]
    za = lB * (0.5 * sig) ** (-aB)
    if za >= zc:
        return 0.0, 0.0
    ra = math.log(za)
    rc = math.log(zc)
    n = max(1, int(math.ceil((rc - ra) / width)))
    h = (rc - ra) / n
    total = 0.0
    err = 0.0
    for i in range(n):
        c = ra + (i + 0.5) * h
        sk = 0.0
        se = 0.0
        sa = 0.0
        for q in range(15):
            r = c + 0.5 * h * GK_X[q]
            u = 0.5 * sig * math.exp(-(r - ra) / aB)
            g = u ** muB * cheb_point(math.exp(r), bB, cB) / aB
            if g == 0.0:
                continue
            v = sig - u
            f = g * v ** (muA - 1.0) * cheb_point(lA * v ** (-aA), bA, cA)
            sk += GK_WK[q] * f
            se += GK_WE[q] * f
            sa += GK_WK[q] * abs(f)
        total += 0.5 * h * sk
        err += abs(0.5 * h * se) + rnd * 0.5 * h * sa
    return total, err


@njit(cache=True)
def _conv2(sig, l1, l2, a1, a2, mu1, mu2, b1, c1, b2, c2, width, rnd, out, err):
    for i in range(sig.shape[0]):
        v1, e1 = _half(sig[i], l1[i], l2[i], a1, a2, mu1, mu2, b1, c1, b2, c2, width, rnd)
        v2, e2 = _half(sig[i], l2[i], l1[i], a2, a1, mu2, mu1, b2, c2, b1, c1, width, rnd)
        out[i] = v1 + v2
        err[i] = e1 + e2


def convolve(sig, lfs, factors, width):
    """``(h_1 * ... * h_m)(sig)`` for arrays of times and factor arguments.

    Parameters
    ----------
    sig : ndarray, shape (N,)
    lfs : ndarray, shape (N, m)
        Argument scale ``l_j`` of each factor per case.
    factors : list of _Factor
    width : float
        Panel width in the logarithmic mass variable.

    Returns
    -------
    value, err : ndarray, shape (N,)
    """
    sig = np.ascontiguousarray(sig, dtype=float)
    lfs = np.asarray(lfs, dtype=float).reshape(sig.shape[0], len(factors))
    m = len(factors)
    if m == 1:
        f = factors[0]
        v = f(sig, lfs[:, 0])
        return v, _ROUNDING * np.abs(v)
    if m == 2:
        f1, f2 = factors
        out = np.empty_like(sig)
        err = np.empty_like(sig)
        _conv2(sig, np.ascontiguousarray(lfs[:, 0]), np.ascontiguousarray(lfs[:, 1]),
               f1.alpha, f2.alpha, f1.mu, f2.mu, f1.breaks, f1.coefs,
               f2.breaks, f2.coefs, width, _ROUNDING, out, err)
        return out, err
    return _convolve_recursive(sig, lfs, factors, width)


def _convolve_recursive(sig, lfs, factors, width):
    last, rest = factors[-1], factors[:-1]
    n = sig.shape[0]
    value = np.zeros(n)
    err = np.zeros(n)
    # Part A: the last factor's argument u <= sig/2, in its mass variable.
    nodes, owner, weights, eweights = [], [], [], []
    for i in range(n):
        za = lfs[i, -1] * (0.5 * sig[i]) ** (-last.alpha)
        if za >= last.z_max:
            continue
        ra, rc = math.log(za), math.log(last.z_max)
        br = np.linspace(ra, rc, max(1, int(math.ceil((rc - ra) / width))) + 1)
        r, wk, we = panel_nodes(br)
        nodes.append(r - ra)
        owner.append(np.full(r.shape, i))
        weights.append(wk)
        eweights.append(we)
    if nodes:
        dr = np.concatenate(nodes)
        own = np.concatenate(owner)
        wk = np.concatenate(weights)
        we = np.concatenate(eweights)
        u = 0.5 * sig[own] * np.exp(-dr / last.alpha)
        zeta = lfs[own, -1] * u ** (-last.alpha)
        g = u ** last.mu * _table(last.alpha, last.mu, None)(zeta) / last.alpha
        inner, ierr = convolve(sig[own] - u, lfs[own, :-1], rest, width)
        f = g * inner
        value += np.bincount(own, wk * f, n)
        err += _panel_errors(own, we * f, n) + np.bincount(own, np.abs(wk * g) * ierr, n)
    # Part B: the remaining factors' total argument v <= sig/2.
    nodes, owner, weights, eweights = [], [], [], []
    for i in range(n):
        vlo = sum(f.u_min(l) for f, l in zip(rest, lfs[i, :-1]))
        if vlo >= 0.5 * sig[i]:
            continue
        lo, hi = math.log(vlo), math.log(0.5 * sig[i])
        br = np.exp(np.linspace(lo, hi, max(1, int(math.ceil((hi - lo) / (0.5 * width)))) + 1))
        v, wk, we = panel_nodes(br)
        nodes.append(v)
        owner.append(np.full(v.shape, i))
        weights.append(wk)
        eweights.append(we)
    if nodes:
        v = np.concatenate(nodes)
        own = np.concatenate(owner)
        wk = np.concatenate(weights)
        we = np.concatenate(eweights)
        inner, ierr = convolve(v, lfs[own, :-1], rest, width)
        hb = last(sig[own] - v, lfs[own, -1])
        f = inner * hb
        value += np.bincount(own, wk * f, n)
        err += _panel_errors(own, we * f, n) + np.bincount(own, np.abs(wk * hb) * ierr, n)
    return value, err


def _panel_errors(owner, contrib, n):
    # Sum |error rule| per 15-node panel, then per owner.
    per_panel = contrib.reshape(-1, 15).sum(axis=1)
    return np.bincount(owner[::15], np.abs(per_panel), n)


# ---------------------------------------------------------------------------
# Public operations


def h_factor(t, mu_j, lf_j, alpha_j, tol=1e-15, max_terms=4096):
    """Single factor ``t**(mu_j - 1) W(-lf_j t**(-alpha_j); -alpha_j, mu_j)``."""
    if not (t > 0 and lf_j > 0 and 0 < alpha_j < 1):
        raise DomainError("t > 0, lf_j > 0 and alpha_j in (0, 1) are required")
    w = wright_neg(lf_j * t ** (-alpha_j), WrightParams(alpha_j, mu_j), tol=tol,
                   max_terms=max_terms)
    return t ** (mu_j - 1.0) * w.value


def w_mu(sig, p, spec: MultiTermSpec, mu=0.0, split=None, quad=None):
    """Vectorized ``w_mu(p, sig)`` returning value and error arrays."""
    quad = quad or _DEFAULT_QUAD
    split = _split(spec, split, mu)
    sig, p = np.broadcast_arrays(np.asarray(sig, float), np.asarray(p, float))
    shape = sig.shape
    lfs = p.reshape(-1, 1) * np.array(spec.weights)
    facs = factors_for(spec, split.parts, quad)
    v, e = convolve(sig.ravel(), lfs, facs, quad.conv_width)
    return v.reshape(shape), e.reshape(shape)


def s_mu(t, p, spec: MultiTermSpec, split: MuSplit | None = None, quad=None, mu=None):
    """``w_mu(p, t) = S^mu_m(t; -lambda_1 p, ..., -lambda_m p)`` with an error estimate.

    Raises
    ------
    QuadratureFailure
        If ``quad.strict`` and the estimate exceeds ``atol + rtol |value|``.
    """
    if not (t > 0 and p > 0):
        raise DomainError("t and p must be positive")
    quad = quad or _DEFAULT_QUAD
    if split is None:
        split = MuSplit.even(0.0 if mu is None else mu, spec.m)
    v, e = w_mu(np.array([t]), np.array([p]), spec, split=split, quad=quad)
    res = EvalResult(float(v[0]), float(e[0]))
    _check(res, quad)
    return res


def _check(res, quad):
    if quad.strict and np.any(res.err_est > quad.atol + quad.rtol * np.abs(res.value)):
        raise QuadratureFailure(f"error estimate {np.max(res.err_est)} exceeds tolerance")


def w_small_p(sig, mu, spec):
    """Two-term expansion ``w_mu(p, sig) = w0 + w1 p + O(p**2)`` as ``p -> 0``.

    ``w0 = sig**(mu-1) / Gamma(mu)`` and
    ``w1 = -sum_k lambda_k sig**(mu-alpha_k-1) / Gamma(mu - alpha_k)``.
    """
    sig = np.asarray(sig, dtype=float)
    w0 = sig ** (mu - 1.0) * rgamma(mu)
    w1 = np.zeros_like(sig)
    for a, lam in zip(spec.orders, spec.weights):
        w1 = w1 - lam * sig ** (mu - a - 1.0) * rgamma(mu - a)
    return w0, w1


def p_range(sig, spec, mu_parts, quad):
    """Scale and cut-off of the p-integral at time ``sig``.

    Returns ``(p_scale, p_max)``; ``w_mu(p, sig)`` vanishes to table
    accuracy for ``p > p_max``.
    """
    sig = np.asarray(sig, dtype=float)
    scale = np.full(sig.shape, np.inf)
    pmax = np.full(sig.shape, np.inf)
    for a, lam, mu in zip(spec.orders, spec.weights, mu_parts):
        zmax = _table(a, mu, quad).z_max
        scale = np.minimum(scale, sig ** a / lam)
        pmax = np.minimum(pmax, zmax * sig ** a / lam)
    return scale, pmax


def w_kappa_sup(spec):
    """Supremum of admissible decay rates in the ``w_mu`` majorant."""
    a, lam = spec.alpha_m, spec.lambda_m
    return (1.0 - a) * (a ** a * lam) ** (1.0 / (1.0 - a))


def w_theta(mu):
    """Smallest admissible power ``theta``: 0, or -1 when ``-mu`` is a non-negative integer."""
    return -1.0 if (mu <= 0 and abs(mu - round(mu)) < 1e-12) else 0.0


def w_majorant(p, t, mu, spec, kappa, theta=None):
    """``t**(mu-1) (p t**-alpha_m)**(-theta) exp(-kappa (p t**-alpha_m)**(1/(1-alpha_m)))``."""
    if theta is None:
        theta = w_theta(mu)
    a = spec.alpha_m
    s = np.asarray(p, float) * np.asarray(t, float) ** (-a)
    return np.asarray(t, float) ** (mu - 1.0) * s ** (-theta) * np.exp(-kappa * s ** (1.0 / (1.0 - a)))


def w_bound_sweep(spec, mu, ps, ts, kappa_fraction=0.8, quad=None):
    """Ratios ``|w_mu| / majorant`` on the grid ``ps x ts``.

    Returns the ratio grid and the fitted constant (its maximum).
    """
    kappa = kappa_fraction * w_kappa_sup(spec)
    P, T = np.meshgrid(np.asarray(ps, float), np.asarray(ts, float), indexing="ij")
    v, _ = w_mu(T, P, spec, mu=mu, quad=quad)
    maj = w_majorant(P, T, mu, spec, kappa)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(v == 0.0, 0.0, np.abs(v) / maj)
    return ratio, float(np.max(ratio))


# ---------------------------------------------------------------------------
# Window integrals of S^0_m


def s0_window_direct(t, delta, lfs, alphas, quad=None):
    """``int_{t-delta}^t S^0_m(t - tau) d tau`` by quadrature in ``sigma = t - tau``."""
    quad = quad or _DEFAULT_QUAD
    if not 0.0 < delta < t:
        raise DomainError("0 < delta < t is required")
    lfs = np.asarray(lfs, float)
    alphas = tuple(float(a) for a in alphas)
    facs = factors_for(alphas, (0.0,) * len(alphas), quad)
    lo = sum(f.u_min(l) for f, l in zip(facs, lfs))
    if lo >= delta:
        return EvalResult(0.0, 0.0)
    br = np.exp(np.linspace(math.log(lo), math.log(delta),
                            max(1, int(math.ceil(math.log(delta / lo) / quad.tau_width))) + 1))
    s, wk, we = panel_nodes(br)
    v, e = convolve(s, np.tile(lfs, (s.size, 1)), facs, quad.conv_width)
    err = np.abs((we * v).reshape(-1, 15).sum(axis=1)).sum() + np.dot(np.abs(wk), e)
    res = EvalResult(float(np.dot(wk, v)), float(err))
    _check(res, quad)
    return res


def s0_window_nested(delta, lfs, alphas, quad=None):
    """Iterated tail integral of ``W(-zeta; -alpha_i, 1 - alpha_i)``.

    The innermost lower limit is ``l_1 / delta_1**alpha_1`` where
    ``delta_1`` is the window left after the outer variables; an exhausted
    window contributes zero.  The value lies in ``[0, 1]``.
    """
    quad = quad or _DEFAULT_QUAD
    if not delta > 0:
        raise DomainError("delta must be positive")
    lfs = tuple(float(v) for v in lfs)
    alphas = tuple(float(a) for a in alphas)
    v, e = _nested(np.array([float(delta)]), lfs, alphas, quad)
    res = EvalResult(float(np.clip(v[0], 0.0, 1.0)), float(e[0]))
    _check(res, quad)
    return res


class _TailTable:
    """``G(a) = int_a^inf W(-zeta; -alpha, 1 - alpha) d zeta`` for arrays of ``a``."""

    def __init__(self, alpha, quad):
        self.tab = _table(alpha, 1.0 - alpha, quad)
        zc = self.tab.z_max
        self.br = np.linspace(0.0, zc, max(8, int(math.ceil(zc / 0.25))) + 1)
        x, wk, we = panel_nodes(self.br)
        f = self.tab(x)
        pan = (wk * f).reshape(-1, 15).sum(axis=1)
        self.perr = np.abs((we * f).reshape(-1, 15).sum(axis=1))
        # tail sums from each break to the end
        self.cum = np.concatenate([np.cumsum(pan[::-1])[::-1], [0.0]])
        self.cerr = np.concatenate([np.cumsum(self.perr[::-1])[::-1], [0.0]])

    def __call__(self, a):
        a = np.asarray(a, float)
        out = np.zeros(a.shape)
        err = np.zeros(a.shape)
        inside = a < self.br[-1]
        ai = np.maximum(a[inside], 0.0)
        j = np.clip(np.searchsorted(self.br, ai, side="right") - 1, 0, len(self.br) - 2)
        b = self.br[j + 1]
        brk = np.stack([ai, b], axis=-1)
        x, wk, we = panel_nodes(brk)
        f = self.tab(x)
        out[inside] = (wk * f).sum(axis=-1) + self.cum[j + 1]
        err[inside] = np.abs((we * f).sum(axis=-1)) + self.cerr[j + 1]
        return out, err


_TAILS = {}


def _tail(alpha, quad):
    key = (alpha, quad.decay, quad.wright_rtol)
    if key not in _TAILS:
        _TAILS[key] = _TailTable(alpha, quad)
    return _TAILS[key]


def _nested(deltas, lfs, alphas, quad):
    m = len(alphas)
    if m == 1:
        with np.errstate(divide="ignore"):
            a = lfs[0] / np.maximum(deltas, 0.0) ** alphas[0]
        return _tail(alphas[0], quad)(a)
    am, lm = alphas[-1], lfs[-1]
    tab = _table(am, 1.0 - am, quad)
    zc = tab.z_max
    # support of the inner window function starts at vlo
    vlo = sum((l / _table(a, 1.0 - a, quad).z_max) ** (1.0 / a)
              for a, l in zip(alphas[:-1], lfs[:-1]))
    n = deltas.shape[0]
    value = np.zeros(n)
    err = np.zeros(n)
    nodes, owner, weights, eweights = [], [], [], []
    for i, d in enumerate(deltas):
        if d <= vlo:
            continue
        a_m = lm / d ** am
        if a_m >= zc:
            continue
        e_hi = math.log(zc / a_m)
        e_lo = min(-am * math.log1p(-vlo / d), 0.5 * e_hi)
        pieces = []
        if e_lo < min(1.0, e_hi):
            top = min(1.0, e_hi)
            k = max(1, int(math.ceil(math.log(top / e_lo) / 0.5)))
            pieces.append(np.exp(np.linspace(math.log(e_lo), math.log(top), k + 1)))
        if e_hi > 1.0:
            start = max(1.0, e_lo)
            pieces.append(np.linspace(start, e_hi, max(1, int(math.ceil((e_hi - start) / 0.5))) + 1))
        br = np.unique(np.concatenate(pieces))
        eps, wk, we = panel_nodes(br)
        nodes.append(eps)
        owner.append(np.full(eps.shape, i))
        weights.append(wk)
        eweights.append(we)
    if not nodes:
        return value, err
    eps = np.concatenate(nodes)
    own = np.concatenate(owner)
    wk = np.concatenate(weights)
    we = np.concatenate(eweights)
    d = deltas[own]
    zeta = lm / d ** am * np.exp(eps)
    rem = -d * np.expm1(-eps / am)
    inner, ierr = _nested(rem, lfs[:-1], alphas[:-1], quad)
    g = tab(zeta) * zeta
    f = g * inner
    value += np.bincount(own, wk * f, n)
    err += _panel_errors(own, we * f, n) + np.bincount(own, np.abs(wk * g) * ierr, n)
    return value, err
