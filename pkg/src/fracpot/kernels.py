"""Fundamental solutions E and Z and the kernels Gamma^mu_1.

``Gamma^mu_1(x, t) = (4 pi)**-0.5 int_0^inf p**-0.5 exp(-x**2/(4p)) w_mu(p, t) dp``.
The p-integral uses Gauss-Kronrod panels that are uniform in ``log p`` on
``[p_lo, p_max]``.  On ``[0, p_lo]`` the expansion ``w_mu = w0 + w1 p`` is
integrated against the Gaussian factor in closed form, so arbitrarily small
``|x|`` need no special mesh.  x-derivatives act on the Gaussian factor only.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import erfc, rgamma

from .config import EvalResult, QuadratureConfig
from .errors import DomainError, QuadratureFailure, SingularInput
from .multiterm import MultiTermSpec, MuSplit, p_range, w_mu, w_small_p
from .wright import WrightParams, wright_neg
from .quadrature import panel_nodes

_DEFAULT_QUAD = QuadratureConfig()
_NORM = 1.0 / math.sqrt(4.0 * math.pi)
_SQRT_PI = math.sqrt(math.pi)


def E_terms(spec):
    """Coefficients ``{mu: c}`` with ``E = sum c Gamma^mu_1``."""
    return ((0.0, 1.0),)


def Z_terms(spec):
    """Coefficients ``{mu: c}`` with ``Z = sum c Gamma^mu_1``."""
    return tuple((1.0 - a, lam) for a, lam in zip(spec.orders, spec.weights))


def _endcap(order, y, a, w0, w1):
    """``int_0^a`` of the order-``order`` Gaussian factor times ``w0 + w1 p``.

    Broadcasts over ``y``; ``a``, ``w0`` and ``w1`` must broadcast against it.
    """
    b = 0.25 * y * y
    z = b / a
    ez = np.exp(-z)
    sa = np.sqrt(a)
    erf_part = _SQRT_PI * np.sqrt(b) * erfc(np.sqrt(z))
    i_m12 = 2.0 * (sa * ez - erf_part)  # int p^-1/2 e^{-b/p}
    if order == 0:
        i_p12 = (2.0 / 3.0) * (a * sa * ez - b * i_m12)
        return w0 * i_m12 + w1 * i_p12
    if order == 1:
        return -np.sign(y) * _SQRT_PI * w0 * erfc(np.sqrt(z)) - 0.5 * y * w1 * i_m12
    # b/p^2 - 1/(2p) weighted integrals combined analytically
    return w0 * ez / sa + w1 * (2.0 * erf_part - sa * ez)


def _gauss_factor(order, y, p):
    b = 0.25 * y * y
    g = np.exp(-b / p) / np.sqrt(p)
    if order == 0:
        return g
    if order == 1:
        return -0.5 * y * g / p
    return g * (b / p - 0.5) / p


class KernelBank:
    """Discretized ``w_mu(p, sigma)`` for a set of times and exponents.

    Parameters
    ----------
    sig : array_like
        Times at which the kernels are needed.
    spec : MultiTermSpec
    terms : tuple of (mu, coefficient)
        The kernel is ``sum coefficient * Gamma^mu_1``.
    quad : QuadratureConfig
    """

    def __init__(self, sig, spec: MultiTermSpec, terms, quad=None):
        quad = quad or _DEFAULT_QUAD
        self.spec, self.terms, self.quad = spec, tuple(terms), quad
        sig = np.atleast_1d(np.asarray(sig, dtype=float))
        if np.any(sig <= 0):
            raise SingularInput("kernels require t > 0")
        self.sig = sig
        m = spec.m
        scale, pmax = None, None
        for mu, _ in self.terms:
            s, pm = p_range(sig, spec, MuSplit.even(mu, m).parts, quad)
            scale = s
            pmax = pm if pmax is None else np.maximum(pmax, pm)
        self.p_lo = quad.p_floor * scale
        span = np.log(pmax / self.p_lo)
        n = max(1, int(math.ceil(np.max(span) / quad.p_width)))
        br = np.linspace(np.log(self.p_lo), np.log(pmax), n + 1, axis=-1)
        r, wk, we = panel_nodes(br)
        p = np.exp(r)
        self.p, self.wk, self.we = p, wk * p, we * p
        self.n_panels = n
        w = np.zeros_like(p)
        werr = np.zeros_like(p)
        w0 = np.zeros_like(sig)
        w1 = np.zeros_like(sig)
        for mu, c in self.terms:
            v, e = w_mu(np.broadcast_to(sig[:, None], p.shape), p, spec, mu=mu, quad=quad)
            w += c * v
            werr += abs(c) * e
            a0, a1 = w_small_p(sig, mu, spec)
            w0 += c * a0
            w1 += c * a1
        self.w, self.werr, self.w0, self.w1 = w, werr, w0, w1
        # residual of the two-term expansion at the first node
        model = w0 + w1 * p[:, 0]
        self.cap_rel = np.abs(w[:, 0] - model) / np.maximum(np.abs(model), 1e-300)

    def evaluate(self, y, order=0, index=None):
        """Kernel (or its x-derivative of the given order) at ``(y, sig)``.

        Parameters
        ----------
        y : ndarray
            Shape ``(Ns,)`` or ``(Ns, Nx)`` aligned with the bank times, or
            any shape when ``index`` selects the times.
        order : {0, 1, 2}
        index : ndarray of int, optional
            Time index per entry of ``y``.

        Returns
        -------
        value, err : ndarray
        """
        y = np.asarray(y, dtype=float)
        sl = slice(None) if index is None else np.asarray(index)
        p, wk, we = self.p[sl], self.wk[sl], self.we[sl]
        w, werr = self.w[sl], self.werr[sl]
        extra = y.ndim - (1 if index is None else np.ndim(sl))
        expand = (slice(None),) * (p.ndim - 1) + (None,) * extra + (slice(None),)
        p, wk, we, w, werr = (a[expand] for a in (p, wk, we, w, werr))
        g = _gauss_factor(order, y[..., None], p)
        val = np.einsum("...k,...k->...", wk * w, g)
        pan = ((we * w) * g).reshape(g.shape[:-1] + (self.n_panels, 15)).sum(axis=-1)
        err = np.abs(pan).sum(axis=-1) + np.einsum("...k,...k->...", np.abs(wk * g), werr)
        pick = (lambda a: a[sl][(slice(None),) * np.ndim(a[sl]) + (None,) * extra])
        cap = _endcap(order, y, pick(self.p_lo), pick(self.w0), pick(self.w1))
        err = err + pick(self.cap_rel) * np.abs(cap)
        if order == 1:
            val = np.where(y == 0.0, 0.0, val + cap)
        else:
            val = val + cap
        return _NORM * val, _NORM * err


@lru_cache(maxsize=128)
def _bank(t, spec, terms, quad):
    return KernelBank(np.array([t]), spec, terms, quad)


def _evaluate(terms, x, t, spec, quad, order):
    quad = quad or _DEFAULT_QUAD
    if not t > 0:
        raise SingularInput("kernels require t > 0")
    x_arr = np.asarray(x, dtype=float)
    if order == 2 and np.any(x_arr == 0.0):
        raise SingularInput("second x-derivatives are not evaluated at x = 0")
    bank = _bank(float(t), spec, tuple(terms), quad)
    v, e = bank.evaluate(x_arr.reshape(1, -1), order)
    v, e = v.reshape(x_arr.shape), e.reshape(x_arr.shape)
    if x_arr.ndim == 0:
        v, e = float(v), float(e)
    res = EvalResult(v, e)
    if quad.strict and np.any(e > quad.atol + quad.rtol * np.abs(v)):
        raise QuadratureFailure(f"kernel error estimate {np.max(e)} exceeds tolerance")
    return res


def gamma1(mu, x, t, spec, quad=None, order=0):
    """``Gamma^mu_1(x, t)`` or its x-derivative of order 1 or 2.

    The value at ``x = 0`` is finite for every ``mu`` since
    ``w_mu(p, t) -> t**(mu-1)/Gamma(mu)`` as ``p -> 0``.

    Raises
    ------
    SingularInput
        For ``t <= 0``, or ``order == 2`` at ``x == 0``.
    """
    return _evaluate(((float(mu), 1.0),), x, t, spec, quad, order)


def kernel_E(x, t, spec, quad=None):
    """Fundamental solution ``E = Gamma^0_1``."""
    return _evaluate(E_terms(spec), x, t, spec, quad, 0)


def kernel_E_dx(x, t, spec, quad=None):
    """``E_x``; odd in x with ``E_x(0, t) = 0``."""
    return _evaluate(E_terms(spec), x, t, spec, quad, 1)


def kernel_E_dxx(x, t, spec, quad=None):
    """``E_xx`` for ``x != 0``."""
    return _evaluate(E_terms(spec), x, t, spec, quad, 2)


def kernel_Z(x, t, spec, quad=None):
    """Fundamental solution ``Z = sum_k lambda_k Gamma^{1-alpha_k}_1``."""
    return _evaluate(Z_terms(spec), x, t, spec, quad, 0)


def kernel_Z_dx(x, t, spec, quad=None):
    """``Z_x``; odd in x with ``Z_x(0, t) = 0`` by convention.

    ``Z_x`` is discontinuous at ``x = 0``: the one-sided limits are
    ``-+ sum_k lambda_k t**(-alpha_k) / (2 Gamma(1 - alpha_k))``.
    """
    return _evaluate(Z_terms(spec), x, t, spec, quad, 1)


def kernel_Z_dxx(x, t, spec, quad=None):
    """``Z_xx`` for ``x != 0``."""
    return _evaluate(Z_terms(spec), x, t, spec, quad, 2)


def Z_dx_jump(t, spec):
    """One-sided limit ``Z_x(0+, t)``."""
    return -0.5 * sum(lam * t ** (-a) * rgamma(1.0 - a) for a, lam in zip(spec.orders, spec.weights))


def mass_Z(t, spec, quad=None, panels_per_unit=4):
    """``int_R Z(x, t) dx`` by Gauss-Kronrod panels on ``[0, R]``.

    ``R`` is where the Gaussian factor at the largest retained ``p`` is
    below ``exp(-decay)``, beyond which ``Z`` vanishes to table accuracy.
    """
    quad = quad or _DEFAULT_QUAD
    bank = _bank(float(t), spec, Z_terms(spec), quad)
    R = math.sqrt(4.0 * float(bank.p[0, -1]) * quad.decay)
    # panels graded toward the origin, where Z has a cusp
    br = np.unique(np.concatenate([[0.0], R * np.geomspace(1e-8, 1.0, 60)]))
    x, wk, we = panel_nodes(br)
    v, e = bank.evaluate(x.reshape(1, -1), 0)
    v, e = v[0], e[0]
    val = 2.0 * float(np.dot(wk, v))
    err = 2.0 * (float(np.abs((we * v).reshape(-1, 15).sum(axis=1)).sum()) + float(np.dot(wk, e)))
    # the first panel [0, 1e-8 R] is at most |Z(0)| * 1e-8 R away from linear; bound kept in err
    return EvalResult(val, err)


def single_term_closed_form(kind, x, t, alpha, lam=1.0):
    """Kernels of ``lam D^alpha u - u_xx`` through one Wright function.

    With ``b = alpha/2`` and ``zeta = sqrt(lam) |x| t**-b``:

    * ``E   = t**(b-1) W(-zeta; -b, b) / (2 sqrt(lam))``
    * ``E_x = -sign(x) W(-zeta; -b, 0) / (2 t)``
    * ``Z   = sqrt(lam) t**-b W(-zeta; -b, 1-b) / 2``
    * ``Z_x = -sign(x) lam t**-alpha W(-zeta; -b, 1-alpha) / 2``

    ``sign(0) = 0`` so both derivatives vanish at the origin.
    """
    b = 0.5 * alpha
    sl = math.sqrt(lam)
    zeta = sl * abs(x) * t ** -b
    sgn = float(np.sign(x))

    def W(delta):
        return wright_neg(zeta, WrightParams(b, delta), tol=1e-30, rtol=1e-13, max_terms=4096).value

    if kind == "E":
        return t ** (b - 1.0) * W(b) / (2.0 * sl)
    if kind == "E_x":
        return -sgn * W(0.0) / (2.0 * t)
    if kind == "Z":
        return 0.5 * sl * t ** -b * W(1.0 - b)
    if kind == "Z_x":
        return -0.5 * sgn * lam * t ** -alpha * W(1.0 - alpha)
    raise DomainError(f"no closed form for {kind!r}")
