"""Full-space solution of the multi-term problem and its residual check.

    u(x, t) = int_0^t int E(x - y, t - tau) f(y, tau) dy dtau + int Z(x - y, t) u0(y) dy .

Both kernels are p-averages of the heat kernel, ``K = int w(p, t) G_p dp``
with ``G_p`` the Gaussian of variance ``2p``, so the y-integrals become
Gaussian smoothings ``G_p * g`` evaluated by Gauss-Kronrod in
``xi = (y - x) / (2 sqrt(p))``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import EvalResult, QuadratureConfig
from .errors import ConfigError, DomainError, HypothesisViolation
from .fractional import TimeGrid, multi_term_operator
from .kernels import E_terms, KernelBank, Z_terms
from .multiterm import MultiTermSpec
from .quadrature import panel_nodes

_DEFAULT_QUAD = QuadratureConfig()
_INV_SQRT_PI = 1.0 / math.sqrt(math.pi)


def kappa_limit(spec: MultiTermSpec, T: float) -> float:
    """Largest admissible growth rate of the data on ``(0, T]``."""
    a, lam = spec.alpha_m, spec.lambda_m
    return (2 - a) * (a / T) ** (a / (2 - a)) * (lam / 4) ** (1 / (2 - a))


@dataclass(frozen=True)
class ProblemData:
    """Initial profile ``u0(x)``, source ``f(x, t)`` and their regularity data.

    ``f`` may blow up like ``t**(gamma - 1)`` at ``t = 0`` and is Holder
    of order ``q`` in ``x``; both data grow at most like ``exp(kappa x**2)``.
    Either callable may be ``None`` for zero data.  Callables must accept
    numpy arrays.
    """

    u0: Callable | None = None
    f: Callable | None = None
    gamma: float = 1.0
    q: float = 1.0
    kappa: float = 0.0
    T: float = 1.0

    def check(self, spec, xs=None):
        """Sample the hypotheses; warns and returns the list of violations."""
        flags = []
        if not self.kappa < kappa_limit(spec, self.T):
            flags.append(f"growth rate {self.kappa} not below {kappa_limit(spec, self.T):.4g}")
        if not self.gamma > 1 - spec.alpha_m:
            flags.append(f"time exponent {self.gamma} not above 1 - alpha_m")
        xs = np.linspace(-12.0, 12.0, 97) if xs is None else np.asarray(xs, float)
        damp = np.exp(-self.kappa * xs ** 2)
        if self.u0 is not None:
            g = np.abs(self.u0(xs)) * damp
            if g[0] > 2 * np.max(g[1:-1]) or g[-1] > 2 * np.max(g[1:-1]):
                flags.append("initial profile grows faster than exp(kappa x^2)")
        if self.f is not None:
            t = 0.5 * self.T
            if self.q > 0:
                ratios = []
                for h in (1e-1, 1e-2, 1e-3):
                    d = np.abs(self.f(xs + h, t) - self.f(xs, t))
                    ratios.append(np.max(d * damp) / h ** self.q)
                if ratios[-1] > 3 * max(ratios[0], 1e-300):
                    flags.append(f"source not Holder of order {self.q} in x")
        for msg in flags:
            warnings.warn(msg, HypothesisViolation, stacklevel=2)
        return flags


def gauss_smooth(g, x, p, radius=7.0, panels=8):
    """``(G_p * g)(x) = pi**-0.5 int exp(-xi**2) g(x + 2 sqrt(p) xi) dxi``.

    Parameters
    ----------
    g : callable
    x : ndarray, shape (Nx,)
    p : ndarray, any shape ``S``
    radius : float
        ``xi`` is truncated to ``[-radius, radius]``.

    Returns
    -------
    value, err : ndarray, shape ``S + (Nx,)``
        ``err`` adds the GK panel estimate and the contribution of
        ``radius <= |xi| <= 2 radius``, the doubling check.
    """
    br = np.linspace(-radius, radius, panels + 1)
    xi, wk, we = panel_nodes(br)
    sh = np.concatenate([np.linspace(-2 * radius, -radius, 3), np.linspace(radius, 2 * radius, 3)])
    s_xi, s_wk, _ = panel_nodes(sh.reshape(2, 3))
    s_xi, s_wk = s_xi.ravel(), s_wk.ravel()
    p = np.asarray(p, float)
    x = np.asarray(x, float)
    scale = 2.0 * np.sqrt(p)[..., None, None]

    def weighted(nodes, weights):
        y = x[:, None] + scale * nodes
        return g(y) * (weights * np.exp(-nodes ** 2))

    f = weighted(xi, wk)
    val = f.sum(axis=-1)
    fe = weighted(xi, we).reshape(f.shape[:-1] + (panels, 15)).sum(axis=-1)
    err = np.abs(fe).sum(axis=-1) + np.abs(weighted(s_xi, s_wk).sum(axis=-1))
    return _INV_SQRT_PI * val, _INV_SQRT_PI * err


def _p_average(bank, i, g, x, quad):
    """``int_0^inf w(p, sig_i) (G_p * g)(x) dp`` for bank time index ``i``."""
    p = bank.p[i]
    gv, ge = gauss_smooth(g, x, p, quad.xi_radius, quad.xi_panels)
    wk, we, w, werr = bank.wk[i], bank.we[i], bank.w[i], bank.werr[i]
    val = (wk * w) @ gv
    pan = ((we * w)[:, None] * gv).reshape(bank.n_panels, 15, -1).sum(axis=1)
    err = np.abs(pan).sum(axis=0) + np.abs(wk * w) @ ge + (np.abs(wk) * werr) @ np.abs(gv)
    # below p_lo the smoothing is the identity and w = w0 + w1 p
    lo = bank.p_lo[i]
    cap = (bank.w0[i] * lo + 0.5 * bank.w1[i] * lo * lo) * g(x)
    return val + cap, err + bank.cap_rel[i] * np.abs(cap)


def _log_panels(lo, hi, width):
    n = max(1, int(math.ceil(math.log(hi / lo) / width)))
    r, wk, we = panel_nodes(np.linspace(math.log(lo), math.log(hi), n + 1))
    x = np.exp(r)
    return x, wk * x, we * x


def initial_term(u0, spec, xs, t, quad=None):
    """``int Z(x - y, t) u0(y) dy`` at the points ``xs``."""
    quad = quad or _DEFAULT_QUAD
    bank = KernelBank(np.array([t]), spec, Z_terms(spec), quad)
    return _p_average(bank, 0, u0, np.asarray(xs, float), quad)


def source_term(f, spec, xs, t, quad=None):
    """``int_0^t int E(x - y, t - tau) f(y, tau) dy dtau`` at the points ``xs``.

    The lag ``t - tau`` and ``tau`` both use panels geometric toward 0.
    Below the smallest lag the source is frozen at ``f(x, t)`` and the
    kernel mass ``sig**(alpha_m - 1) / (lam_m Gamma(alpha_m))`` is used.
    """
    quad = quad or _DEFAULT_QUAD
    xs = np.asarray(xs, float)
    half = 0.5 * t
    lo = t * quad.sigma_floor
    tau0, w0, e0 = _log_panels(lo, half, quad.tau_width)
    sig1, w1, e1 = _log_panels(lo, half, quad.tau_width)
    sig = np.concatenate([t - tau0, sig1])
    tau = t - sig
    w = np.concatenate([w0, w1])
    we = np.concatenate([e0, e1])
    bank = KernelBank(sig, spec, E_terms(spec), quad)
    vals = np.empty((len(sig), len(xs)))
    errs = np.empty_like(vals)
    for i, ti in enumerate(tau):
        vals[i], errs[i] = _p_average(bank, i, lambda y, ti=ti: f(y, ti), xs, quad)
    val = w @ vals
    pan = (we[:, None] * vals).reshape(-1, 15, len(xs)).sum(axis=1)
    err = np.abs(pan).sum(axis=0) + np.abs(w) @ errs
    a, lam = spec.alpha_m, spec.lambda_m
    cap = f(xs, t) * lo ** a / (lam * math.gamma(1 + a))
    return val + cap, err + np.abs(cap)


def solve(data: ProblemData, spec: MultiTermSpec, xs, ts, quad=None):
    """Solution values on the grid ``ts x xs``.

    Returns
    -------
    EvalResult
        ``value`` and ``err_est`` of shape ``(len(ts), len(xs))``.
    """
    xs = np.atleast_1d(np.asarray(xs, float))
    ts = np.atleast_1d(np.asarray(ts, float))
    if np.any(ts <= 0) or np.any(ts > data.T * (1 + 1e-12)):
        raise DomainError("evaluation times must lie in (0, T]")
    data.check(spec)
    val = np.zeros((len(ts), len(xs)))
    err = np.zeros_like(val)
    for k, t in enumerate(ts):
        if data.u0 is not None:
            v, e = initial_term(data.u0, spec, xs, t, quad)
            val[k] += v
            err[k] += e
        if data.f is not None:
            v, e = source_term(data.f, spec, xs, t, quad)
            val[k] += v
            err[k] += e
    return EvalResult(val, err)


@dataclass
class ResidualReport:
    """Max-norm residual on the interior subgrid and ``max |u(., t_1) - u0|``."""

    max_residual: float
    initial_error: float
    residual: np.ndarray
    interior: tuple
    flags: list = field(default_factory=list)

    def summary(self):
        return {"max_residual": self.max_residual, "initial_error": self.initial_error,
                "flags": self.flags}


def residual(u, data: ProblemData, spec, grid: TimeGrid, xs, t_min=None, margin=1):
    """``sum lam_k D^{alpha_k} u - u_xx - f`` on a space-time sample.

    Parameters
    ----------
    u : ndarray, shape (len(grid.nodes), len(xs))
        Solution samples; row 0 is the initial profile.
    xs : ndarray
        Uniform spatial grid.
    t_min : float, optional
        Interior subgrid starts here (default ``T/10``) since time
        derivatives may be singular at ``t = 0``.
    margin : int
        Spatial nodes dropped at each end beyond the stencil.
    """
    u = np.asarray(u, float)
    xs = np.asarray(xs, float)
    t = grid.nodes
    h = np.diff(xs)
    if not np.allclose(h, h[0]):
        raise DomainError("residual needs a uniform spatial grid")
    h = h[0]
    time_part = multi_term_operator(u, spec, grid).value
    uxx = np.full_like(u, np.nan)
    uxx[:, 1:-1] = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) / (h * h)
    src = np.zeros_like(u)
    if data.f is not None:
        src[1:] = np.array([data.f(xs, ti) for ti in t[1:]])
    res = time_part - uxx - src
    t_min = 0.1 * grid.T if t_min is None else t_min
    rows = np.flatnonzero(t >= t_min)
    cols = np.arange(1 + margin, len(xs) - 1 - margin)
    sub = res[np.ix_(rows, cols)]
    init = math.nan
    if data.u0 is not None:
        init = float(np.max(np.abs(u[1] - data.u0(xs))))
    return ResidualReport(float(np.max(np.abs(sub))), init, res, (rows, cols))


def manufactured(spec: MultiTermSpec, T=1.0):
    """Data whose solution is ``v(x, t) = exp(-x**2) (1 + t)``.

    ``D^a (1 + t) = t**(1 - a) / Gamma(2 - a)`` exactly.
    """
    lam = np.asarray(spec.weights)
    al = np.asarray(spec.orders)
    g = 1.0 / np.array([math.gamma(2 - a) for a in al])

    def v(x, t):
        return np.exp(-np.asarray(x) ** 2) * (1 + t)

    def f(x, t):
        x = np.asarray(x)
        frac = float(np.sum(lam * g * t ** (1 - al)))
        return np.exp(-x * x) * (frac - (1 + t) * (4 * x * x - 2))

    data = ProblemData(u0=lambda x: v(x, 0.0), f=f, gamma=1.0, q=1.0, kappa=0.0, T=T)
    return data, v


def _profile(d):
    kind = d.get("kind")
    if kind == "zero":
        return None
    if kind == "const":
        c = float(d["c"])
        return lambda x: np.full(np.shape(x), c)
    if kind == "gaussian":
        c, a, x0 = float(d.get("c", 1.0)), float(d["a"]), float(d.get("x0", 0.0))
        return lambda x: c * np.exp(-a * (np.asarray(x) - x0) ** 2)
    if kind == "gauss_cos":
        a, k = float(d["a"]), float(d["k"])
        return lambda x: np.exp(-a * np.asarray(x) ** 2) * np.cos(k * np.asarray(x))
    raise ConfigError(f"unknown profile kind {kind!r}")


def data_from_dict(d, spec, T=1.0):
    """Problem data and the exact solution (or ``None``) from a descriptor.

    ``{"kind": "manufactured"}`` gives the Gaussian-in-space manufactured
    case; otherwise ``u0`` and ``f`` name profiles (``f`` is
    time-independent or ``zero``).
    """
    if not isinstance(d, dict):
        raise ConfigError("problem descriptor must be an object")
    if d.get("kind") == "manufactured":
        data, v = manufactured(spec, T)
        return data, v
    try:
        u0 = _profile(d.get("u0", {"kind": "zero"}))
        fp = _profile(d.get("f", {"kind": "zero"}))
    except KeyError as exc:
        raise ConfigError(f"profile is missing {exc}") from exc
    f = None if fp is None else (lambda x, t: fp(x))
    data = ProblemData(u0=u0, f=f, kappa=float(d.get("kappa", 0.0)), T=T)
    exact = None
    if u0 is not None and f is None and d["u0"]["kind"] == "const":
        c = float(d["u0"]["c"])
        exact = lambda x, t: np.full(np.broadcast(np.asarray(x), np.asarray(t)).shape, c)
    if u0 is None and f is None:
        exact = lambda x, t: np.zeros(np.broadcast(np.asarray(x), np.asarray(t)).shape)
    return data, exact
