"""Single-layer potentials over a moving boundary and their boundary limits.

For a kernel ``K`` in {E, Z} and a density ``phi(tau) = tau**(alpha_m - 1) psi(tau)``

    u(x, t) = int_0^t phi(tau) K(x - s(tau), t - tau) d tau .

The time integral uses Gauss-Kronrod panels that are geometric toward both
ends, a Gauss-Jacobi rule for the weight ``tau**(alpha_m - 1)`` on the
first sliver, and breakpoints wherever ``x - s(tau)`` changes sign.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq
from scipy.special import beta as beta_fn

from .config import EvalResult, QuadratureConfig
from .errors import ConfigError, DomainError, HypothesisViolation, NonConvergence, SingularInput
from .kernels import E_terms, KernelBank, Z_terms
from .multiterm import MultiTermSpec
from .quadrature import iterated_limit, jacobi_rule, panel_nodes

_DEFAULT_QUAD = QuadratureConfig()
_GJ_NODES = 16
# Gaussian-type decay exp(-kappa z**(1/(2-a))) below exp(-46) counts as zero
_NEGLIGIBLE = 46.0


@dataclass(frozen=True)
class MovingBoundary:
    """Curve ``x = s(t)`` on ``[0, T]`` with Holder data ``|s(t)-s(tau)| <= L |t-tau|**beta``.

    ``beta = 0`` marks a boundary that is only known to be continuous.
    ``increment(t, sigma)`` returns ``s(t) - s(t - sigma)`` without
    cancellation when supplied.
    """

    s: Callable
    beta: float
    L: float = 1.0
    T: float = 1.0
    increment: Callable | None = None
    name: str = "custom"

    def __call__(self, t):
        return self.s(np.asarray(t, dtype=float))

    def diff(self, t, sigma):
        sigma = np.asarray(sigma, dtype=float)
        if self.increment is not None:
            return self.increment(t, sigma)
        return self.s(np.full(sigma.shape, t)) - self.s(t - sigma)

    def holder_ratio(self, n=64):
        """Largest ``|s(t)-s(tau)| / (L |t-tau|**beta)`` over sampled pairs."""
        if self.beta <= 0:
            return math.nan
        ts = np.linspace(0.0, self.T, n)
        a, b = np.meshgrid(ts, ts, indexing="ij")
        d = np.abs(a - b)
        mask = d > 0
        num = np.abs(self(a) - self(b))[mask]
        return float(np.max(num / (self.L * d[mask] ** self.beta)))

    @classmethod
    def const(cls, s0=0.0, T=1.0):
        return cls(lambda t: np.full(np.shape(t), float(s0)), 1.0, 0.0, T,
                   lambda t, sg: np.zeros(np.shape(sg)), "const")

    @classmethod
    def linear(cls, s0, v, T=1.0):
        return cls(lambda t: s0 + v * np.asarray(t), 1.0, abs(v), T,
                   lambda t, sg: v * np.asarray(sg), "linear")

    @classmethod
    def power(cls, s0, a, beta, T=1.0):
        """``s(t) = s0 + a t**beta`` with ``0 < beta <= 1``."""
        if not 0 < beta <= 1:
            raise DomainError("power boundary needs 0 < beta <= 1")

        def inc(t, sg):
            sg = np.asarray(sg, float)
            # t**b - (t - sg)**b = -t**b expm1(b log1p(-sg/t))
            with np.errstate(divide="ignore"):
                return -a * t ** beta * np.expm1(beta * np.log1p(-sg / t))

        return cls(lambda t: s0 + a * np.asarray(t) ** beta, beta, abs(a), T, inc, "power")

    @classmethod
    def log_modulus(cls, s0, a, K=2.0, T=1.0):
        """``s(t) = s0 - a / log(K T / (T - t))``, continuous but not Holder at ``t = T``."""
        if K <= 1:
            raise DomainError("log_modulus needs K > 1")

        def s(t):
            t = np.asarray(t, float)
            gap = T - t
            with np.errstate(divide="ignore"):
                return np.where(gap > 0, s0 - a / np.log(K * T / np.where(gap > 0, gap, 1.0)), s0)

        def inc(t, sg):
            sg = np.asarray(sg, float)
            if t == T:
                return a / np.log(K * T / sg)
            return s(np.full(sg.shape, t)) - s(t - sg)

        return cls(s, 0.0, abs(a), T, inc, "log_modulus")

    @classmethod
    def table(cls, ts, ss, T=None):
        """Piecewise-linear interpolation of a sample table."""
        ts = np.asarray(ts, float)
        ss = np.asarray(ss, float)
        if ts.ndim != 1 or ts.shape != ss.shape or len(ts) < 2 or np.any(np.diff(ts) <= 0):
            raise DomainError("table boundary needs increasing times and matching values")
        slope = float(np.max(np.abs(np.diff(ss) / np.diff(ts))))
        return cls(lambda t: np.interp(t, ts, ss), 1.0, slope, float(T or ts[-1]), None, "table")


@dataclass(frozen=True)
class WeightedDensity:
    """Density ``phi(t) = t**(alpha_m - 1) psi(t)`` stored through continuous ``psi``."""

    psi: Callable
    alpha_m: float
    name: str = "custom"

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return t ** (self.alpha_m - 1.0) * self.psi(t)

    def sup_psi(self, T, n=257):
        return float(np.max(np.abs(self.psi(np.linspace(0.0, T, n)))))

    @classmethod
    def constant(cls, c, alpha_m):
        """``phi = c`` everywhere."""
        return cls(lambda t: c * np.asarray(t, float) ** (1.0 - alpha_m), alpha_m, "const")

    @classmethod
    def weighted(cls, c, alpha_m):
        """``phi = c t**(alpha_m - 1)``."""
        return cls(lambda t: np.full(np.shape(t), float(c)), alpha_m, "weighted")

    @classmethod
    def polynomial(cls, coeffs, alpha_m):
        """``psi(t) = sum_k coeffs[k] t**k``."""
        c = np.asarray(coeffs, float)[::-1]
        return cls(lambda t: np.polyval(c, np.asarray(t, float)), alpha_m, "poly")

    @classmethod
    def table(cls, ts, psis, alpha_m):
        ts, psis = np.asarray(ts, float), np.asarray(psis, float)
        return cls(lambda t: np.interp(t, ts, psis), alpha_m, "table")


# ---------------------------------------------------------------------------
# Time quadrature


@dataclass
class _TimeRule:
    tau: np.ndarray
    sigma: np.ndarray
    w: np.ndarray
    we: np.ndarray
    n_jacobi: int
    last_panel: slice


def _log_panels(lo, hi, width, forced=()):
    """GK nodes in ``r = log(x)`` on ``[lo, hi]``; weights include the Jacobian."""
    n = max(1, int(math.ceil(math.log(hi / lo) / width)))
    br = np.linspace(math.log(lo), math.log(hi), n + 1)
    forced = [math.log(f) for f in forced if lo < f < hi]
    if forced:
        br = np.unique(np.concatenate([br, forced]))
    r, wk, we = panel_nodes(br)
    x = np.exp(r)
    return x, wk * x, we * x


def _time_rule(t, alpha_m, sigma_min, quad, sigma_breaks=()):
    """Nodes and weights for ``int_0^t g(tau) d tau``.

    The first ``n_jacobi`` weights already contain ``tau**(1 - alpha_m)``
    so that ``sum w * phi(tau) * K`` integrates ``psi * K`` exactly for
    polynomial ``psi`` on the first sliver.
    """
    half = 0.5 * t
    tau_a = t * 1e-8
    tau_j, w_j = jacobi_rule(_GJ_NODES, 0.0, tau_a, alpha_m - 1.0)
    w_j = w_j * tau_j ** (1.0 - alpha_m)
    x0, wk0, we0 = _log_panels(tau_a, half, quad.tau_width)
    # toward tau = t in the lag sigma, smallest lag last
    s1, wk1, we1 = (a[::-1] for a in _log_panels(sigma_min, half, quad.tau_width, sigma_breaks))
    tau = np.concatenate([tau_j, x0, t - s1])
    sigma = np.concatenate([t - tau_j, t - x0, s1])
    w = np.concatenate([w_j, wk0, wk1])
    we = np.concatenate([np.zeros_like(w_j), we0, we1])
    n = len(tau)
    return _TimeRule(tau, sigma, w, we, _GJ_NODES, slice(n - 15, n))


def _sigma_floor(t, spec, y_min, quad):
    """Smallest time lag that matters for offsets ``|y| >= y_min``."""
    floor = t * quad.sigma_floor
    if y_min is None or y_min <= 0:
        return floor
    a, lam = spec.alpha_m, spec.lambda_m
    ksup = (2 - a) * (a ** a * lam / 4) ** (1 / (2 - a))
    # y**2 sigma**-a large enough that exp(-0.8 ksup z**(1/(2-a))) < exp(-46)
    zstar = (_NEGLIGIBLE / (0.8 * ksup)) ** (2 - a)
    return max(floor, min(t * 1e-3, (y_min ** 2 / zstar) ** (1.0 / a)))


def _crossings(s, t, d, sigma_min):
    """Lags ``sigma`` at which ``s(t) - s(t - sigma) = d``."""
    if d == 0.0:
        return []
    grid = np.geomspace(sigma_min, t, 400)
    f = s.diff(t, grid) - d
    out = []
    for i in np.flatnonzero(np.sign(f[:-1]) * np.sign(f[1:]) < 0):
        out.append(brentq(lambda g: float(s.diff(t, np.array([g]))[0]) - d,
                          grid[i], grid[i + 1], xtol=1e-14 * grid[i], rtol=1e-14))
    return out


class LayerPotential:
    """Discretized potential ``int_0^t phi(tau) K(x - s(tau), t - tau) d tau``.

    One time rule and one kernel bank are shared by every evaluation point,
    so approach sequences toward ``s(t)`` are evaluated consistently.

    Parameters
    ----------
    kernel : {"E", "Z"}
    phi : WeightedDensity
    s : MovingBoundary
    t : float
    spec : MultiTermSpec
    offsets : sequence of float
        Offsets ``x - s(t)`` that will be evaluated; used to place the
        smallest time lag and sign-change breakpoints.
    quad : QuadratureConfig
    extra_lags : sequence of float
        Additional breakpoints in ``t - tau``.
    """

    def __init__(self, kernel, phi, s, t, spec, offsets=(), quad=None, extra_lags=()):
        quad = quad or _DEFAULT_QUAD
        if not 0 < t <= s.T * (1 + 1e-12):
            raise DomainError("t must lie in (0, T]")
        self.kernel, self.phi, self.s, self.t, self.spec, self.quad = kernel, phi, s, t, spec, quad
        offs = [abs(o) for o in offsets if o != 0.0]
        sig_min = _sigma_floor(t, spec, min(offs) if offs else None, quad)
        if not offs or 0.0 in offsets:
            sig_min = t * quad.sigma_floor
        breaks = list(extra_lags)
        for o in offsets:
            breaks += _crossings(s, t, -o, sig_min)
        self.rule = _time_rule(t, spec.alpha_m, sig_min, quad, breaks)
        terms = E_terms(spec) if kernel == "E" else Z_terms(spec)
        self.bank = KernelBank(self.rule.sigma, spec, terms, quad)
        self.ds = s.diff(t, self.rule.sigma)
        self.phi_w = self.rule.w * phi(self.rule.tau)
        self.phi_we = self.rule.we * phi(self.rule.tau)

    def _integrate(self, y, order, mask=None):
        K, Ke = self.bank.evaluate(y, order)
        w, we = self.phi_w, self.phi_we
        if mask is not None:
            w, we = w * mask, we * mask
        val = np.einsum("i,i...->...", w, K)
        gk = slice(self.rule.n_jacobi, None)
        pan = np.einsum("i,i...->i...", we[gk], K[gk])
        pan = pan.reshape((-1, 15) + pan.shape[1:]).sum(axis=1)
        err = np.abs(pan).sum(axis=0) + np.einsum("i,i...->...", np.abs(w), Ke)
        tail = np.abs(np.einsum("i,i...->...", w[self.rule.last_panel], K[self.rule.last_panel]))
        return val, err + tail

    def _offsets(self, d):
        d = np.atleast_1d(np.asarray(d, dtype=float))
        return self.ds[:, None] + d[None, :]

    def value(self, d):
        """Potential at ``x = s(t) + d`` for an array of offsets ``d``."""
        return self._integrate(self._offsets(d), 0)

    def dx(self, d):
        """x-derivative at ``x = s(t) + d``; ``d = 0`` gives the on-boundary integral."""
        return self._integrate(self._offsets(d), 1)

    def window(self, d, delta, order=1):
        """Split of the integral at ``tau = t - delta`` into (early, late) parts."""
        late = (self.rule.sigma < delta).astype(float)
        y = self._offsets(d)
        return self._integrate(y, order, 1.0 - late), self._integrate(y, order, late)


def _result(val, err):
    v = np.asarray(val)
    if v.ndim == 0 or v.size == 1:
        return EvalResult(float(v.ravel()[0]), float(np.asarray(err).ravel()[0]))
    return EvalResult(v, np.asarray(err))


def _offset(s, x, t):
    return float(x) - float(s(t))


def potential_E(phi, s, x, t, spec, quad=None):
    """``int_0^t phi(tau) E(x - s(tau), t - tau) d tau``."""
    d = _offset(s, x, t)
    lp = LayerPotential("E", phi, s, t, spec, [d], quad)
    return _result(*lp.value(d))


def potential_E_dx(phi, s, x, t, spec, quad=None):
    """``int_0^t phi(tau) E_x(x - s(tau), t - tau) d tau`` for ``x != s(t)``."""
    d = _offset(s, x, t)
    if d == 0.0:
        raise SingularInput("x = s(t): use boundary_E_dx_direct or jump_limit_E")
    lp = LayerPotential("E", phi, s, t, spec, [d], quad)
    return _result(*lp.dx(d))


def _check_theorem1(s, spec):
    if not s.beta > spec.alpha_m / 2:
        warnings.warn(f"boundary exponent {s.beta} <= alpha_m/2 = {spec.alpha_m / 2}; "
                      "the on-boundary integral may diverge", HypothesisViolation, stacklevel=3)
        return False
    return True


def boundary_E_dx_direct(phi, s, t, spec, quad=None):
    """On-boundary integral ``int_0^t phi(tau) E_x(s(t) - s(tau), t - tau) d tau``."""
    _check_theorem1(s, spec)
    lp = LayerPotential("E", phi, s, t, spec, [0.0], quad)
    return _result(*lp.dx(0.0))


def potential_Z(phi, s, x, t, spec, quad=None):
    """``int_0^t phi(tau) Z(x - s(tau), t - tau) d tau``."""
    d = _offset(s, x, t)
    lp = LayerPotential("Z", phi, s, t, spec, [d], quad)
    return _result(*lp.value(d))


def potential_Z_dx(phi, s, x, t, spec, quad=None):
    """``int_0^t phi(tau) Z_x(x - s(tau), t - tau) d tau``; ``x = s(t)`` allowed."""
    d = _offset(s, x, t)
    lp = LayerPotential("Z", phi, s, t, spec, [d], quad)
    return _result(*lp.dx(d))


# ---------------------------------------------------------------------------
# Boundary limits


@dataclass
class JumpReport:
    """One-sided limit of an x-derivative potential along ``x_n -> s(t)``.

    ``discrepancies[n] = |values[n] - predicted|``; ``discrepancy`` is the
    gap between the extrapolated limit and the prediction.
    """

    side: str
    offsets: list
    values: list
    errors: list
    limit: float
    order: float
    extrapolated: bool
    predicted: float
    direct: float
    direct_err: float
    phi_t: float
    discrepancy: float
    discrepancies: list
    monotone: bool
    hypothesis_ok: bool = True
    flags: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def approach_offsets(t, spec, d0=None, n=10, side="left"):
    """Offsets ``x_n - s(t) = -+ d0 2**-k`` for ``k = 0..n``."""
    if d0 is None:
        d0 = 0.1 * t ** (spec.alpha_m / 2)
    sign = -1.0 if side == "left" else 1.0
    return [sign * d0 * 2.0 ** -k for k in range(n + 1)]


def _monotone(disc):
    tail = disc[2:]
    return all(b < a for a, b in zip(tail, tail[1:]))


def _report(side, offs, vals, errs, predicted, direct, direct_err, phi_t, hyp_ok):
    limit, order, ok = iterated_limit(vals, depth=2)
    disc = [abs(v - predicted) for v in vals]
    flags = []
    if not ok:
        flags.append("extrapolation degenerate; last term used")
    flags.append(f"limit extrapolated by two Aitken levels, leading order {order:.3g}")
    return JumpReport(side, list(map(float, offs)), list(map(float, vals)), list(map(float, errs)),
                      float(limit), float(order), bool(ok), float(predicted), float(direct),
                      float(direct_err), float(phi_t), float(abs(limit - predicted)), disc,
                      _monotone(disc), hyp_ok, flags)


def jump_limit_E(phi, s, t, spec, side="left", approach=None, quad=None, strict=True):
    """One-sided limit of the E-potential derivative at ``x = s(t)``.

    The prediction is ``+phi(t)/2 + direct`` for ``x -> s(t)-`` and
    ``-phi(t)/2 + direct`` for ``x -> s(t)+``.

    Raises
    ------
    NonConvergence
        If ``strict`` and the discrepancies stop decreasing after the
        first two terms.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    hyp_ok = _check_theorem1(s, spec)
    offs = list(approach) if approach is not None else approach_offsets(t, spec, side=side)
    if any((o >= 0) if side == "left" else (o <= 0) for o in offs):
        raise DomainError("approach offsets must lie strictly on the chosen side")
    lp = LayerPotential("E", phi, s, t, spec, offs + [0.0], quad)
    vals, errs = lp.dx(np.array(offs))
    direct, derr = lp.dx(0.0)
    phi_t = float(phi(np.array(t)))
    sign = 0.5 if side == "left" else -0.5
    rep = _report(side, offs, vals, errs, sign * phi_t + float(direct[0]), float(direct[0]),
                  float(derr[0]), phi_t, hyp_ok)
    if strict and not rep.monotone:
        raise NonConvergence(f"discrepancies do not decrease: {rep.discrepancies}")
    return rep


@dataclass
class ContinuityReport:
    """Both one-sided limits of the Z-potential derivative against its boundary value."""

    left: JumpReport
    right: JumpReport
    boundary_value: float
    discrepancy: float

    def to_dict(self):
        return {"left": self.left.to_dict(), "right": self.right.to_dict(),
                "boundary_value": self.boundary_value, "discrepancy": self.discrepancy}


def continuity_check_Z(phi, s, t, spec, approach=None, quad=None):
    """Compare ``lim_{x -> s(t)} d/dx (Z-potential)`` with its on-boundary value.

    Approach offsets default to ``d0 2**-k``, ``k = 0..20``, on both sides.
    From the side the boundary moves toward, the error decays only like
    ``d**((1 - alpha_k)/beta)``, hence the long sequence.
    """
    offs = list(approach) if approach is not None else approach_offsets(t, spec, n=20, side="right")
    offs = [abs(o) for o in offs]
    both = [-o for o in offs] + offs
    lp = LayerPotential("Z", phi, s, t, spec, both + [0.0], quad)
    vals, errs = lp.dx(np.array(both))
    v0, e0 = lp.dx(0.0)
    v0, e0 = float(v0[0]), float(e0[0])
    phi_t = float(phi(np.array(t)))
    n = len(offs)
    left = _report("left", both[:n], vals[:n], errs[:n], v0, v0, e0, phi_t, True)
    right = _report("right", both[n:], vals[n:], errs[n:], v0, v0, e0, phi_t, True)
    return ContinuityReport(left, right, v0, max(left.discrepancy, right.discrepancy))


def ej1_window(y, delta, t, spec, quad=None):
    """``int_{t-delta}^t |E_x(y, t - tau)| d tau`` for a flat boundary, ``y != 0``."""
    phi = WeightedDensity.constant(1.0, spec.alpha_m)
    s = MovingBoundary.const(0.0, T=t)
    lp = LayerPotential("E", phi, s, t, spec, [y], quad, extra_lags=[delta])
    late = (lp.rule.sigma < delta).astype(float)
    K, Ke = lp.bank.evaluate(lp._offsets(y), 1)
    K, Ke = np.abs(K[:, 0]), Ke[:, 0]
    w = lp.rule.w * late
    return EvalResult(float(np.dot(w, K)), float(np.dot(np.abs(w), Ke)))


def window_diagnostics(phi, s, t, d, delta, spec, quad=None):
    """Terms of the split ``L = L1 + phi(t) M + L2`` at ``x = s(t) + d``.

    ``L`` is the on-boundary integral minus the off-boundary one;
    ``M = M1 + M2 + J`` where ``J`` is the flat-window term.  Returns the
    terms together with the scale ``delta**(beta - alpha_m/2)`` that bounds
    ``M1`` and ``M2``.
    """
    lp = LayerPotential("E", phi, s, t, spec, [d, 0.0], quad, extra_lags=[delta])
    sig = lp.rule.sigma
    late = (sig < delta).astype(float)
    y_off = lp.ds + d
    y_on = lp.ds
    y_flat = np.full_like(sig, d)
    Koff, _ = lp.bank.evaluate(y_off, 1)
    Kon, _ = lp.bank.evaluate(y_on, 1)
    Kflat, _ = lp.bank.evaluate(y_flat, 1)
    w = lp.rule.w
    phiw = lp.phi_w
    phi_t = float(phi(np.array(t)))
    L1 = float(np.sum(late * (phiw - phi_t * w) * (Kon - Koff)))
    L2 = float(np.sum((1 - late) * phiw * (Kon - Koff)))
    M = float(np.sum(late * w * (Kon - Koff)))
    M1 = float(np.sum(late * w * (Kflat - Koff)))
    M2 = float(np.sum(late * w * Kon))
    J = -float(np.sum(late * w * Kflat))
    L = float(np.sum(phiw * (Kon - Koff)))
    scale = delta ** (s.beta - spec.alpha_m / 2) if s.beta > 0 else math.nan
    return {"L": L, "L1": L1, "phiM": phi_t * M, "L2": L2, "M": M, "M1": M1,
            "M2": M2, "J": J, "bound_scale": scale}


def duis_bound(phi, t, spec):
    """``sup|psi| t**(3 alpha_m/2 - 1) B(alpha_m, alpha_m/2)`` (times an unknown constant)."""
    a = spec.alpha_m
    return phi.sup_psi(t) * t ** (1.5 * a - 1) * beta_fn(a, a / 2)


def duis2_bound(phi, t, spec):
    """``sup|psi| t**(alpha_m/2) B(alpha_m, 1 - alpha_m/2)`` (times an unknown constant)."""
    a = spec.alpha_m
    return phi.sup_psi(t) * t ** (a / 2) * beta_fn(a, 1 - a / 2)


# ---------------------------------------------------------------------------
# Named built-ins for configuration files

_BOUNDARIES = {
    "const": lambda d, T: MovingBoundary.const(d.get("s0", 0.0), T),
    "linear": lambda d, T: MovingBoundary.linear(d.get("s0", 0.0), d["v"], T),
    "power": lambda d, T: MovingBoundary.power(d.get("s0", 0.0), d["a"], d["beta"], T),
    "log_modulus": lambda d, T: MovingBoundary.log_modulus(d.get("s0", 0.0), d["a"],
                                                           d.get("K", 2.0), T),
    "table": lambda d, T: MovingBoundary.table(d["t"], d["s"], T),
}

_DENSITIES = {
    "const": lambda d, a: WeightedDensity.constant(d["c"], a),
    "weighted": lambda d, a: WeightedDensity.weighted(d["c"], a),
    "poly": lambda d, a: WeightedDensity.polynomial(d["coeffs"], a),
    "table": lambda d, a: WeightedDensity.table(d["t"], d["psi"], a),
}


def boundary_from_dict(d, T=1.0):
    """Build a registered boundary from ``{"kind": ..., params}``."""
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind not in _BOUNDARIES:
        raise ConfigError(f"unknown boundary kind {kind!r}; expected one of {sorted(_BOUNDARIES)}")
    try:
        return _BOUNDARIES[kind](d, T)
    except (KeyError, DomainError) as exc:
        raise ConfigError(f"boundary {kind!r}: {exc}") from exc


def density_from_dict(d, alpha_m):
    """Build a registered density from ``{"kind": ..., params}``."""
    kind = d.get("kind") if isinstance(d, dict) else None
    if kind not in _DENSITIES:
        raise ConfigError(f"unknown density kind {kind!r}; expected one of {sorted(_DENSITIES)}")
    try:
        return _DENSITIES[kind](d, alpha_m)
    except KeyError as exc:
        raise ConfigError(f"density {kind!r} is missing {exc}") from exc
