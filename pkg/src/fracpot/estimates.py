"""Empirical constants for the Gaussian-type decay bounds of the kernels.

Each bound has the form ``|K(x, t)| <= C * majorant(x, t)`` with

    majorant = t**a * |x|**b * eta(z, n) * exp(-kappa z**(1/(2 - alpha_m))),
    z = x**2 t**-alpha_m .

A sweep evaluates ``|K| / majorant`` on a log grid of ``(x, t)`` and
reports the largest ratio as the fitted ``C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import QuadratureConfig
from .errors import ConfigError
from .kernels import E_terms, KernelBank, Z_terms
from .multiterm import MultiTermSpec

# sweeps are cheap, so a finer p mesh keeps tail points reliable
_SWEEP_QUAD = QuadratureConfig(p_width=0.75)

KINDS = ("gam1", "gam2", "gam3", "gam4", "ls1", "ls2", "ls3", "ls4", "ls5", "ls6")


def kappa_sup(spec: MultiTermSpec) -> float:
    """Supremum of admissible decay rates, ``(2-a)(a**a lam / 4)**(1/(2-a))``."""
    a, lam = spec.alpha_m, spec.lambda_m
    return (2.0 - a) * (a ** a * lam / 4.0) ** (1.0 / (2.0 - a))


@dataclass(frozen=True)
class EstimateParams:
    """Decay rate, horizon and bound family for a sweep.

    ``mu`` is used by the ``gam*`` kinds only.
    """

    kappa: float
    T: float = 1.0
    kind: str = "ls1"
    mu: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown bound kind {self.kind!r}; expected one of {KINDS}")
        if not self.kappa > 0 or not self.T > 0:
            raise ConfigError("kappa and T must be positive")

    def check(self, spec):
        if not self.kappa < kappa_sup(spec):
            raise ConfigError(f"kappa={self.kappa} is not below the admissible "
                              f"supremum {kappa_sup(spec)}")

    @classmethod
    def at_fraction(cls, spec, kind, fraction=0.8, T=1.0, mu=0.0):
        return cls(fraction * kappa_sup(spec), T, kind, mu)


def _integer_order(mu):
    return mu <= 0 and float(mu).is_integer()


def eta(z, n):
    """``1`` for ``n < 2``, ``1 + |ln z|`` for ``n = 2`` and ``z**(1 - n/2)`` otherwise."""
    z = np.asarray(z, dtype=float)
    if n < 2:
        return np.ones_like(z)
    if n == 2:
        return 1.0 + np.abs(np.log(z))
    return z ** (1.0 - n / 2.0)


def log_eta(z, n):
    z = np.asarray(z, dtype=float)
    if n < 2:
        return np.zeros_like(z)
    if n == 2:
        return np.log1p(np.abs(np.log(z)))
    return (1.0 - n / 2.0) * np.log(z)


def _shape(kind, spec, mu):
    """(kernel terms, x-derivative order, t power, |x| power, eta index)."""
    a = spec.alpha_m
    p = -1 if _integer_order(mu) else 1
    table = {
        "gam1": (((mu, 1.0),), 0, mu + a / 2 - 1, 0.0, None),
        "gam2": (((mu, 1.0),), 1, mu - a / 2 - 1, 1.0, p + 2),
        "gam3": (((mu, 1.0),), 2, mu - a / 2 - 1, 0.0, p + 2),
        "gam4": (((mu, 1.0),), 2, mu - a / 2 - 1, 0.0, None),
        "ls1": (E_terms(spec), 0, a / 2 - 1, 0.0, None),
        "ls2": (E_terms(spec), 1, -a / 2 - 1, 1.0, None),
        "ls3": (E_terms(spec), 2, -a / 2 - 1, 0.0, None),
        "ls4": (Z_terms(spec), 0, -a / 2, 0.0, None),
        "ls5": (Z_terms(spec), 1, -a, 0.0, None),
        "ls6": (Z_terms(spec), 2, -1.5 * a, 0.0, None),
    }
    return table[kind]


def log_majorant(kind, x, t, spec, kappa, mu=0.0):
    """Natural log of the majorant (without ``C``) at broadcast ``(x, t)``."""
    _, _, tp, xp, n = _shape(kind, spec, mu)
    x = np.abs(np.asarray(x, dtype=float))
    t = np.asarray(t, dtype=float)
    a = spec.alpha_m
    z = x * x * t ** -a
    out = tp * np.log(t) - kappa * z ** (1.0 / (2.0 - a))
    if xp:
        out = out + xp * np.log(x)
    if n is not None:
        out = out + log_eta(z, n)
    return out


def majorant(kind, x, t, spec, kappa, mu=0.0):
    return np.exp(log_majorant(kind, x, t, spec, kappa, mu))


@dataclass
class SweepReport:
    """Outcome of one bound sweep.

    ``C`` is the largest ratio over reliable points; ``ratios`` has shape
    ``(len(ts), len(xs))`` with ``nan`` at failed points.
    """

    kind: str
    C: float
    argmax: tuple
    ratios: np.ndarray
    failed: int
    xs: np.ndarray
    ts: np.ndarray
    params: EstimateParams
    flags: list = field(default_factory=list)

    def summary(self):
        return {"kind": self.kind, "C": self.C, "argmax": list(self.argmax),
                "failed": self.failed, "kappa": self.params.kappa,
                "T": self.params.T, "mu": self.params.mu, "flags": self.flags}


def default_grid(T=1.0, n=20):
    """``x`` in ``[1e-3, 10**0.5]`` and ``t`` in ``[1e-2 T, T]``, both log-spaced."""
    return np.logspace(-3, 0.5, n), np.logspace(-2, 0, n) * T


def estimate_sweep(kind, spec, params: EstimateParams, xs=None, ts=None, quad=None,
                   reliable=0.1):
    """Fit ``C`` in ``|K| <= C * majorant`` over the grid ``xs x ts``.

    Points whose quadrature error estimate exceeds ``reliable * |K|`` are
    counted as failed and left out of the supremum.
    """
    params.check(spec)
    if kind != params.kind:
        params = EstimateParams(params.kappa, params.T, kind, params.mu)
    gx, gt = default_grid(params.T)
    xs = gx if xs is None else np.asarray(xs, dtype=float)
    ts = gt if ts is None else np.asarray(ts, dtype=float)
    if np.any(xs == 0):
        raise ConfigError("bounds are stated for |x| > 0")
    if kind in ("gam4", "ls4", "ls5", "ls6") and np.any(ts > params.T * (1 + 1e-12)):
        raise ConfigError(f"{kind} holds only for t in (0, T]")
    terms, order, *_ = _shape(kind, spec, params.mu)
    bank = KernelBank(ts, spec, terms, quad or _SWEEP_QUAD)
    y = np.broadcast_to(xs[None, :], (len(ts), len(xs)))
    val, err = bank.evaluate(y, order)
    X, Tt = np.meshgrid(xs, ts)
    bad = ~(err <= reliable * np.abs(val))
    with np.errstate(divide="ignore"):
        logr = np.log(np.abs(val)) - log_majorant(kind, X, Tt, spec, params.kappa, params.mu)
    ratios = np.where(bad, np.nan, np.exp(logr))
    if np.all(bad):
        return SweepReport(kind, math.nan, (), ratios, int(bad.sum()), xs, ts, params,
                           ["no reliable points"])
    i = np.nanargmax(ratios)
    it, ix = np.unravel_index(i, ratios.shape)
    flags = []
    if ix in (0, len(xs) - 1) or it in (0, len(ts) - 1):
        flags.append("supremum on the grid boundary")
    return SweepReport(kind, float(ratios[it, ix]), (float(xs[ix]), float(ts[it])), ratios,
                       int(bad.sum()), xs, ts, params, flags)


def stability(kind, spec, params, n=20, quad=None):
    """Relative change of the fitted ``C`` between ``n x n`` and ``2n x 2n`` grids."""
    coarse = estimate_sweep(kind, spec, params, *default_grid(params.T, n), quad=quad)
    fine = estimate_sweep(kind, spec, params, *default_grid(params.T, 2 * n), quad=quad)
    change = abs(fine.C - coarse.C) / coarse.C
    return change, coarse, fine
