"""Configuration and result containers shared across modules."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances and discretization parameters for every integral.

    Attributes
    ----------
    atol, rtol : float
        Target absolute and relative accuracy of the outermost integral.
    wright_rtol : float
        Relative accuracy of the tabulated Wright function.
    wright_max_terms : int
        Series length cap for direct Wright evaluation.
    decay : float
        Wright arguments with envelope exponent above ``decay`` are treated
        as zero (the envelope is ``exp(-decay)``).
    p_floor : float
        Lower end of the numerical p-range relative to the natural scale
        ``min_k t**alpha_k / lambda_k``; below it a two-term expansion of
        ``w_mu`` is integrated in closed form.
    p_width, conv_width, tau_width : float
        Width of the Gauss-Kronrod panels on a logarithmic scale for the
        p-integral, the convolution integral and the time integral.
    sigma_floor : float
        Smallest resolved value of ``t - tau`` relative to ``t``.
    xi_radius : float
        Half width of the standardized Gaussian smoothing window.
    xi_panels : int
        Number of Gauss-Kronrod panels across the smoothing window.
    strict : bool
        Raise QuadratureFailure when the estimate exceeds the tolerance.
    """

    atol: float = 1e-10
    rtol: float = 1e-8
    wright_rtol: float = 1e-14
    wright_max_terms: int = 512
    decay: float = 40.0
    p_floor: float = 1e-6
    p_width: float = 1.5
    conv_width: float = 1.0
    tau_width: float = 1.5
    sigma_floor: float = 1e-24
    xi_radius: float = 7.0
    xi_panels: int = 8
    strict: bool = False

    def __post_init__(self):
        for name in ("atol", "rtol", "wright_rtol", "decay", "p_floor",
                     "p_width", "conv_width", "tau_width", "sigma_floor",
                     "xi_radius"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")
        if self.wright_max_terms < 8 or self.xi_panels < 1:
            raise ConfigError("wright_max_terms >= 8 and xi_panels >= 1 required")

    @classmethod
    def from_dict(cls, d: dict | None) -> "QuadratureConfig":
        d = dict(d or {})
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown quadrature keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EvalResult:
    """A computed value with an a-posteriori error estimate.

    ``value`` and ``err_est`` are floats for scalar input and arrays of the
    same shape for array input.
    """

    value: float | np.ndarray
    err_est: float | np.ndarray = field(default=0.0)

    def __iter__(self):
        yield self.value
        yield self.err_est

    def __float__(self):
        return float(self.value)
