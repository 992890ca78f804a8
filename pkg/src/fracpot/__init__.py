"""Layer potentials and fundamental solutions of multi-term time-fractional diffusion."""
from .config import EvalResult, QuadratureConfig
from .errors import (ConfigError, DomainError, FracPotError, GridTooCoarse, HypothesisViolation,
                     NonConvergence, QuadratureFailure, SingularInput)
from .estimates import EstimateParams, estimate_sweep, kappa_sup
from .fractional import TimeGrid, caputo_derivative, multi_term_operator, rl_integral
from .kernels import (gamma1, kernel_E, kernel_E_dx, kernel_E_dxx, kernel_Z, kernel_Z_dx,
                      kernel_Z_dxx, mass_Z)
from .multiterm import (BoundParams, MultiTermSpec, MuSplit, h_factor, s0_window_direct,
                        s0_window_nested, s_mu, w_mu)
from .potentials import (MovingBoundary, WeightedDensity, boundary_E_dx_direct,
                         continuity_check_Z, jump_limit_E, potential_E, potential_E_dx,
                         potential_Z, potential_Z_dx)
from .solver import ProblemData, residual, solve
from .wright import WrightParams, wright_moment, wright_neg, wright_rl_shift

__version__ = "0.1.0"
