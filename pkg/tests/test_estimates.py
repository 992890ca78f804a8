import numpy as np
import pytest

from fracpot.errors import ConfigError
from fracpot.estimates import (KINDS, EstimateParams, default_grid, estimate_sweep, eta, kappa_sup,
                               log_majorant, majorant, stability)
from fracpot.kernels import kernel_E
from fracpot.multiterm import MultiTermSpec


def test_kappa_sup_formula(spec2w):
    a, lam = 0.7, 2.0
    assert kappa_sup(spec2w) == pytest.approx((2 - a) * (a ** a * lam / 4) ** (1 / (2 - a)))


def test_params_validation(spec2):
    with pytest.raises(ConfigError):
        EstimateParams(0.1, kind="ls9")
    with pytest.raises(ConfigError):
        EstimateParams(-0.1)
    with pytest.raises(ConfigError):
        EstimateParams(2 * kappa_sup(spec2)).check(spec2)


def test_eta_cases():
    z = np.array([0.5, 2.0])
    assert np.all(eta(z, 1) == 1.0)
    assert eta(z, 2) == pytest.approx(1 + np.abs(np.log(z)))
    assert eta(z, 3) == pytest.approx(z ** -0.5)


@pytest.mark.parametrize("kind", KINDS)
def test_majorant_is_exp_of_log(spec2, kind):
    x, t = np.array([0.3, 1.2]), np.array([0.5, 0.9])
    k = 0.5 * kappa_sup(spec2)
    assert majorant(kind, x, t, spec2, k, 0.3) == pytest.approx(
        np.exp(log_majorant(kind, x, t, spec2, k, 0.3)))


@pytest.mark.parametrize("kind", ["ls1", "ls2", "ls4", "ls5", "gam1", "gam4"])
def test_sweep_constant_finite(spec2, kind):
    params = EstimateParams.at_fraction(spec2, kind, 0.8, mu=0.3)
    rep = estimate_sweep(kind, spec2, params, *default_grid(1.0, 8))
    assert np.isfinite(rep.C) and rep.C > 0
    assert rep.failed == 0
    assert rep.summary()["kind"] == kind


def test_sweep_rejects_times_beyond_horizon(spec2):
    params = EstimateParams.at_fraction(spec2, "ls4", 0.8, T=1.0)
    with pytest.raises(ConfigError):
        estimate_sweep("ls4", spec2, params, np.array([0.5]), np.array([2.0]))
    with pytest.raises(ConfigError):
        estimate_sweep("ls1", spec2, params, np.array([0.0]), np.array([0.5]))


def test_stability_single_term():
    spec = MultiTermSpec((0.5,), (1.0,))
    params = EstimateParams.at_fraction(spec, "ls1", 0.8)
    change, coarse, fine = stability("ls1", spec, params, n=8)
    assert change < 0.1
    assert fine.ratios.shape == (16, 16)


def test_decay_beyond_supremum_is_not_bounded():
    # above the admissible rate the ratio grows without bound in |x|
    spec = MultiTermSpec((0.5,), (1.0,))
    xs = np.array([1.0, 2.0, 3.0, 4.0])
    vals = kernel_E(xs, 0.1, spec).value
    fast = majorant("ls1", xs, 0.1, spec, 1.5 * kappa_sup(spec))
    slow = majorant("ls1", xs, 0.1, spec, 0.8 * kappa_sup(spec))
    assert np.all(np.diff(vals / fast) > 0)
    assert np.all(np.diff(vals / slow) < 0)
