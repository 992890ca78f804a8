import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erfc, rgamma

from fracpot.errors import DomainError, NonConvergence
from fracpot.wright import (WrightParams, decay_argument, decay_exponent, moment_quadrature,
                            wright_moment, wright_neg, wright_neg_reference, wright_profile,
                            wright_rl_shift, wright_table)

betas = st.floats(0.05, 0.95)
deltas = st.floats(-1.5, 2.5)
ys = st.floats(0.0, 12.0)
OPTS = dict(tol=1e-30, rtol=1e-13, max_terms=4096)


@given(betas, deltas)
def test_zero_argument_is_reciprocal_gamma(b, d):
    assert wright_neg(0.0, WrightParams(b, d)).value == pytest.approx(float(rgamma(d)), abs=1e-15)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 2.0, 4.0, 7.0])
def test_half_order_is_gaussian(z):
    expected = math.exp(-z * z / 4) / math.sqrt(math.pi)
    assert wright_neg(z, WrightParams(0.5, 0.5)).value == pytest.approx(expected, abs=1e-15)


def test_half_order_unit_delta_is_erfc():
    for z in (0.3, 1.0, 2.5):
        assert wright_neg(z, WrightParams(0.5, 1.0)).value == pytest.approx(erfc(z / 2), abs=1e-15)


def test_frozen_series_value():
    # W(-1; -1/2, 3/2) at 200 digits
    assert wright_neg(1.0, WrightParams(0.5, 1.5)).value == pytest.approx(
        0.3992824567484913317764706, abs=1e-15)


@given(betas, ys)
def test_recurrence_between_delta_zero_and_one_minus_beta(b, y):
    z = float(decay_argument(y, b))
    lhs = wright_neg(z, WrightParams(b, 0.0), tol=1e-14)
    rhs = wright_neg(z, WrightParams(b, 1.0 - b), tol=1e-14)
    assert abs(lhs.value - z * b * rhs.value) <= 10 * 1e-14 * max(1.0, z * b)


@pytest.mark.parametrize("b,d", [(0.2, 0.0), (0.5, 0.5), (0.7, 1.0), (0.9, 2.0), (0.35, 0.3)])
def test_positive_on_log_grid(b, d):
    for z in np.logspace(-3, math.log10(float(decay_argument(30.0, b))), 25):
        assert wright_neg(z, WrightParams(b, d), **OPTS).value > 0


@given(betas, deltas, ys)
def test_error_estimate_bounds_true_error(b, d, y):
    z = float(decay_argument(y, b))
    res = wright_neg(z, WrightParams(b, d), tol=1e-12)
    ref = float(wright_neg_reference(z, b, d, dps=60))
    assert abs(res.value - ref) <= res.err_est + 1e-300


def test_nonconvergence_with_too_few_terms():
    with pytest.raises(NonConvergence):
        wright_neg(40.0, WrightParams(0.3, 0.5), max_terms=16)


def test_rejects_bad_parameters():
    with pytest.raises(DomainError):
        WrightParams(1.0, 0.5)
    with pytest.raises(DomainError):
        wright_neg(-1.0, WrightParams(0.5, 0.5))


def test_decay_argument_inverts_exponent():
    for b in (0.1, 0.5, 0.9):
        assert decay_exponent(decay_argument(17.0, b), b) == pytest.approx(17.0, rel=1e-12)


@pytest.mark.parametrize("nu,b,d", [(1.0, 0.5, 0.5), (1.0, 0.3, 0.7), (2.0, 0.25, 0.5)])
def test_moment_examples_equal_one(nu, b, d):
    assert wright_moment(nu, WrightParams(b, d)) == pytest.approx(1.0, rel=1e-15)


def test_moment_pole():
    with pytest.raises(DomainError):
        wright_moment(1.0, WrightParams(0.5, -0.5))


@pytest.mark.parametrize("nu,b,d", [(0.3, 0.7, 1.1), (1.7, 0.2, 0.4), (2.5, 0.6, 1.9)])
def test_moment_quadrature_matches_closed_form(nu, b, d):
    p = WrightParams(b, d)
    res = moment_quadrature(nu, p)
    exact = wright_moment(nu, p)
    assert abs(res.value - exact) <= max(res.err_est, 1e-12)
    assert res.value == pytest.approx(exact, rel=1e-6)


def test_rl_shift_examples():
    assert wright_rl_shift(1.0, 1.0, 1.0, WrightParams(0.5, 0.5)) == pytest.approx(
        0.3992824567484913317764706, abs=1e-15)
    assert wright_rl_shift(0.4, 0.0, 2.0, WrightParams(0.5, 0.3)) == pytest.approx(
        2.0 ** (0.3 + 0.4 - 1) * float(rgamma(0.7)), rel=1e-14)


def test_profile_vanishes_at_origin():
    v = wright_profile(np.array([0.0, 1e-12, 0.5]), 1.0, WrightParams(0.5, 0.3))
    assert v[0] == 0.0 and v[1] == 0.0 and v[2] > 0


@pytest.mark.parametrize("b,d", [(0.3, 0.0), (0.5, 0.5), (0.8, -0.4)])
def test_table_matches_series(b, d):
    tab = wright_table(b, d)
    zs = np.linspace(0.0, tab.z_max, 97)
    ref = np.array([wright_neg(z, WrightParams(b, d), **OPTS).value for z in zs])
    assert np.max(np.abs(tab(zs) - ref)) <= 1e-12 * tab.scale
    assert tab(np.array([2 * tab.z_max]))[0] == 0.0


def test_frozen_gaussian_point():
    assert wright_neg(2.0, WrightParams(0.5, 0.5)).value == pytest.approx(
        0.2075537487102973516701341, abs=1e-15)


@given(betas)
def test_moment_of_complementary_delta_is_one(b):
    assert wright_moment(1.0, WrightParams(b, 1.0 - b)) == pytest.approx(1.0, rel=1e-14)


def test_reference_sum_is_independent_of_float_path():
    # 200-digit partial sum agrees with the Gaussian closed form
    ref = wright_neg_reference(2.0, 0.5, 0.5, dps=200)
    assert float(ref) == pytest.approx(math.exp(-1) / math.sqrt(math.pi), rel=1e-15)
