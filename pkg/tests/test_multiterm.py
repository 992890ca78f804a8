import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import erfc

from fracpot.config import QuadratureConfig
from fracpot.errors import ConfigError, DomainError
from fracpot.multiterm import (MultiTermSpec, MuSplit, h_factor, s0_window_direct, s0_window_nested,
                               s_mu, w_bound_sweep, w_kappa_sup, w_mu, w_small_p, w_theta)


def test_spec_validation():
    with pytest.raises(ConfigError):
        MultiTermSpec((0.7, 0.3), (1.0, 1.0))
    with pytest.raises(ConfigError):
        MultiTermSpec((0.3, 1.0), (1.0, 1.0))
    with pytest.raises(ConfigError):
        MultiTermSpec((0.3,), (0.0,))
    with pytest.raises(ConfigError):
        MultiTermSpec((0.3, 0.5), (1.0,))


def test_split_must_sum_to_mu():
    with pytest.raises(ConfigError):
        MuSplit(0.5, (0.1, 0.1))
    assert MuSplit.even(0.6, 3).parts == pytest.approx((0.2, 0.2, 0.2), rel=1e-15)


@pytest.mark.parametrize("mu", [0.0, 0.4, 1.0, -0.3])
def test_single_term_is_one_factor(mu):
    spec = MultiTermSpec((0.6,), (1.5,))
    for t, p in [(0.3, 0.2), (1.0, 1.0), (2.0, 0.05)]:
        expected = h_factor(t, mu, 1.5 * p, 0.6)
        v, _ = w_mu(np.array([t]), np.array([p]), spec, mu=mu)
        assert v[0] == pytest.approx(expected, rel=1e-10, abs=1e-13)


def test_frozen_two_term_value(spec2):
    res = s_mu(1.0, 0.5, spec2)
    assert res.value == pytest.approx(0.2051491550280362, rel=1e-10)
    # the estimate is an upper bound, not a sharp one
    assert 1e-10 * res.value <= res.err_est < 1e-5


@given(st.floats(-0.25, 0.25), st.floats(0.2, 2.0), st.floats(-1.3, 0.3))
def test_split_invariance_two_terms(eps, t, lp):
    spec = MultiTermSpec((0.3, 0.7), (1.0, 2.0))
    p = min(t ** 0.3, t ** 0.7 / 2.0) * 10 ** lp
    q = QuadratureConfig(conv_width=0.5)
    mu = 0.3
    a = s_mu(t, p, spec, split=MuSplit.even(mu, 2), quad=q).value
    b = s_mu(t, p, spec, split=MuSplit(mu, (mu / 2 + eps, mu / 2 - eps)), quad=q).value
    assert abs(a - b) <= 1e-10 * max(abs(a), abs(b))


def test_small_p_expansion(spec2):
    for t in (0.5, 1.0, 2.0):
        for mu in (0.0, 0.5):
            w0, w1 = w_small_p(t, mu, spec2)
            p = 1e-4
            v, _ = w_mu(np.array([t]), np.array([p]), spec2, mu=mu)
            assert abs(v[0] - (w0 + w1 * p)) <= 1e-6 * max(abs(w0), abs(w1) * p, 1e-300) + 5e-7


def test_kappa_sup_and_theta(spec2):
    assert w_kappa_sup(spec2) == pytest.approx(0.3 * 0.7 ** (0.7 / 0.3))
    assert w_theta(0.0) == -1.0 and w_theta(-2.0) == -1.0 and w_theta(0.5) == 0.0


def test_majorant_ratio_is_bounded(spec2):
    ratio, C = w_bound_sweep(spec2, 0.5, np.logspace(-2, 1, 12), np.logspace(-1.5, 0, 8))
    assert np.all(np.isfinite(ratio)) and 0 < C < 50


def test_single_term_window_is_erfc():
    v = s0_window_nested(0.5, (1.0,), (0.5,))
    assert v.value == pytest.approx(0.31731050786291414573, abs=1e-10)
    assert v.value == pytest.approx(erfc(1 / math.sqrt(2)), abs=1e-10)
    d = s0_window_direct(1.0, 0.5, (1.0,), (0.5,))
    assert d.value == pytest.approx(v.value, abs=1e-8)


def test_two_term_window_frozen():
    nested = s0_window_nested(0.5, (1.0, 1.0), (0.3, 0.7))
    direct = s0_window_direct(1.0, 0.5, (1.0, 1.0), (0.3, 0.7))
    assert nested.value == pytest.approx(0.03520309530942334, rel=1e-8)
    assert direct.value == pytest.approx(0.035203095321989404, rel=1e-8)
    assert abs(nested.value - direct.value) < 1e-9


@given(st.floats(0.02, 5.0), st.floats(0.05, 3.0), st.floats(0.05, 3.0))
def test_window_lies_in_unit_interval(delta, l1, l2):
    v = s0_window_nested(delta, (l1, l2), (0.3, 0.7)).value
    assert 0.0 <= v <= 1.0


def test_window_rejects_bad_delta():
    with pytest.raises(DomainError):
        s0_window_direct(1.0, 1.5, (1.0,), (0.5,))


def test_factor_special_orders():
    a, lf = 0.4, 0.8
    for t in (0.1, 0.5, 2.0):
        assert h_factor(t, 1.0, lf, a) > 0
        lhs = h_factor(t, 0.0, lf, a)
        rhs = lf * a * t ** (-a - 1) * h_factor(t, 1.0 - a, lf, a) * t ** (1 - (1 - a))
        assert lhs == pytest.approx(rhs, rel=1e-12)
    assert 0 < h_factor(1e-4, 0.0, lf, a, tol=1e-60) < 1e-40


@pytest.mark.parametrize("spec", [MultiTermSpec((0.5,), (1.0,)), MultiTermSpec((0.3, 0.7), (1.0, 1.0)),
                                  MultiTermSpec((0.2, 0.5, 0.8), (1.0, 0.5, 2.0))])
def test_zero_order_kernel_positive(spec):
    t = np.logspace(-2, 0.5, 12)
    for c in (0.1, 1.0, 3.0):
        v, e = w_mu(t, c * t ** spec.alpha_m / spec.lambda_m, spec, mu=0.0)
        assert np.all(v > 0) and np.all(e < v)


def test_window_limits():
    assert s0_window_nested(1e-6, (1.0, 1.0), (0.3, 0.7)).value < 1e-12
    assert s0_window_nested(1e8, (1e-3, 1e-3), (0.3, 0.7)).value == pytest.approx(1.0, abs=1e-3)


@given(st.floats(0.05, 0.95), st.floats(-1.0, 0.5), st.floats(-1.0, 0.5))
def test_window_direct_matches_nested(delta, l1, l2):
    lfs = (10 ** l1, 10 ** l2)
    a = s0_window_direct(1.0, delta, lfs, (0.3, 0.7))
    b = s0_window_nested(delta, lfs, (0.3, 0.7))
    assert abs(a.value - b.value) <= max(a.err_est + b.err_est, 1e-9)
