import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from fracpot.errors import ConfigError, DomainError, HypothesisViolation, SingularInput
from fracpot.kernels import single_term_closed_form
from fracpot.multiterm import MultiTermSpec
from fracpot.potentials import (MovingBoundary, WeightedDensity, boundary_E_dx_direct,
                                boundary_from_dict, continuity_check_Z, density_from_dict,
                                ej1_window, jump_limit_E, potential_E, potential_E_dx, potential_Z,
                                potential_Z_dx, window_diagnostics)

A = 0.7
SPEC = MultiTermSpec((A,), (1.0,))


def reference(kind, phi, s, x, t):
    """Adaptive quadrature of the single-term closed form in ``tau``."""
    f = lambda tau: float(phi(np.array(tau))) * single_term_closed_form(
        kind, x - float(s(np.array(tau))), t - tau, A, 1.0)
    pts = np.linspace(0, t, 9)[1:-1]
    v, _ = quad(f, 0, t, points=pts, limit=400, epsabs=1e-13, epsrel=1e-11)
    return v


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_power_increment_matches_difference(t, frac):
    s = MovingBoundary.power(0.2, 0.5, 0.6)
    sg = frac * t
    assert s.diff(t, sg) == pytest.approx(float(s(t) - s(t - sg)), rel=1e-9, abs=1e-15)


def test_holder_ratio():
    assert MovingBoundary.power(0.0, 1.0, 0.6).holder_ratio() <= 1.0 + 1e-12
    assert MovingBoundary.linear(0.0, 2.0).holder_ratio() == pytest.approx(1.0)
    assert math.isnan(MovingBoundary.log_modulus(0.0, 0.1).holder_ratio())


def test_boundary_validation():
    with pytest.raises(DomainError):
        MovingBoundary.power(0.0, 1.0, 1.5)
    with pytest.raises(DomainError):
        MovingBoundary.log_modulus(0.0, 1.0, K=0.5)
    with pytest.raises(DomainError):
        MovingBoundary.table([0.0, 0.0], [1.0, 2.0])


def test_densities():
    assert WeightedDensity.constant(2.0, 0.4)(np.array([0.3, 0.9])) == pytest.approx([2.0, 2.0])
    w = WeightedDensity.weighted(1.5, 0.4)
    assert w(np.array(0.25)) == pytest.approx(1.5 * 0.25 ** -0.6)
    p = WeightedDensity.polynomial([1.0, 2.0], 0.5)
    assert p.psi(np.array(0.5)) == pytest.approx(2.0)
    assert p.sup_psi(1.0) == pytest.approx(3.0)


def test_registry_builders():
    s = boundary_from_dict({"kind": "power", "a": 0.3, "beta": 0.8}, T=2.0)
    assert s.beta == 0.8 and s.T == 2.0
    d = density_from_dict({"kind": "poly", "coeffs": [1, 0, 1]}, 0.5)
    assert d.psi(np.array(2.0)) == pytest.approx(5.0)
    for bad in ({"kind": "spiral"}, {"kind": "power", "a": 1.0}, "power",
                {"kind": "power", "a": 1.0, "beta": 2.0}):
        with pytest.raises(ConfigError):
            boundary_from_dict(bad)
    with pytest.raises(ConfigError):
        density_from_dict({"kind": "poly"}, 0.5)


@pytest.mark.parametrize("kind,fn", [("E", potential_E), ("E_x", potential_E_dx),
                                     ("Z", potential_Z), ("Z_x", potential_Z_dx)])
@pytest.mark.parametrize("x", [-0.3, 0.4])
def test_potentials_match_adaptive_quadrature(kind, fn, x):
    phi = WeightedDensity.polynomial([1.0, 0.5], A)
    s = MovingBoundary.linear(0.1, 0.3)
    t = 0.8
    res = fn(phi, s, x, t, SPEC)
    assert res.value == pytest.approx(reference(kind, phi, s, x, t), rel=1e-6, abs=1e-9)


def test_derivative_singular_on_boundary():
    phi = WeightedDensity.constant(1.0, A)
    s = MovingBoundary.linear(0.0, 0.5)
    with pytest.raises(SingularInput):
        potential_E_dx(phi, s, 0.5, 1.0, SPEC)


@pytest.mark.parametrize("side,expected", [("left", 0.5), ("right", -0.5)])
def test_flat_jump(side, expected):
    phi = WeightedDensity.constant(1.0, A)
    rep = jump_limit_E(phi, MovingBoundary.const(), 1.0, SPEC, side=side)
    assert rep.limit == pytest.approx(expected, abs=1e-6)
    assert rep.direct == 0.0
    assert rep.monotone and rep.hypothesis_ok


@pytest.mark.parametrize("side", ["left", "right"])
def test_moving_jump_weighted_density(side):
    phi = WeightedDensity.weighted(1.0, A)
    s = MovingBoundary.power(0.0, 0.5, 0.9)
    rep = jump_limit_E(phi, s, 1.0, SPEC, side=side)
    sign = 0.5 if side == "left" else -0.5
    direct = boundary_E_dx_direct(phi, s, 1.0, SPEC).value
    assert rep.limit == pytest.approx(sign * rep.phi_t + direct, abs=1e-5)
    assert rep.monotone
    assert set(rep.to_dict()) >= {"limit", "discrepancy", "flags"}


def test_rough_boundary_warns():
    phi = WeightedDensity.constant(1.0, A)
    s = MovingBoundary.power(0.0, 0.2, 0.3)
    with pytest.warns(HypothesisViolation):
        jump_limit_E(phi, s, 1.0, SPEC, strict=False)


def test_approach_must_stay_on_side():
    phi = WeightedDensity.constant(1.0, A)
    with pytest.raises(DomainError):
        jump_limit_E(phi, MovingBoundary.const(), 1.0, SPEC, side="left", approach=[0.1, 0.05])
    with pytest.raises(DomainError):
        jump_limit_E(phi, MovingBoundary.const(), 1.0, SPEC, side="up")


@pytest.mark.parametrize("s", [MovingBoundary.linear(0.0, 0.5), MovingBoundary.power(0.0, -0.4, 0.8),
                               MovingBoundary.log_modulus(0.0, 0.2)])
def test_Z_derivative_continuous_across_boundary(s):
    phi = WeightedDensity.polynomial([1.0, -0.5], A)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", HypothesisViolation)
        rep = continuity_check_Z(phi, s, 1.0, SPEC)
    assert rep.discrepancy < 1e-4
    for side in (rep.left, rep.right):
        tail = side.discrepancies[-10:]
        assert all(b < a for a, b in zip(tail, tail[1:]))


@pytest.mark.parametrize("y", [1e-3, 0.05, 0.5])
@pytest.mark.parametrize("delta", [0.05, 0.5])
def test_window_mass_at_most_half(y, delta):
    assert ej1_window(y, delta, 1.0, SPEC).value <= 0.5 + 1e-6


def test_window_split_adds_up():
    phi = WeightedDensity.weighted(1.0, A)
    s = MovingBoundary.power(0.0, 0.5, 0.9)
    w = window_diagnostics(phi, s, 1.0, 1e-3, 0.2, SPEC)
    assert w["L"] == pytest.approx(w["L1"] + w["phiM"] + w["L2"], rel=1e-10, abs=1e-12)
    assert w["M"] == pytest.approx(w["M1"] + w["M2"] + w["J"], rel=1e-10, abs=1e-12)


def test_zero_density_gives_zero():
    phi = WeightedDensity.constant(0.0, A)
    s = MovingBoundary.linear(0.0, 0.3)
    assert potential_E(phi, s, 0.4, 1.0, SPEC).value == 0.0
    assert potential_Z(phi, s, 0.4, 1.0, SPEC).value == 0.0


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0))
def test_linear_in_density(a, b):
    p1 = WeightedDensity.polynomial([1.0, 0.5], A)
    p2 = WeightedDensity.weighted(1.0, A)
    mix = WeightedDensity(lambda t: a * p1.psi(t) + b * p2.psi(t), A)
    s = MovingBoundary.power(0.0, 0.3, 0.8)
    for fn in (potential_E, potential_Z_dx):
        lhs = fn(mix, s, 0.25, 0.9, SPEC).value
        rhs = a * fn(p1, s, 0.25, 0.9, SPEC).value + b * fn(p2, s, 0.25, 0.9, SPEC).value
        assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


def test_flat_boundary_derivative_is_odd():
    phi = WeightedDensity.polynomial([1.0, 1.0], A)
    s = MovingBoundary.const(0.4)
    for d in (0.01, 0.3):
        assert potential_E_dx(phi, s, 0.4 + d, 1.0, SPEC).value == pytest.approx(
            -potential_E_dx(phi, s, 0.4 - d, 1.0, SPEC).value, rel=1e-10)
    assert boundary_E_dx_direct(phi, s, 1.0, SPEC).value == 0.0


def test_derivative_matches_richardson_difference():
    phi = WeightedDensity.polynomial([1.0, 0.5], A)
    s = MovingBoundary.linear(0.0, 0.4)
    x, t = 0.8, 1.0
    d = [(potential_E(phi, s, x + h, t, SPEC).value - potential_E(phi, s, x - h, t, SPEC).value) / (2 * h)
         for h in (2e-3, 1e-3)]
    assert potential_E_dx(phi, s, x, t, SPEC).value == pytest.approx((4 * d[1] - d[0]) / 3, rel=1e-7)


def test_direct_value_stable_under_refinement():
    from fracpot.config import QuadratureConfig
    phi = WeightedDensity.constant(1.0, A)
    s = MovingBoundary.linear(0.0, 0.5)
    coarse = boundary_E_dx_direct(phi, s, 1.0, SPEC).value
    fine = boundary_E_dx_direct(phi, s, 1.0, SPEC, QuadratureConfig(tau_width=0.5, p_width=0.5)).value
    assert math.isfinite(coarse) and coarse == pytest.approx(fine, rel=1e-8)


def test_far_field_decay():
    phi = WeightedDensity.constant(1.0, A)
    s = MovingBoundary.const()
    vals = [abs(potential_E(phi, s, d, 1.0, SPEC).value) for d in (1.0, 2.0, 4.0, 6.0)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    # envelope exp(-kappa d**(2/(2-a))) with kappa below the admissible rate
    from fracpot.estimates import kappa_sup
    k = 0.8 * kappa_sup(SPEC)
    ratios = [v / math.exp(-k * d ** (2 / (2 - A))) for v, d in zip(vals, (1.0, 2.0, 4.0, 6.0))]
    assert max(ratios) < 10 * ratios[0]


@pytest.mark.parametrize("t", [0.2, 0.6, 1.0])
def test_potentials_within_integrability_bounds(t):
    from fracpot.potentials import duis2_bound, duis_bound
    phi = WeightedDensity.polynomial([1.0, -0.5], A)
    s = MovingBoundary.power(0.0, 0.5, 0.8)
    for x in (0.0, 0.3):
        e = abs(potential_E(phi, s, x, t, SPEC).value)
        z = abs(potential_Z(phi, s, x, t, SPEC).value)
        assert e <= 5 * duis_bound(phi, t, SPEC)
        assert z <= 5 * duis2_bound(phi, t, SPEC)


def test_window_terms_scale_with_delta():
    phi = WeightedDensity.weighted(1.0, A)
    s = MovingBoundary.power(0.0, 0.5, 0.9)
    ratios = []
    for delta in (0.2, 0.05, 0.0125):
        w = window_diagnostics(phi, s, 1.0, 1e-4, delta, SPEC)
        ratios.append((abs(w["M1"]) + abs(w["M2"])) / w["bound_scale"])
    assert max(ratios) < 5 * min(ratios) + 1e-12


def test_flat_boundary_Z_derivative_limits():
    # the cusp of Z_x at the origin gives one-sided limits -+ I^{1-a} phi (t) / 2, on-boundary value 0
    phi = WeightedDensity.constant(1.0, A)
    rep = continuity_check_Z(phi, MovingBoundary.const(), 1.0, SPEC)
    half = 0.5 / math.gamma(2 - A)
    assert rep.boundary_value == 0.0
    assert rep.left.limit == pytest.approx(half, abs=1e-8)
    assert rep.right.limit == pytest.approx(-half, abs=1e-8)
