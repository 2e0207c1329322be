import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from shockreflect.ahead import (
    AheadField,
    boundary_characteristic,
    containment_check,
    eval_ahead,
    eval_ahead_grads,
)
from shockreflect.eos import FluidState, InvariantPair, char_speeds, from_invariants
from shockreflect.errors import ContainmentError, DomainError, HorizonError
from shockreflect.rankine import solve_reflection_point

from conftest import make_eos

EOS = make_eos()
SW = AheadField.simple_wave(EOS, 1.0, -0.5, 0.3, 0.2, 0.5)


def profile(x0):
    return 1.5 + 0.3 * (1.0 - np.exp(-x0 / 0.2))


def oracle_alpha(t, x):
    # foot point of the straight characteristic x = x0 + c_out(alpha0(x0)) t
    cout = lambda al: char_speeds(EOS, InvariantPair(al, 2.5))[1]
    x0 = brentq(lambda s: s + cout(profile(s)) * t - x, x - t - 1e-3, x + 1e-3, xtol=1e-15)
    return profile(x0)


def test_constant_field():
    f = AheadField.constant(EOS, 1.0, -0.5, 1.0)
    al, be = eval_ahead(f, [0.1, 0.5], [0.0, 0.3])
    assert np.all(al == 1.5) and np.all(be == 2.5)
    assert all(np.all(g == 0) for g in eval_ahead_grads(f, 0.2, 0.1))


@given(st.floats(0.0, 0.5), st.floats(0.0, 1.0))
def test_simple_wave_against_oracle(t, dx):
    x = 0.5 * t + dx  # right of the boundary characteristic x = c_out t = t/2
    al, be = eval_ahead(SW, t, x)
    assert float(al) == pytest.approx(oracle_alpha(t, x), abs=1e-13)
    assert float(be) == 2.5


@settings(max_examples=40)
@given(st.floats(0.01, 0.45), st.floats(0.05, 0.8))
def test_grads_finite_difference(t, dx):
    x = 0.5 * t + dx
    g = eval_ahead_grads(SW, t, x)
    h = 1e-5
    A = lambda tt, xx: float(eval_ahead(SW, tt, xx)[0])
    assert g.a_t == pytest.approx((A(t + h, x) - A(t - h, x)) / (2 * h), abs=1e-8)
    assert g.a_x == pytest.approx((A(t, x + h) - A(t, x - h)) / (2 * h), abs=1e-8)
    Gt = lambda tt, xx: eval_ahead_grads(SW, tt, xx)
    assert g.a_tt == pytest.approx((Gt(t + h, x).a_t - Gt(t - h, x).a_t) / (2 * h), abs=1e-7)
    assert g.a_tx == pytest.approx((Gt(t, x + h).a_t - Gt(t, x - h).a_t) / (2 * h), abs=1e-7)
    assert g.a_xx == pytest.approx((Gt(t, x + h).a_x - Gt(t, x - h).a_x) / (2 * h), abs=1e-7)
    assert g.b_t == g.b_x == g.b_tt == g.b_tx == g.b_xx == 0


@given(st.floats(0.0, 0.5), st.floats(0.0, 1.0))
def test_transport_identity(t, dx):
    # alpha_t + c_out alpha_x = 0 exactly for a simple wave
    x = 0.5 * t + dx
    al, be = eval_ahead(SW, t, x)
    g = eval_ahead_grads(SW, t, x)
    cout = char_speeds(EOS, InvariantPair(al, be))[1]
    assert abs(g.a_t + cout * g.a_x) < 1e-13


def _euler_residual(h, t=0.25, x=0.4):
    def cons(tt, xx):
        rho, w = from_invariants(EOS, InvariantPair(*eval_ahead(SW, tt, xx)))
        return np.array([rho, rho * w]), np.array([rho * w, rho * w * w + EOS.pressure(rho)])

    q_t = (cons(t + h, x)[0] - cons(t - h, x)[0]) / (2 * h)
    f_x = (cons(t, x + h)[1] - cons(t, x - h)[1]) / (2 * h)
    return np.max(np.abs(q_t + f_x))


def test_provider_solves_euler():
    r1, r2 = _euler_residual(1e-2), _euler_residual(5e-3)
    order = np.log2(r1 / r2)
    assert r1 < 1e-3
    assert order >= 1.8


def test_boundary_characteristic_is_straight():
    # the foot point stays at x0 = 0, so the characteristic is x = c_out(alpha_m0) t
    for field in (SW, AheadField.constant(EOS, 1.0, -0.5, 0.5)):
        bc = boundary_characteristic(field, n=64)
        np.testing.assert_allclose(bc.x, 0.5 * bc.t, atol=1e-14)
        assert bc(0.3) == pytest.approx(0.15, abs=1e-14)


def test_boundary_characteristic_compressive_profile():
    f = AheadField.simple_wave(EOS, 1.0, -0.5, -0.1, 0.5, 0.5)
    for n in (8, 16):
        assert boundary_characteristic(f, n=n).x[-1] == pytest.approx(0.25, abs=1e-13)


def test_boundary_characteristic_refl_mismatch():
    refl = solve_reflection_point(EOS, FluidState(1.2, -0.5))
    with pytest.raises(DomainError):
        boundary_characteristic(SW, refl)


def test_containment_check_sign():
    bc = boundary_characteristic(SW)
    t = np.linspace(0, 0.4, 5)
    assert containment_check(bc, t, 0.5 * t + 0.01) == pytest.approx(0.01, abs=1e-12)
    assert containment_check(bc, t, 0.5 * t) == pytest.approx(0.0, abs=1e-12)
    assert containment_check(bc, t, 0.5 * t - 0.01) < 0


def test_horizon_and_containment_errors():
    with pytest.raises(HorizonError):
        eval_ahead(SW, 0.6, 1.0)
    with pytest.raises(ContainmentError):
        eval_ahead(SW, 0.2, 0.0)
    al, _ = eval_ahead(SW, 0.2, 0.0, strict=False)
    assert np.isfinite(al)


def test_crossing_characteristics_rejected():
    with pytest.raises(DomainError, match="cross"):
        AheadField.simple_wave(EOS, 1.0, -0.5, -1.0, 0.1, 1.0)
    with pytest.raises(DomainError):
        AheadField.simple_wave(EOS, 1.0, -0.5, 0.1, 0.0, 1.0)
    with pytest.raises(DomainError):
        AheadField.constant(EOS, 1.0, -0.5, 0.0)


def test_reflection_point_fills_beta0_prime():
    r = SW.reflection_point()
    assert r.beta0_prime is not None and r.beta0_prime != 0
    assert AheadField.constant(EOS, 1.0, -0.5, 0.5).reflection_point().beta0_prime == 0
