import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline

from shockreflect.ahead import AheadField
from shockreflect.eos import FluidState, InvariantPair, char_speeds, speed_partials
from shockreflect.errors import HorizonError, NonContraction, PreconditionError, SolverError
from shockreflect.rankine import residual_J, solve_reflection_point
from shockreflect.solver import (
    SolverConfig,
    assemble_invariant_fields,
    coefficient_partials,
    compute_coefficient_fields,
    compute_shock_traces,
    compute_time_field,
    evaluate,
    init_iterate,
    make_problem,
    solve,
    step,
    update_x,
    validate_iterate,
)

from conftest import horizon, make_ahead, make_eos

FIELDS = ("x", "x_u", "x_v", "x_uu", "x_uv", "x_vv", "beta_plus")


@pytest.fixture(scope="module")
def const_prob():
    eos = make_eos()
    return make_problem(SolverConfig(epsilon=0.1, n_sigma=16, n_tau=16), eos, make_ahead("constant", 0.1, eos))


@pytest.fixture(scope="module")
def sw_prob():
    eos = make_eos()
    return make_problem(SolverConfig(epsilon=0.05, n_sigma=16, n_tau=16), eos, make_ahead("simple_wave", 0.05, eos))


def test_init_iterate_examples(sw_prob):
    spec, refl = sw_prob.spec, sw_prob.refl
    s = init_iterate(refl, spec)
    assert s.x[-1, -1] == pytest.approx(spec.epsilon * (1 - spec.a), rel=1e-15)
    assert np.all(s.x[:, 0] == 0)
    assert s.beta_plus[-1] == pytest.approx(refl.beta0 + refl.beta0_prime * spec.epsilon, rel=1e-15)
    with pytest.raises(PreconditionError):
        init_iterate(dataclasses.replace(refl, beta0_prime=None), spec)


def test_invariant_fields_affine_trace(sw_prob):
    spec, refl = sw_prob.spec, sw_prob.refl
    inv = assemble_invariant_fields(sw_prob, init_iterate(refl, spec))
    np.testing.assert_allclose(inv.alpha, refl.beta0 + refl.beta0_prime * spec.u, rtol=1e-14)
    np.testing.assert_allclose(inv.beta, refl.beta0 + refl.beta0_prime * spec.v, rtol=1e-14)
    # second derivative of an affine trace is roundoff / h^2
    h = spec.epsilon / spec.n_sigma
    assert np.max(np.abs(inv.beta_plus_pp)) < 100 * np.finfo(float).eps * refl.beta0 / h**2
    assert np.array_equal(inv.alpha[:, 0], inv.beta[:, 0])


def test_constant_iterate_components(const_prob):
    spec, refl = const_prob.spec, const_prob.refl
    s = init_iterate(refl, spec)
    inv = assemble_invariant_fields(const_prob, s)
    assert np.all(inv.alpha == refl.beta0) and np.all(inv.beta == refl.beta0)
    tf = compute_time_field(const_prob, s, inv)
    np.testing.assert_allclose(tf.t, (spec.u + spec.v) / refl.eta0, atol=1e-12)
    assert tf.t[0, 0] == 0
    assert tf.t_v[0, 0] == pytest.approx(1 / refl.eta0, rel=1e-15)
    assert 1 / refl.eta0 == pytest.approx(0.8029, abs=1e-4)
    sh = compute_shock_traces(const_prob, s, inv, tf)
    np.testing.assert_allclose(sh.V, refl.V0, atol=1e-12)
    np.testing.assert_allclose(sh.Gamma, -1.0, atol=1e-12)
    np.testing.assert_allclose(sh.x, (1 - spec.a) * spec.shock_v, atol=1e-15)
    co = compute_coefficient_fields(const_prob, s, inv, sh)
    for f in co:
        assert np.all(f == 0)
    new = update_x(const_prob, s, co)
    assert np.array_equal(new["x"], s.x)


def test_constant_exact_fixed_point(const_prob):
    s = init_iterate(const_prob.refl, const_prob.spec)
    new = step(const_prob, s).state
    for name in FIELDS:
        assert np.max(np.abs(getattr(new, name) - getattr(s, name))) <= 1e-11, name


def test_step_pins_wall_and_origin(sw_prob):
    s = init_iterate(sw_prob.refl, sw_prob.spec)
    before = {k: getattr(s, k).copy() for k in FIELDS}
    for _ in range(3):
        res = step(sw_prob, s)
        new = res.state
        assert np.all(new.x[:, 0] == 0)
        assert np.array_equal(res.inv.alpha[:, 0], res.inv.beta[:, 0])
        assert new.beta_plus[0] == sw_prob.refl.beta0
        assert new.x_v[0, 0] == 1.0 and new.x_u[0, 0] == -1.0 and new.x[0, 0] == 0.0
        s = new
    # snapshots are never mutated
    s0 = init_iterate(sw_prob.refl, sw_prob.spec)
    step(sw_prob, s0)
    assert all(np.array_equal(getattr(s0, k), before[k]) for k in FIELDS)


def test_gamma_origin_and_mu_origin(sw_prob):
    refl = sw_prob.refl
    inv, tf, sh, co = evaluate(sw_prob, init_iterate(refl, sw_prob.spec))
    assert sh.Gamma[0] == pytest.approx(-1.0, abs=1e-12)
    dcin_db = speed_partials(sw_prob.eos, InvariantPair(refl.beta0, refl.beta0))[1]
    assert co.mu[0, 0] == pytest.approx(-dcin_db * refl.beta0_prime / (2 * refl.eta0), rel=1e-12)


@given(st.floats(1.5, 3.0), st.floats(1.5, 3.0))
def test_coefficient_partials_finite_difference(a, b):
    eos = make_eos()
    f, f_a, f_b, g, g_a, g_b = coefficient_partials(eos, a, b)
    ci, co = char_speeds(eos, InvariantPair(a, b))
    ci_a, ci_b, co_a, _ = speed_partials(eos, InvariantPair(a, b))
    assert f == pytest.approx(co * ci_b / ((co - ci) * ci), rel=1e-13)
    assert g == pytest.approx(-ci * co_a / ((co - ci) * co), rel=1e-13)
    h = 1e-6
    P = lambda aa, bb: np.array(coefficient_partials(eos, aa, bb))[[0, 3]]
    da = (P(a + h, b) - P(a - h, b)) / (2 * h)
    db = (P(a, b + h) - P(a, b - h)) / (2 * h)
    np.testing.assert_allclose([f_a, g_a], da, atol=1e-7)
    np.testing.assert_allclose([f_b, g_b], db, atol=1e-7)


def test_converged_internal_consistency(s2_run):
    sol, diag, _ = s2_run
    s, spec = sol.state, sol.spec
    assert np.max(np.abs(s.x_uv - sol.coeffs.M)) <= 1e-9
    # differencing x_u and x along the outgoing lines (v direction)
    scale = (spec.epsilon * spec.sigma * (1 - spec.a))[1:, None]
    dxu = CubicSpline(spec.tau, s.x_u, axis=1).derivative()(spec.tau)[1:] / scale
    dx = CubicSpline(spec.tau, s.x, axis=1).derivative()(spec.tau)[1:] / scale
    assert np.max(np.abs(dxu - sol.coeffs.M[1:])) <= 1e-9
    assert np.max(np.abs(dx - s.x_v[1:])) <= 1e-9
    # characteristic equations x_u = c_in t_u, x_v = c_out t_v
    ci, co = char_speeds(sol.eos, InvariantPair(sol.alpha, sol.beta))
    assert np.max(np.abs(s.x_u - ci * sol.time.t_u)) <= 1e-10
    assert np.max(np.abs(s.x_v - co * sol.time.t_v)) <= 1e-10
    # shock boundary condition x_v = Gamma x_u on tau = 1
    assert np.max(np.abs(s.x_v[:, -1] - sol.shock.Gamma * s.x_u[:, -1])) <= 1e-9


def test_converged_shock_relations(s2_run):
    sol, _, _ = s2_run
    sh, spec = sol.shock, sol.spec
    J = residual_J(sol.eos, sh.alpha_plus, sh.beta_plus, sh.alpha_minus, sh.beta_minus)
    assert np.max(np.abs(J)) <= 1e-10
    dt = CubicSpline(sh.v, sh.t).derivative()(sh.v[1:-1])
    dx = CubicSpline(sh.v, sh.x).derivative()(sh.v[1:-1])
    assert np.max(np.abs(dx - sh.V[1:-1] * dt)) <= 1e-8
    bp, h = sol.state.beta_plus, spec.epsilon / spec.n_sigma
    one_sided = (-3 * bp[0] + 4 * bp[1] - bp[2]) / (2 * h)
    assert one_sided == pytest.approx(sol.refl.beta0_prime, rel=1e-4)


def test_converged_diagnostics(s2_run):
    sol, diag, _ = s2_run
    assert diag.converged and diag.iterations == len(diag.value_deltas)
    assert all(r < 1 for r in diag.ratios_value)
    assert diag.max_ratio == max(diag.ratios_value)
    assert diag.determinism_min_margin > 0 and diag.containment_min_margin >= 0
    assert diag.a == sol.refl.a
    json.dumps(diag.to_dict())


def test_constant_solve(constant_run):
    sol, diag, _ = constant_run
    spec, refl = sol.spec, sol.refl
    assert diag.converged and diag.iterations <= 3
    assert np.max(np.abs(sol.x - (spec.v - spec.u))) <= 1e-10
    assert np.max(np.abs(sol.t - (spec.u + spec.v) / refl.eta0)) <= 1e-9
    np.testing.assert_allclose(sol.rho, refl.rho0, rtol=1e-12)
    assert np.max(np.abs(sol.w)) <= 1e-12


def test_validate_rejects_bad_iterates(sw_prob):
    refl, spec = sw_prob.refl, sw_prob.spec
    good = init_iterate(refl, spec)
    validate_iterate(good, refl, spec)
    bad_beta = dataclasses.replace(good, beta_plus=good.beta_plus + 1e-6)
    x = good.x.copy()
    x[3, 0] = 1e-8
    xu = good.x_u.copy()
    xu[0, 0] = -1.001
    for bad in (bad_beta, dataclasses.replace(good, x=x), dataclasses.replace(good, x_u=xu),
                dataclasses.replace(good, x_vv=good.x_vv[:-1])):
        with pytest.raises(PreconditionError):
            validate_iterate(bad, refl, spec)
    with pytest.raises(PreconditionError):
        solve(SolverConfig(epsilon=0.05, n_sigma=16, n_tau=16), sw_prob.eos, sw_prob.ahead, init=bad_beta)


def _strong(eos, delta, L, eps):
    base = solve_reflection_point(eos, FluidState(1.0, -0.5))
    return AheadField.simple_wave(eos, 1.0, -0.5, delta, L, horizon(base, eps))


@pytest.mark.parametrize("delta, L, eps, exc", [(1.0, 0.1, 5.0, SolverError), (0.5, 0.2, 5.0, HorizonError)])
def test_failing_configuration_reports_iteration(delta, L, eps, exc):
    eos = make_eos()
    with pytest.raises(exc) as info:
        solve(SolverConfig(epsilon=eps, n_sigma=16, n_tau=16), eos, _strong(eos, delta, L, eps))
    assert info.value.iteration >= 1
    assert info.value.diagnostics is not None


def test_non_contraction_after_max_iter(sw_prob):
    with pytest.raises(NonContraction) as info:
        solve(SolverConfig(epsilon=0.05, n_sigma=16, n_tau=16, max_iter=2), sw_prob.eos, sw_prob.ahead)
    assert info.value.iteration == 2
    assert len(info.value.diagnostics.value_deltas) == 2


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(tol_value=0.0)
    with pytest.raises(ValueError):
        SolverConfig(max_iter=0)
