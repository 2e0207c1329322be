"""Fixed-point iteration for the flow behind the reflected shock.

One step maps the pair ``(x, beta_plus)`` (the position field on the
characteristic triangle together with all its first and second derivative
fields, and the invariant trace behind the shock) to the next pair:

1. ``alpha(u, v) = beta_plus(u)`` and ``beta(u, v) = beta_plus(v)``;
2. ``t`` from the characteristic equations by integration along the wall and
   the outgoing lines;
3. shock traces, the state ahead at the shock, shock speed ``V`` and the
   boundary coefficient ``Gamma``;
4. the coefficient fields ``mu, nu, M`` and the shock source ``Lambda``;
5. the new ``x`` and every derivative field from closed-form integrals (no
   numerical differencing of 2D fields);
6. the new ``beta_plus`` from the Hugoniot relation node by node.

The iterate derivative of ``beta_plus`` at ``v = 0`` is pinned to the
reflection-point value by a clamped spline, so ball membership is preserved by
construction.
"""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .ahead import SLACK, AheadField, BoundaryChar, boundary_characteristic, eval_ahead
from .eos import BarotropicEos, InvariantPair, char_speeds, from_invariants, speed_partials
from .errors import (
    ContainmentError,
    DegenerateJumpError,
    DeterminismFailure,
    DomainError,
    NonContraction,
    PreconditionError,
    ShockVanished,
    SolverError,
)
from .grid import (
    DomainSpec,
    cumulative_shock_integral,
    discrete_norms,
    integrate_incoming,
    integrate_outgoing,
    integrate_wall,
    trace_spline,
)
from .rankine import ReflectionPointData, determinism_check, shock_speed, solve_H

# value deltas bottom out near 1e-15; ratios involving deltas below this floor
# (1000x that level) are roundoff-dominated and not recorded
RATIO_FLOOR = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.05
    n_sigma: int = 64
    n_tau: int = 64
    tol_value: float = 1e-11
    tol_norm: float = 1e-8
    max_iter: int = 200

    def __post_init__(self):
        if not (self.tol_value > 0 and self.tol_norm > 0):
            raise ValueError("solver tolerances must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be at least 1")

    def domain(self, a: float) -> DomainSpec:
        return DomainSpec(self.epsilon, a, self.n_sigma, self.n_tau)


@dataclass(frozen=True)
class IterateState:
    """The unknowns carried from step to step.

    ``x`` and its five derivative fields live on the ``(sigma, tau)`` grid;
    ``beta_plus`` is sampled on the shock parameter grid ``v = eps sigma``.
    """

    x: np.ndarray
    x_u: np.ndarray
    x_v: np.ndarray
    x_uu: np.ndarray
    x_uv: np.ndarray
    x_vv: np.ndarray
    beta_plus: np.ndarray


class InvariantFields(NamedTuple):
    spline: CubicSpline
    alpha: np.ndarray
    beta: np.ndarray
    alpha_u: np.ndarray  # beta_plus'(u)
    beta_v: np.ndarray  # beta_plus'(v)
    alpha_uu: np.ndarray
    beta_vv: np.ndarray
    beta_plus_pp: np.ndarray  # beta_plus'' at the trace nodes


class TimeField(NamedTuple):
    t: np.ndarray
    t_u: np.ndarray
    t_v: np.ndarray


class ShockTraces(NamedTuple):
    v: np.ndarray
    t: np.ndarray
    x: np.ndarray
    alpha_plus: np.ndarray
    beta_plus: np.ndarray
    alpha_minus: np.ndarray
    beta_minus: np.ndarray
    V: np.ndarray
    Gamma: np.ndarray
    dGamma: np.ndarray
    containment: np.ndarray  # x_plus - x0*(t_plus) per node
    determinism: tuple  # (V - c_out_minus, c_out_plus - V) per node


class CoefficientFields(NamedTuple):
    mu: np.ndarray
    nu: np.ndarray
    M: np.ndarray
    M_u: np.ndarray
    M_v: np.ndarray
    Lambda: np.ndarray  # on the shock parameter grid


@dataclass
class Diagnostics:
    iterations: int = 0
    converged: bool = False
    value_deltas: list = field(default_factory=list)
    norm_deltas: list = field(default_factory=list)
    ratios_value: list = field(default_factory=list)
    ratios_norm: list = field(default_factory=list)
    x_norm_history: list = field(default_factory=list)
    beta_norm_history: list = field(default_factory=list)
    determinism_min_margin: float = float("nan")
    containment_min_margin: float = float("nan")
    extension_events: int = 0
    a: float = float("nan")
    wall_clock: float = 0.0

    @property
    def max_ratio(self) -> float:
        return max(self.ratios_value, default=float("nan"))

    @property
    def max_ratio_norm(self) -> float:
        return max(self.ratios_norm, default=float("nan"))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["max_ratio"] = self.max_ratio
        d["max_ratio_norm"] = self.max_ratio_norm
        return d


@dataclass(frozen=True)
class Problem:
    eos: BarotropicEos
    ahead: AheadField
    refl: ReflectionPointData
    spec: DomainSpec
    bchar: BoundaryChar


@dataclass(frozen=True)
class Solution:
    problem: Problem
    state: IterateState
    inv: InvariantFields
    time: TimeField
    shock: ShockTraces
    coeffs: CoefficientFields
    rho: np.ndarray
    w: np.ndarray

    @property
    def spec(self) -> DomainSpec:
        return self.problem.spec

    @property
    def refl(self) -> ReflectionPointData:
        return self.problem.refl

    @property
    def eos(self) -> BarotropicEos:
        return self.problem.eos

    @property
    def x(self) -> np.ndarray:
        return self.state.x

    @property
    def t(self) -> np.ndarray:
        return self.time.t

    @property
    def alpha(self) -> np.ndarray:
        return self.inv.alpha

    @property
    def beta(self) -> np.ndarray:
        return self.inv.beta


# ---------------------------------------------------------------------------
# initial iterate


def init_iterate(refl: ReflectionPointData, spec: DomainSpec) -> IterateState:
    """``x = v - u`` and the affine trace ``beta0 + beta0' v``."""
    if refl.beta0_prime is None:
        raise PreconditionError("reflection data lacks beta0'")
    u, v = spec.u, spec.v
    zero = np.zeros_like(u)
    return IterateState(
        x=v - u,
        x_u=-np.ones_like(u),
        x_v=np.ones_like(u),
        x_uu=zero,
        x_uv=zero.copy(),
        x_vv=zero.copy(),
        beta_plus=refl.beta0 + refl.beta0_prime * spec.shock_v,
    )


def validate_iterate(state: IterateState, refl: ReflectionPointData, spec: DomainSpec, tol=1e-14) -> None:
    """Reject an initial iterate outside the admissible ball.

    Checks the pinned values ``beta_plus(0) = beta0``, ``x = 0`` on the wall and
    the origin normalization ``x_v = 1 = -x_u``.
    """
    shape = (spec.n_sigma + 1, spec.n_tau + 1)
    for name in ("x", "x_u", "x_v", "x_uu", "x_uv", "x_vv"):
        arr = getattr(state, name)
        if arr.shape != shape or not np.all(np.isfinite(arr)):
            raise PreconditionError(f"initial iterate field {name} has wrong shape or non-finite entries")
    if state.beta_plus.shape != (spec.n_sigma + 1,) or not np.all(np.isfinite(state.beta_plus)):
        raise PreconditionError("initial beta_plus trace has wrong shape or non-finite entries")
    if abs(state.beta_plus[0] - refl.beta0) > tol:
        raise PreconditionError("initial iterate violates beta_plus(0) = beta0")
    if np.max(np.abs(state.x[:, 0])) > tol:
        raise PreconditionError("initial iterate violates x = 0 on the wall")
    if abs(state.x_u[0, 0] + 1.0) > tol or abs(state.x_v[0, 0] - 1.0) > tol or abs(state.x[0, 0]) > tol:
        raise PreconditionError("initial iterate violates the origin normalization")


# ---------------------------------------------------------------------------
# step components


def assemble_invariant_fields(prob: Problem, state: IterateState) -> InvariantFields:
    spec = prob.spec
    S = trace_spline(spec, state.beta_plus, bc_type=((1, prob.refl.beta0_prime), "not-a-knot"))
    S1, S2 = S.derivative(1), S.derivative(2)
    u, v = spec.u, spec.v
    return InvariantFields(
        spline=S,
        alpha=S(u),
        beta=S(v),
        alpha_u=S1(u),
        beta_v=S1(v),
        alpha_uu=S2(u),
        beta_vv=S2(v),
        beta_plus_pp=S2(spec.shock_v),
    )


def compute_time_field(prob: Problem, state: IterateState, inv: InvariantFields) -> TimeField:
    spec = prob.spec
    pair = InvariantPair(inv.alpha, inv.beta)
    c_in, c_out = char_speeds(prob.eos, pair)
    dcout_da = speed_partials(prob.eos, pair)[2]
    phi = state.x_u / c_in
    psi = state.x_v / c_out
    t = integrate_wall(spec, phi + psi)[:, None] + integrate_outgoing(spec, psi)
    # d(psi)/du with h = 1/c_out and dh/du = -c_out_alpha alpha_u / c_out^2
    psi_u = -dcout_da * inv.alpha_u / c_out**2 * state.x_v + state.x_uv / c_out
    t_u = phi[:, :1] + integrate_outgoing(spec, psi_u)
    return TimeField(t, t_u, psi)


def compute_shock_traces(prob: Problem, state: IterateState, inv: InvariantFields, tf: TimeField) -> ShockTraces:
    spec, eos, a = prob.spec, prob.eos, prob.spec.a
    sv = spec.shock_v
    t_p = tf.t[:, -1]
    x_p = state.x[:, -1]
    margin = x_p - prob.bchar(t_p)
    if np.any(margin < -SLACK):
        k = int(np.argmin(margin))
        raise ContainmentError(f"shock trace left the development at node {k} (margin {margin[k]:.3e})")
    al_m, be_m = eval_ahead(prob.ahead, t_p, x_p)
    al_p = inv.spline(a * sv)
    be_p = state.beta_plus
    plus = from_invariants(eos, InvariantPair(al_p, be_p))
    minus = from_invariants(eos, InvariantPair(al_m, be_m))
    try:
        V = shock_speed(eos, plus, minus)
    except DegenerateJumpError as exc:
        raise ShockVanished(f"shock vanished: {exc}") from exc
    c_in_p, c_out_p = char_speeds(eos, InvariantPair(al_p, be_p))
    Gamma = a * (c_out_p / c_in_p) * (V - c_in_p) / (c_out_p - V)
    dGamma = trace_spline(spec, Gamma).derivative()(sv)
    det = determinism_check(eos, InvariantPair(al_p, be_p), InvariantPair(al_m, be_m), V)
    return ShockTraces(sv, t_p, x_p, al_p, be_p, al_m, be_m, V, Gamma, dGamma, margin, det)


def coefficient_partials(eos: BarotropicEos, alpha, beta):
    """``f, f_a, f_b, g, g_a, g_b`` with ``mu = f beta_plus'(v)`` and ``nu = g beta_plus'(u)``.

    ``f = c_out c_in_b / ((c_out - c_in) c_in)`` and
    ``g = -c_in c_out_a / ((c_out - c_in) c_out)``; both EOS families have
    constant first partials of the speeds, so only the speeds themselves vary.
    """
    pair = InvariantPair(alpha, beta)
    ci, co = char_speeds(eos, pair)
    ci_a, ci_b, co_a, co_b = speed_partials(eos, pair)
    D = co - ci
    # q = c_out / (D c_in), r = c_in / (D c_out)
    q = co / (D * ci)
    q_co = -1.0 / D**2
    q_ci = -co * (co - 2.0 * ci) / (D * ci) ** 2
    r = ci / (D * co)
    r_ci = 1.0 / D**2
    r_co = -ci * (2.0 * co - ci) / (D * co) ** 2
    f = ci_b * q
    f_a = ci_b * (q_co * co_a + q_ci * ci_a)
    f_b = ci_b * (q_co * co_b + q_ci * ci_b)
    g = -co_a * r
    g_a = -co_a * (r_co * co_a + r_ci * ci_a)
    g_b = -co_a * (r_co * co_b + r_ci * ci_b)
    return f, f_a, f_b, g, g_a, g_b


def compute_coefficient_fields(prob: Problem, state: IterateState, inv: InvariantFields, shock: ShockTraces) -> CoefficientFields:
    f, f_a, f_b, g, g_a, g_b = coefficient_partials(prob.eos, inv.alpha, inv.beta)
    bv, au = inv.beta_v, inv.alpha_u
    mu = f * bv
    nu = g * au
    mu_u = f_a * au * bv
    mu_v = f_b * bv * bv + f * inv.beta_vv
    nu_u = g_a * au * au + g * inv.alpha_uu
    nu_v = g_b * bv * au
    M = mu * state.x_u + nu * state.x_v
    M_u = mu_u * state.x_u + mu * state.x_uu + nu_u * state.x_v + nu * state.x_uv
    M_v = mu_v * state.x_u + mu * state.x_uv + nu_v * state.x_v + nu * state.x_vv
    # the shock point (a u, u) is the tau = 1 grid line at parameter u
    G = shock.Gamma
    Lam = G * prob.spec.a * state.x_uu[:, -1] + shock.dGamma * state.x_u[:, -1] + G * M[:, -1]
    return CoefficientFields(mu, nu, M, M_u, M_v, Lam)


def update_x(prob: Problem, state: IterateState, co: CoefficientFields) -> dict:
    spec = prob.spec
    a = spec.a
    u, v = spec.u, spec.v
    IM = integrate_incoming(spec, co.M)
    IMv = integrate_incoming(spec, co.M_v)
    Phi = cumulative_shock_integral(spec, co.Lambda, v) + IM
    Lam_s = trace_spline(spec, co.Lambda)
    Ms = trace_spline(spec, co.M[:, -1])
    uw = spec.wall_u  # u on each sigma line
    x = v - u + integrate_outgoing(spec, Phi)
    x_u = -1.0 - Phi[:, :1] + integrate_outgoing(spec, co.M)
    x_v = 1.0 + Phi
    x_uv = co.M.copy()
    x_uu = (-Lam_s(uw) - 2.0 * co.M[:, 0] + a * Ms(uw) - IMv[:, 0])[:, None] + integrate_outgoing(spec, co.M_u)
    x_vv = Lam_s(v) - a * Ms(v) + IMv
    return dict(x=x, x_u=x_u, x_v=x_v, x_uu=x_uu, x_uv=x_uv, x_vv=x_vv)


def update_beta_plus(prob: Problem, state: IterateState, shock: ShockTraces) -> np.ndarray:
    return solve_H(prob.eos, shock.alpha_plus, shock.alpha_minus, shock.beta_minus, guess=state.beta_plus)


class StepResult(NamedTuple):
    state: IterateState
    inv: InvariantFields
    time: TimeField
    shock: ShockTraces
    coeffs: CoefficientFields


def evaluate(prob: Problem, state: IterateState):
    """All derived quantities of an iterate (steps 1-4)."""
    inv = assemble_invariant_fields(prob, state)
    tf = compute_time_field(prob, state, inv)
    shock = compute_shock_traces(prob, state, inv, tf)
    co = compute_coefficient_fields(prob, state, inv, shock)
    return inv, tf, shock, co


def step(prob: Problem, state: IterateState) -> StepResult:
    inv, tf, shock, co = evaluate(prob, state)
    new = IterateState(**update_x(prob, state, co), beta_plus=update_beta_plus(prob, state, shock))
    return StepResult(new, inv, tf, shock, co)


# ---------------------------------------------------------------------------
# driver


def make_problem(config: SolverConfig, eos: BarotropicEos, ahead: AheadField, refl: ReflectionPointData | None = None) -> Problem:
    if refl is None:
        refl = ahead.reflection_point()
    if refl.beta0_prime is None:
        raise PreconditionError("reflection data lacks beta0'")
    spec = config.domain(refl.a)
    return Problem(eos, ahead, refl, spec, boundary_characteristic(ahead, refl))


def _ratio(num, den, floor):
    if den <= floor or num <= floor:
        return None
    return num / den


def solve(
    config: SolverConfig,
    eos: BarotropicEos,
    ahead: AheadField,
    refl: ReflectionPointData | None = None,
    init: IterateState | None = None,
) -> tuple[Solution, Diagnostics]:
    """Iterate to the fixed point and assemble the solution.

    Raises
    ------
    NonContraction
        ``max_iter`` reached without meeting both stopping tolerances.
    SolverError
        Any abort inside a step; ``iteration`` and ``diagnostics`` are attached.
    """
    t0 = time.perf_counter()
    prob = make_problem(config, eos, ahead, refl)
    spec, refl = prob.spec, prob.refl
    state = init_iterate(refl, spec) if init is None else init
    validate_iterate(state, refl, spec)
    diag = Diagnostics(a=refl.a)
    prev_val = prev_norm = None
    m = 0
    try:
        for m in range(1, int(config.max_iter) + 1):
            try:
                res = step(prob, state)
            except DomainError as exc:
                raise SolverError(f"iterate left the admissible states: {exc}") from exc
            new = res.state
            diag.extension_events += int(np.sum(res.shock.containment < 0))
            dval = float(np.max(np.abs(new.x - state.x)) + np.max(np.abs(new.beta_plus - state.beta_plus)))
            bpp_new = assemble_invariant_fields(prob, new).beta_plus_pp
            dn = discrete_norms(new.x_uu - state.x_uu, new.x_uv - state.x_uv, new.x_vv - state.x_vv,
                                bpp_new - res.inv.beta_plus_pp)
            dnorm = max(dn)
            diag.value_deltas.append(dval)
            diag.norm_deltas.append(list(dn))
            diag.x_norm_history.append(discrete_norms(new.x_uu, new.x_uv, new.x_vv, bpp_new)[0])
            diag.beta_norm_history.append(float(np.max(np.abs(bpp_new))))
            if prev_val is not None:
                r = _ratio(dval, prev_val, RATIO_FLOOR)
                if r is not None:
                    diag.ratios_value.append(r)
                # second-derivative deltas below tol_norm are spline-roundoff noise
                r = _ratio(dnorm, prev_norm, config.tol_norm)
                if r is not None:
                    diag.ratios_norm.append(r)
            prev_val, prev_norm = dval, dnorm
            state = new
            diag.iterations = m
            if not np.isfinite(dval) or not np.isfinite(dnorm):
                raise NonContraction("iterate became non-finite")
            if dval < config.tol_value and dnorm < config.tol_norm:
                diag.converged = True
                break
        else:
            raise NonContraction(f"no convergence in {config.max_iter} iterations (last delta {dval:.3e})")
        try:
            sol = _assemble(prob, state, diag)
        except DomainError as exc:
            raise SolverError(f"converged iterate is not admissible: {exc}") from exc
    except SolverError as exc:
        if exc.iteration is None:
            exc.iteration = m
        exc.diagnostics = diag
        diag.wall_clock = time.perf_counter() - t0
        raise
    diag.wall_clock = time.perf_counter() - t0
    return sol, diag


def _assemble(prob: Problem, state: IterateState, diag: Diagnostics) -> Solution:
    inv, tf, shock, co = evaluate(prob, state)
    m1, m2 = shock.determinism
    # at v = 0 the margins are the reflection-point ones
    margin = float(min(np.min(m1), np.min(m2)))
    diag.determinism_min_margin = margin
    diag.containment_min_margin = float(np.min(shock.containment))
    if margin <= 0:
        raise DeterminismFailure(f"determinism condition fails along the shock (min margin {margin:.3e})")
    if diag.containment_min_margin < -SLACK:
        raise ContainmentError("converged shock left the development")
    c_in, c_out = char_speeds(prob.eos, InvariantPair(inv.alpha, inv.beta))
    if np.any((c_out - c_in) * tf.t_u * tf.t_v <= 0):
        raise SolverError("Jacobian of (u, v) -> (t, x) vanishes")
    rho, w = from_invariants(prob.eos, InvariantPair(inv.alpha, inv.beta))
    return Solution(prob, state, inv, tf, shock, co, rho, w)
