"""Post-hoc checks of a converged solution.

Nothing here reuses the solver's interpolation or quadrature paths: fields
are re-interpolated with separate splines, the map ``(u, v) -> (t, x)`` is
inverted by a per-point Newton iteration, and the Euler equations are checked
in conservation form by central differences in ``(t, x)``.

Residual scales: the mass equation is multiplied by ``eps / (rho0 eta0)`` and
the momentum equation by ``eps / (rho0 eta0**2)`` (the natural scales of
``d/dt`` over the time extent ``eps / eta0``).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .ahead import eval_ahead
from .eos import InvariantPair, char_speeds, from_invariants
from .errors import PreconditionError, SolverError
from .rankine import residual_J, shock_speed
from .solver import IterateState, Solution, SolverConfig, solve


@dataclass(frozen=True)
class Thresholds:
    euler_residual_max: float = 1e-3
    euler_order_min: float = 1.5
    J_residual_max: float = 1e-9
    speed_residual_max: float = 1e-7
    jacobian_origin_rel: float = 0.05
    asymptotic_ratio_min: float = 0.25
    asymptotic_ratio_max: float = 4.0
    uniqueness_factor: float = 10.0


@dataclass
class VerificationReport:
    euler_residual_sup: float = math.nan
    euler_residual_sup_half: float = math.nan
    euler_order: float = math.nan
    euler_step: float = math.nan
    rh_speed_residual_sup: float = math.nan
    J_residual_sup: float = math.nan
    V0_residual: float = math.nan
    wall_residual_sup: float = math.nan
    determinism_min_margin: float = math.nan
    containment_min_margin: float = math.nan
    jacobian_min: float = math.nan
    jacobian_origin_rel_dev: float = math.nan
    jacobian_max_rel_dev: float = math.nan
    asymptotic_R: dict = field(default_factory=dict)
    asymptotic_ratios: dict = field(default_factory=dict)
    uniqueness_delta: float = math.nan
    flags: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.flags) and all(self.flags.values())

    def to_flat(self) -> dict:
        """Flat key -> number map (flags as 0/1)."""
        out = {}
        for k, val in dataclasses.asdict(self).items():
            if k == "notes":
                continue
            if isinstance(val, dict):
                for kk, vv in val.items():
                    out[f"{k}.{kk}"] = float(vv)
            else:
                out[k] = float(val)
        out["passed"] = float(self.passed)
        return out


# ---------------------------------------------------------------------------
# (t, x) -> (u, v) inversion


class _Sampler:
    """Independent interpolants of a solution on the parameter square."""

    def __init__(self, sol: Solution, beta_plus=None):
        spec = sol.spec
        self.eps, self.a = spec.epsilon, spec.a
        s, tau = spec.sigma, spec.tau
        spl = lambda f: RectBivariateSpline(s, tau, f, kx=3, ky=3, s=0)
        self.t = spl(sol.time.t)
        self.x = spl(sol.state.x)
        self.t_u = spl(sol.time.t_u)
        self.t_v = spl(sol.time.t_v)
        self.x_u = spl(sol.state.x_u)
        self.x_v = spl(sol.state.x_v)
        bp = sol.state.beta_plus if beta_plus is None else beta_plus
        self.beta_plus = CubicSpline(spec.shock_v, bp)
        self.eos = sol.eos

    def square(self, u, v):
        sigma = u / (self.a * self.eps)
        tau = self.a * (v - u) / (u * (1.0 - self.a))
        return sigma, tau

    def inside(self, u, v, margin=0.0):
        sigma, tau = self.square(u, v)
        return (u > 0) & (sigma >= margin) & (sigma <= 1 - margin) & (tau >= margin) & (tau <= 1 - margin)

    def invert(self, T, X, eta0, iters=40):
        u = 0.5 * (eta0 * T - X)
        v = 0.5 * (eta0 * T + X)
        for _ in range(iters):
            sg, ta = self.square(u, v)
            sg, ta = np.clip(sg, 0, 1), np.clip(ta, 0, 1)
            ft = self.t.ev(sg, ta) - T
            fx = self.x.ev(sg, ta) - X
            a11, a12 = self.t_u.ev(sg, ta), self.t_v.ev(sg, ta)
            a21, a22 = self.x_u.ev(sg, ta), self.x_v.ev(sg, ta)
            det = a11 * a22 - a12 * a21
            du = (a22 * ft - a12 * fx) / det
            dv = (-a21 * ft + a11 * fx) / det
            u, v = u - du, v - dv
            if np.max(np.abs(du) + np.abs(dv)) < 1e-15 * self.eps:
                break
        return u, v

    def state(self, T, X, eta0):
        u, v = self.invert(T, X, eta0)
        if not np.all(self.inside(u, v)):
            raise ValueError("sample point outside the image of the triangle")
        return from_invariants(self.eos, InvariantPair(self.beta_plus(u), self.beta_plus(v)))


def _euler_sup(smp: _Sampler, tc, xc, r, n, h, eta0, scales):
    g = np.linspace(-r, r, n)
    T, X = np.meshgrid(tc + g, xc + X_RATIO * eta0 * g, indexing="ij")
    hx = X_RATIO * eta0 * h

    def q(dt, dx):
        rho, w = smp.state(T + dt, X + dx, eta0)
        return rho, rho * w, rho * w * w + smp.eos.pressure(rho)

    r_tp, m_tp, _ = q(h, 0.0)
    r_tm, m_tm, _ = q(-h, 0.0)
    _, m_xp, f_xp = q(0.0, hx)
    _, m_xm, f_xm = q(0.0, -hx)
    mass = (r_tp - r_tm) / (2 * h) + (m_xp - m_xm) / (2 * hx)
    mom = (m_tp - m_tm) / (2 * h) + (f_xp - f_xm) / (2 * hx)
    return max(float(np.max(np.abs(mass))) * scales[0], float(np.max(np.abs(mom))) * scales[1])


# x-step over (eta0 * t-step).  At ratio 1 the leading truncation terms of the
# two central differences cancel for waves moving at +-eta0, which hides the
# order of the check near the reflection point.
X_RATIO = 0.5


def euler_residual(sol: Solution, n_patch=20, center=(0.6, 0.4), beta_plus=None):
    """Scaled sup-norm residual of the Euler equations on an interior patch.

    Returns ``(residual at step h, residual at h/2, order, h)``.  The patch is
    a ``n_patch x n_patch`` square of half-width ``0.02 tc`` around the image
    ``(tc, xc)`` of ``center`` in ``(sigma, tau)``.  The time step starts at
    ``0.2 tc`` and shrinks by 0.8 until every stencil point maps back inside
    the triangle: the largest admissible step puts the truncation error
    furthest above the roundoff floor, so the order is observable.
    """
    refl, eps = sol.refl, sol.spec.epsilon
    eta0, rho0 = refl.eta0, refl.rho0
    smp = _Sampler(sol, beta_plus)
    tc = float(smp.t.ev(*center))
    xc = float(smp.x.ev(*center))
    r = 0.02 * tc
    h = 0.2 * tc
    scales = (eps / (rho0 * eta0), eps / (rho0 * eta0**2))
    for _ in range(12):
        try:
            e0 = _euler_sup(smp, tc, xc, r, n_patch, h, eta0, scales)
            e1 = _euler_sup(smp, tc, xc, r, n_patch, 0.5 * h, eta0, scales)
        except ValueError:
            h *= 0.8
            continue
        order = math.log2(e0 / e1) if e1 > 0 and e0 > 0 else math.nan
        return e0, e1, order, h
    return math.nan, math.nan, math.nan, math.nan


def rh_residual(sol: Solution):
    """Sup-norms of the shock-speed relation and of ``J`` along the shock.

    Returns ``(speed residual at interior nodes, J residual, |V(0) - V0|)``.
    """
    spec, eos = sol.spec, sol.eos
    v = spec.shock_v
    t_p = sol.time.t[:, -1]
    x_p = sol.state.x[:, -1]
    S = CubicSpline(v, sol.state.beta_plus)
    al_p, be_p = S(spec.a * v), sol.state.beta_plus
    al_m, be_m = eval_ahead(sol.problem.ahead, t_p, x_p)
    V = shock_speed(eos, from_invariants(eos, InvariantPair(al_p, be_p)), from_invariants(eos, InvariantPair(al_m, be_m)))
    dt = CubicSpline(v, t_p).derivative()(v)
    dx = CubicSpline(v, x_p).derivative()(v)
    speed = float(np.max(np.abs(dx - V * dt)[1:-1]))
    J = float(np.max(np.abs(residual_J(eos, al_p, be_p, al_m, be_m))))
    return speed, J, float(abs(V[0] - sol.refl.V0))


def wall_residual(sol: Solution) -> float:
    return float(max(np.max(np.abs(sol.state.x[:, 0])), np.max(np.abs(sol.inv.alpha[:, 0] - sol.inv.beta[:, 0]))))


def jacobian_check(sol: Solution):
    """``(min, origin relative deviation, max relative deviation)`` of ``2 eta t_u t_v`` against ``2/eta0``."""
    c_in, c_out = char_speeds(sol.eos, InvariantPair(sol.inv.alpha, sol.inv.beta))
    jac = (c_out - c_in) * sol.time.t_u * sol.time.t_v
    ref = 2.0 / sol.refl.eta0
    dev = np.abs(jac / ref - 1.0)
    return float(np.min(jac)), float(dev[0, 0]), float(np.max(dev))


_EXACT = 1e-10


def _asym_R(sol: Solution):
    spec, refl = sol.spec, sol.refl
    u, v = spec.u, spec.v
    b0, b1 = refl.beta0, refl.beta0_prime
    lead = {
        "alpha": (sol.inv.alpha, b0 + b1 * u),
        "beta": (sol.inv.beta, b0 + b1 * v),
        "t": (sol.time.t, (u + v) / refl.eta0),
        "x": (sol.state.x, v - u),
    }
    keep = v >= spec.epsilon / 16
    R, num = {}, {}
    for k, (f, g) in lead.items():
        d = np.abs(f - g)[keep]
        num[k] = float(np.max(d))
        R[k] = float(np.max(d / v[keep] ** 2))
    return R, num


def asymptotic_check(sol: Solution, sol_half: Solution):
    """``R = sup |field - leading terms| / v**2`` over ``v >= eps/16`` at two extents.

    Returns ``(R at eps, R at eps/2, ratios R(eps/2)/R(eps))``; a field whose
    remainders are at roundoff level at both extents gets ratio 1 ("exact").
    """
    R1, n1 = _asym_R(sol)
    R2, n2 = _asym_R(sol_half)
    ratios = {}
    for k in R1:
        if n1[k] <= _EXACT and n2[k] <= _EXACT:
            ratios[k] = 1.0
        else:
            ratios[k] = R2[k] / R1[k] if R1[k] > 0 else math.inf
    return R1, R2, ratios


def perturbed_init(sol_or_refl, spec, strength=0.01) -> IterateState:
    """Admissible starting iterate away from the standard one.

    ``x0 = v - u + c v**2 (v - u)`` and ``beta_plus0 = beta0 + beta0' v + c v**2``
    with ``c = strength / eps**2``; wall, origin and endpoint pins are intact.
    """
    refl = getattr(sol_or_refl, "refl", sol_or_refl)
    u, v = spec.u, spec.v
    c = strength / spec.epsilon**2
    sv = spec.shock_v
    return IterateState(
        x=v - u + c * v**2 * (v - u),
        x_u=-1.0 - c * v**2,
        x_v=1.0 + c * (3 * v**2 - 2 * u * v),
        x_uu=np.zeros_like(u),
        x_uv=-2 * c * v,
        x_vv=c * (6 * v - 2 * u),
        beta_plus=refl.beta0 + refl.beta0_prime * sv + c * sv**2,
    )


def uniqueness_probe(config: SolverConfig, eos, ahead, refl=None, base: Solution | None = None, init=None):
    """Distance between the standard run and a run from a perturbed start.

    Returns ``(delta, message)``; ``delta`` is NaN when either run fails, and
    the message then names both possible causes.
    """
    try:
        if base is None:
            base, _ = solve(config, eos, ahead, refl)
        refl = base.refl
        if init is None:
            init = perturbed_init(refl, base.spec)
        other, _ = solve(config, eos, ahead, refl, init=init)
    except PreconditionError:
        raise
    except SolverError as exc:
        return math.nan, (f"run failed ({type(exc).__name__}: {exc}); either the solution is not unique "
                          "on this extent or epsilon is too large for the iteration to contract")
    d = float(np.max(np.abs(base.state.x - other.state.x)) + np.max(np.abs(base.state.beta_plus - other.state.beta_plus)))
    return d, "ok"


def verify(sol: Solution, diag=None, thresholds: Thresholds | None = None, sol_half: Solution | None = None,
           uniqueness: float | None = None, tol_value: float = 1e-11) -> VerificationReport:
    """Run every single-solution check, plus the two-extent checks when given."""
    th = thresholds or Thresholds()
    rep = VerificationReport()
    e0, e1, order, r = euler_residual(sol)
    rep.euler_residual_sup, rep.euler_residual_sup_half, rep.euler_order, rep.euler_step = e0, e1, order, r
    rep.rh_speed_residual_sup, rep.J_residual_sup, rep.V0_residual = rh_residual(sol)
    rep.wall_residual_sup = wall_residual(sol)
    m1, m2 = sol.shock.determinism
    rep.determinism_min_margin = float(min(np.min(m1), np.min(m2)))
    rep.containment_min_margin = float(np.min(sol.shock.containment))
    rep.jacobian_min, rep.jacobian_origin_rel_dev, rep.jacobian_max_rel_dev = jacobian_check(sol)

    f = rep.flags
    f["euler_residual"] = bool(e0 <= th.euler_residual_max)
    # a residual already at roundoff level cannot show an order; accept it
    f["euler_order"] = bool(order >= th.euler_order_min or e0 <= 1e-9)
    f["rh_speed"] = bool(rep.rh_speed_residual_sup <= th.speed_residual_max)
    f["J_residual"] = bool(rep.J_residual_sup <= th.J_residual_max)
    f["wall"] = rep.wall_residual_sup == 0.0
    f["determinism"] = rep.determinism_min_margin > 0
    f["containment"] = rep.containment_min_margin >= 0
    f["jacobian_positive"] = rep.jacobian_min > 0
    f["jacobian_origin"] = rep.jacobian_origin_rel_dev <= th.jacobian_origin_rel
    if sol_half is not None:
        R1, R2, ratios = asymptotic_check(sol, sol_half)
        rep.asymptotic_R = {**{f"{k}@eps": val for k, val in R1.items()}, **{f"{k}@eps/2": val for k, val in R2.items()}}
        rep.asymptotic_ratios = ratios
        f["asymptotic"] = all(th.asymptotic_ratio_min <= q <= th.asymptotic_ratio_max for q in ratios.values())
    if uniqueness is not None:
        rep.uniqueness_delta = float(uniqueness)
        f["uniqueness"] = bool(uniqueness <= th.uniqueness_factor * tol_value)
    return rep
