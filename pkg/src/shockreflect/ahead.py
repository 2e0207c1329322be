"""Exact solutions used as the state ahead of the reflected shock.

Two families are available, both exact solutions of the barotropic Euler
equations so that alpha*, beta* and their partials are known to machine
precision:

``constant``
    uniform state ``(rho, w)``.
``simple_wave``
    ``beta*`` constant and ``alpha*`` transported along straight outgoing
    characteristics from the profile
    ``alpha0(x0) = alpha_m0 + delta * (1 - exp(-x0 / L))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .eos import BarotropicEos, FluidState, InvariantPair, char_speeds, speed_partials, speed_second_partial, to_invariants
from .errors import ContainmentError, DomainError, HorizonError, InversionError
from .rankine import ReflectionPointData, solve_reflection_point

SLACK = 1e-9
RK4_STEPS = 2048


class AheadGrads(NamedTuple):
    a_t: np.ndarray
    a_x: np.ndarray
    b_t: np.ndarray
    b_x: np.ndarray
    a_tt: np.ndarray
    a_tx: np.ndarray
    a_xx: np.ndarray
    b_tt: np.ndarray
    b_tx: np.ndarray
    b_xx: np.ndarray


@dataclass(frozen=True)
class AheadField:
    eos: BarotropicEos
    kind: str
    rho: float
    w: float
    T: float
    delta: float = 0.0
    L: float = 1.0

    def __post_init__(self):
        if self.kind not in ("constant", "simple_wave"):
            raise DomainError(f"unknown ahead kind {self.kind!r}")
        if not self.T > 0:
            raise DomainError("ahead horizon T must be positive")
        if self.kind == "simple_wave":
            if not self.L > 0:
                raise DomainError("simple-wave length scale L must be positive")
            # characteristics stay ordered while 1 + c_alpha * alpha0'(x0) * t > 0;
            # alpha0' ranges over (0, delta/L] for x0 >= 0
            dcout_da = speed_partials(self.eos, InvariantPair(self.alpha_m0, self.beta_m0))[2]
            worst = min(0.0, dcout_da * self.delta / self.L)
            if 1.0 + worst * self.T <= 0:
                raise DomainError("simple-wave characteristics cross before the horizon T")

    @classmethod
    def constant(cls, eos, rho, w, T):
        return cls(eos, "constant", float(rho), float(w), float(T))

    @classmethod
    def simple_wave(cls, eos, rho, w, delta, L, T):
        return cls(eos, "simple_wave", float(rho), float(w), float(T), float(delta), float(L))

    @cached_property
    def alpha_m0(self) -> float:
        return float(to_invariants(self.eos, FluidState(self.rho, self.w)).alpha)

    @cached_property
    def beta_m0(self) -> float:
        return float(to_invariants(self.eos, FluidState(self.rho, self.w)).beta)

    def reflection_point(self) -> ReflectionPointData:
        """Reflection-point solve, with beta0' filled in from this field's gradients."""
        from .rankine import beta0_prime

        refl = solve_reflection_point(self.eos, FluidState(self.rho, self.w))
        g = eval_ahead_grads(self, 0.0, 0.0)
        return refl.with_beta0_prime(beta0_prime(self.eos, refl, (g.a_t, g.a_x, g.b_t, g.b_x)))

    # profile alpha0(x0) and its first two derivatives
    def _profile(self, x0):
        e = np.exp(-x0 / self.L)
        d1 = self.delta / self.L * e
        return self.alpha_m0 + self.delta * (1.0 - e), d1, -d1 / self.L


def _check_horizon(field, t):
    if np.any(np.asarray(t) > field.T * (1 + 1e-12)):
        raise HorizonError(f"evaluation beyond the horizon T = {field.T:g}")


def _foot(field, t, x, strict=True):
    """Foot point x0 of the outgoing characteristic through (t, x)."""
    t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    am0, bm0 = field.alpha_m0, field.beta_m0
    cout = lambda al: char_speeds(field.eos, InvariantPair(al, bm0))[1]
    dcda = lambda al: speed_partials(field.eos, InvariantPair(al, bm0))[2]
    x0 = x - cout(am0 + 0.0 * x) * t
    for _ in range(60):
        al, d1, _ = field._profile(x0)
        g = x0 + cout(al) * t - x
        D = 1.0 + dcda(al) * d1 * t
        step = g / D
        x0 = x0 - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(x0))):
            break
    al, d1, _ = field._profile(x0)
    if not np.all(np.abs(x0 + cout(al) * t - x) <= 1e-12 * (1.0 + np.abs(x))):
        raise InversionError("characteristic inversion failed")
    if strict and np.any(x0 < -SLACK):
        raise ContainmentError("point lies left of the boundary characteristic of the development")
    return x0


def eval_ahead(field: AheadField, t, x, strict=True):
    """``(alpha*, beta*)`` at ``(t, x)``."""
    _check_horizon(field, t)
    t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    bm = np.full(t.shape, field.beta_m0)
    if field.kind == "constant":
        return np.full(t.shape, field.alpha_m0), bm
    x0 = _foot(field, t, x, strict)
    return field._profile(x0)[0], bm


def eval_ahead_grads(field: AheadField, t, x, strict=True) -> AheadGrads:
    """First and second partials of alpha*, beta* in (t, x)."""
    _check_horizon(field, t)
    t, x = np.broadcast_arrays(np.asarray(t, float), np.asarray(x, float))
    z = np.zeros(t.shape)
    if field.kind == "constant":
        return AheadGrads(*(z.copy() for _ in range(10)))
    x0 = _foot(field, t, x, strict)
    al, d1, d2 = field._profile(x0)
    pair = InvariantPair(al, np.full(t.shape, field.beta_m0))
    C = char_speeds(field.eos, pair)[1]
    ca = speed_partials(field.eos, pair)[2]
    caa = speed_second_partial(field.eos, pair)
    C1 = ca * d1
    C2 = caa * d1 * d1 + ca * d2
    D = 1.0 + C1 * t
    # implicit differentiation of x0 + C(x0) t = x
    x0_x = 1.0 / D
    x0_t = -C / D
    x0_xx = -C2 * t * x0_x**2 / D
    x0_tx = -(C1 + C2 * t * x0_t) * x0_x / D
    x0_tt = -(2.0 * C1 * x0_t + C2 * t * x0_t**2) / D
    return AheadGrads(
        d1 * x0_t,
        d1 * x0_x,
        z.copy(),
        z.copy(),
        d2 * x0_t**2 + d1 * x0_tt,
        d2 * x0_t * x0_x + d1 * x0_tx,
        d2 * x0_x**2 + d1 * x0_xx,
        z.copy(),
        z.copy(),
        z.copy(),
    )


@dataclass(frozen=True)
class BoundaryChar:
    """Outgoing characteristic x0*(t) of the state ahead through the origin."""

    t: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.t, self.x))

    def __call__(self, t):
        return self._spline(t)


def _rk4(field, T, n):
    h = T / n
    ts = h * np.arange(n + 1)
    xs = np.zeros(n + 1)

    def f(t, x):
        al, be = eval_ahead(field, t, x, strict=False)
        return float(char_speeds(field.eos, InvariantPair(al, be))[1])

    x = 0.0
    for k in range(n):
        t = ts[k]
        k1 = f(t, x)
        k2 = f(t + h / 2, x + h / 2 * k1)
        k3 = f(t + h / 2, x + h / 2 * k2)
        k4 = f(min(t + h, T), x + h * k3)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs[k + 1] = x
    return ts, xs


def boundary_characteristic(field: AheadField, refl: ReflectionPointData | None = None, n=RK4_STEPS) -> BoundaryChar:
    """Integrate dx/dt = c_out(alpha*, beta*) from the origin with classical RK4.

    When ``refl`` is given the field's origin state must match it.
    """
    if refl is not None and not (
        np.isclose(field.alpha_m0, refl.alpha_m0, rtol=1e-12, atol=1e-12)
        and np.isclose(field.beta_m0, refl.beta_m0, rtol=1e-12, atol=1e-12)
    ):
        raise DomainError("state ahead at the origin does not match the reflection data")
    return _boundary_cached(field, int(n))


@lru_cache(maxsize=32)
def _boundary_cached(field, n):
    ts, xs = _rk4(field, field.T, n)
    return BoundaryChar(ts, xs)


def containment_check(bchar: BoundaryChar, t_trace, x_trace) -> float:
    """``min_v (x_plus(v) - x0*(t_plus(v)))``; negative means the shock left the development."""
    return float(np.min(np.asarray(x_trace) - bchar(np.asarray(t_trace))))
