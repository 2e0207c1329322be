"""Discretisation of the characteristic triangle.

The triangle ``{0 <= u <= v <= u/a <= eps}`` is the image of the unit square
under ``(sigma, tau) -> (u, v) = (a eps sigma, eps sigma (a + tau (1 - a)))``.
``tau = 0`` is the wall ``u = v``, ``tau = 1`` the shock ``u = a v``, and
``sigma = 1`` the outgoing characteristic ``u = a eps``; the whole ``sigma = 0``
edge collapses onto the origin.

Fields are ``(n_sigma + 1, n_tau + 1)`` arrays on the tensor grid; traces are
1D arrays on the sigma grid.  A shock trace at index ``i`` belongs to
``v = eps sigma_i`` and a wall trace to ``u = a eps sigma_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline, RectBivariateSpline

from .errors import DomainError

# antiderivatives of the 4-node Lagrange basis on nodes 0, 1, 2, 3
_NODES = np.arange(4.0)
_LAGRANGE_INTEG = []
for _i in range(4):
    _others = np.delete(_NODES, _i)
    _p = Polynomial.fromroots(_others)
    _p = _p / _p(_NODES[_i])
    _LAGRANGE_INTEG.append(_p.integ())


@dataclass(frozen=True)
class DomainSpec:
    epsilon: float
    a: float
    n_sigma: int = 64
    n_tau: int = 64

    def __post_init__(self):
        if not self.epsilon > 0:
            raise DomainError("epsilon must be positive")
        if not 0 < self.a < 1:
            raise DomainError("coordinate ratio a must lie in (0, 1)")
        for n in (self.n_sigma, self.n_tau):
            if n < 8 or n % 2:
                raise DomainError("grid resolutions must be even integers >= 8")

    @cached_property
    def sigma(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_sigma + 1)

    @cached_property
    def tau(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_tau + 1)

    @cached_property
    def uv(self) -> tuple[np.ndarray, np.ndarray]:
        S, Tt = np.meshgrid(self.sigma, self.tau, indexing="ij")
        return map_to_uv(self, S, Tt)

    @property
    def u(self) -> np.ndarray:
        return self.uv[0]

    @property
    def v(self) -> np.ndarray:
        return self.uv[1]

    @property
    def shock_v(self) -> np.ndarray:
        """Shock-edge parameter ``v = eps sigma``."""
        return self.epsilon * self.sigma

    @property
    def wall_u(self) -> np.ndarray:
        return self.u[:, 0]


def map_to_uv(spec: DomainSpec, sigma, tau):
    sigma = np.asarray(sigma, float)
    tau = np.asarray(tau, float)
    if np.any((sigma < 0) | (sigma > 1) | (tau < 0) | (tau > 1)):
        raise DomainError("(sigma, tau) outside the unit square")
    es = spec.epsilon * sigma
    # same association order in u and v so the wall tau = 0 has u == v bitwise
    return es * spec.a, es * (spec.a + tau * (1.0 - spec.a))


def uv_to_sigma_tau(spec: DomainSpec, u, v, clamp_tol=1e-12):
    """Inverse of `map_to_uv` away from the origin (``u > 0``)."""
    u = np.asarray(u, float)
    v = np.asarray(v, float)
    a = spec.a
    sigma = u / (a * spec.epsilon)
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(u > 0, a * (v - u) / (u * (1.0 - a)), 0.0)
    bad = (sigma < -clamp_tol) | (sigma > 1 + clamp_tol) | (tau < -clamp_tol) | (tau > 1 + clamp_tol)
    if np.any(bad):
        raise DomainError("point outside the characteristic triangle")
    return np.clip(sigma, 0.0, 1.0), np.clip(tau, 0.0, 1.0)


# ---------------------------------------------------------------------------
# 1D cumulative quadrature

def _local_cubic_integral(y, k, theta):
    # integral over [x_k, x_k + theta h] (in units of h) of the cubic through
    # four neighbouring nodes; exact for cubic y
    n = y.shape[-1] - 1
    j0 = np.clip(k - 1, 0, n - 3)
    s0 = (k - j0).astype(float)
    s1 = s0 + theta
    out = 0.0
    for i, P in enumerate(_LAGRANGE_INTEG):
        out = out + (P(s1) - P(s0)) * np.take(y, j0 + i, axis=-1)
    return out


def cumulative_simpson(y, h: float) -> np.ndarray:
    """Running integral ``int_0^{x_k} y`` along the last axis.

    Composite Simpson at even nodes; odd nodes add one interval of the local
    cubic.  Exact for cubic integrands.
    """
    y = np.asarray(y, float)
    n = y.shape[-1] - 1
    if n < 3:
        raise DomainError("need at least four samples")
    cum = np.zeros_like(y)
    pairs = h / 3.0 * (y[..., 0:-2:2] + 4.0 * y[..., 1:-1:2] + y[..., 2::2])
    cum[..., 2::2] = np.cumsum(pairs, axis=-1)
    odd = np.arange(1, n + 1, 2)
    cum[..., odd] = cum[..., odd - 1] + h * _local_cubic_integral(y, odd - 1, np.ones(odd.shape))
    return cum


def cumulative_eval(y, h: float, x, cum=None) -> np.ndarray:
    """``int_0^x y`` for a 1D sample ``y`` at arbitrary ``x`` in ``[0, n h]``."""
    y = np.asarray(y, float)
    n = y.size - 1
    if cum is None:
        cum = cumulative_simpson(y, h)
    s = np.asarray(x, float) / h
    if np.any(s < -1e-9) or np.any(s > n * (1 + 1e-12) + 1e-9):
        raise DomainError("upper limit outside the sampled interval")
    s = np.clip(s, 0.0, float(n))
    k = np.minimum(np.floor(s).astype(int), n)
    theta = s - k
    return cum[k] + h * _local_cubic_integral(y, k, theta)


# ---------------------------------------------------------------------------
# integrals on the triangle

def _sample(spec: DomainSpec, f):
    return f(spec.u, spec.v) if callable(f) else np.asarray(f, float)


def integrate_outgoing(spec: DomainSpec, f, tau=None) -> np.ndarray:
    """``int_u^v f(u, v') dv'`` along each ``sigma = const`` line.

    Returns the full field at grid nodes, or, when ``tau`` is given (array of
    shape ``(n_sigma + 1,)`` or broadcastable), the value at that ``tau`` on
    every line.
    """
    F = _sample(spec, f)
    h = 1.0 / spec.n_tau
    scale = spec.epsilon * spec.sigma * (1.0 - spec.a)
    if tau is None:
        return scale[:, None] * cumulative_simpson(F, h)
    tau = np.broadcast_to(np.asarray(tau, float), spec.sigma.shape)
    out = np.array([cumulative_eval(F[i], h, tau[i]) for i in range(F.shape[0])])
    return scale * out


def integrate_wall(spec: DomainSpec, f_wall, u=None) -> np.ndarray:
    """``int_0^u f(u', u') du'`` from the wall trace (the ``tau = 0`` edge)."""
    fw = _sample(spec, f_wall)
    if fw.ndim == 2:
        fw = fw[:, 0]
    h = spec.a * spec.epsilon / spec.n_sigma
    if u is None:
        return cumulative_simpson(fw, h)
    return cumulative_eval(fw, h, u)


def cumulative_shock_integral(spec: DomainSpec, trace, v) -> np.ndarray:
    """``int_0^v Lambda(u') du'`` for a trace sampled on the shock parameter grid."""
    v = np.asarray(v, float)
    if np.any(v > spec.epsilon * (1 + 1e-12)):
        raise DomainError("upper limit beyond epsilon")
    return cumulative_eval(trace, spec.epsilon / spec.n_sigma, v)


class FieldInterpolator:
    """Tensor-product cubic spline of a field over (sigma, tau), queried in (u, v)."""

    def __init__(self, spec: DomainSpec, field):
        self.spec = spec
        self._spl = RectBivariateSpline(spec.sigma, spec.tau, np.asarray(field, float), kx=3, ky=3, s=0)

    def at_sigma_tau(self, sigma, tau):
        return self._spl.ev(sigma, tau)

    def __call__(self, u, v):
        return self._spl.ev(*uv_to_sigma_tau(self.spec, u, v))


def integrate_incoming(spec: DomainSpec, f, panels=None) -> np.ndarray:
    """``int_{av}^u f(u', v) du'`` at every node, along the incoming line ``v = const``.

    The integrand is interpolated off-grid with a tensor cubic spline; the
    line integral uses composite Simpson with ``2 n_sigma`` panels.
    """
    F = _sample(spec, f)
    interp = FieldInterpolator(spec, F)
    N = panels or 2 * spec.n_sigma
    a, eps = spec.a, spec.epsilon
    u = spec.u[1:]
    v = spec.v[1:]
    lo = a * v
    length = u - lo
    k = np.arange(N + 1) / N
    up = lo[..., None] + length[..., None] * k
    sig = up / (a * eps)
    tau = a * (v[..., None] - up) / (up * (1.0 - a))
    if np.any(tau < -1e-12) or np.any(tau > 1 + 1e-12) or np.any(sig > 1 + 1e-12):
        raise DomainError("incoming integration path left the triangle")
    vals = interp.at_sigma_tau(np.clip(sig, 0, 1), np.clip(tau, 0, 1))
    w = np.ones(N + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    out = np.zeros_like(F)
    out[1:] = length / (3.0 * N) * (vals @ w)
    return out


def trace_spline(spec: DomainSpec, trace, bc_type="not-a-knot") -> CubicSpline:
    """Cubic spline of a shock-edge trace as a function of ``v``."""
    return CubicSpline(spec.shock_v, np.asarray(trace, float), bc_type=bc_type)


def discrete_norms(x_uu, x_uv, x_vv, beta_pp) -> tuple[float, float]:
    """Grid analogues of the second-derivative norms of x and beta_plus."""
    nx = max(float(np.max(np.abs(x_uu))), float(np.max(np.abs(x_uv))), float(np.max(np.abs(x_vv))))
    return nx, float(np.max(np.abs(beta_pp)))
