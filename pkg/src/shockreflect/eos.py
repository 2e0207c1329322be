"""Barotropic equation of state and Riemann-invariant conversions.

Two closed-form families are supported:

* polytropic  ``p = K rho**gamma`` with ``gamma > 1``
* isothermal  ``p = K rho`` (selected by ``gamma == 1``), sound speed ``sqrt(K)``

The Riemann potential ``P(rho) = int eta/rho drho`` is fixed to
``2 eta / (gamma - 1)`` (polytropic) and ``c log(rho)`` (isothermal).  Riemann
invariants are ``alpha = P + w`` and ``beta = P - w``.  Every function here
accepts scalars or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, VacuumError


class FluidState(NamedTuple):
    rho: np.ndarray | float
    w: np.ndarray | float


class InvariantPair(NamedTuple):
    alpha: np.ndarray | float
    beta: np.ndarray | float


@dataclass(frozen=True)
class BarotropicEos:
    kind: str = "polytropic"
    K: float = 0.5
    gamma: float = 2.0

    def __post_init__(self):
        if self.kind not in ("polytropic", "isothermal"):
            raise DomainError(f"unknown eos kind {self.kind!r}")
        if not self.K > 0:
            raise DomainError("eos.K must be positive")
        if self.kind == "polytropic" and not self.gamma > 1:
            raise DomainError("polytropic eos needs gamma > 1")
        if self.kind == "isothermal" and self.gamma != 1:
            raise DomainError("isothermal eos needs gamma == 1")

    @classmethod
    def from_gamma(cls, K: float, gamma: float) -> "BarotropicEos":
        return cls("isothermal" if gamma == 1 else "polytropic", K, gamma)

    def pressure(self, rho):
        rho = _positive(rho)
        if self.kind == "isothermal":
            return self.K * rho
        return self.K * rho**self.gamma

    def sound_speed(self, rho):
        rho = _positive(rho)
        if self.kind == "isothermal":
            return np.sqrt(self.K) * np.ones_like(rho)
        return np.sqrt(self.K * self.gamma * rho ** (self.gamma - 1.0))

    def potential(self, rho):
        rho = _positive(rho)
        if self.kind == "isothermal":
            return np.sqrt(self.K) * np.log(rho)
        return 2.0 * self.sound_speed(rho) / (self.gamma - 1.0)

    def density_from_potential(self, s):
        """Inverse of `potential`; ``s`` is the half-sum (alpha + beta)/2."""
        s = np.asarray(s, dtype=float)
        if self.kind == "isothermal":
            return np.exp(s / np.sqrt(self.K))
        if np.any(s <= 0):
            raise VacuumError("vacuum state: (alpha + beta)/2 must be positive")
        eta = 0.5 * (self.gamma - 1.0) * s
        return (eta * eta / (self.K * self.gamma)) ** (1.0 / (self.gamma - 1.0))

    # sound speed expressed through s = (alpha + beta)/2, with its s-derivatives
    def eta_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "isothermal":
            return np.sqrt(self.K) * np.ones_like(s)
        if np.any(s <= 0):
            raise VacuumError("vacuum state: (alpha + beta)/2 must be positive")
        return 0.5 * (self.gamma - 1.0) * s

    def deta_ds(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "isothermal":
            return np.zeros_like(s)
        return 0.5 * (self.gamma - 1.0) * np.ones_like(s)

    def d2eta_ds2(self, s):
        return np.zeros_like(np.asarray(s, dtype=float))


def _positive(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise DomainError("density must be positive")
    return rho


def riemann_potential(eos: BarotropicEos, rho):
    return eos.potential(rho)


def to_invariants(eos: BarotropicEos, state: FluidState) -> InvariantPair:
    P = eos.potential(state.rho)
    return InvariantPair(P + state.w, P - state.w)


def from_invariants(eos: BarotropicEos, pair: InvariantPair) -> FluidState:
    alpha = np.asarray(pair.alpha, dtype=float)
    beta = np.asarray(pair.beta, dtype=float)
    rho = eos.density_from_potential(0.5 * (alpha + beta))
    return FluidState(rho, 0.5 * (alpha - beta))


def char_speeds(eos: BarotropicEos, pair: InvariantPair):
    """Return ``(c_in, c_out) = (w - eta, w + eta)``."""
    alpha = np.asarray(pair.alpha, dtype=float)
    beta = np.asarray(pair.beta, dtype=float)
    eta = eos.eta_of_s(0.5 * (alpha + beta))
    w = 0.5 * (alpha - beta)
    return w - eta, w + eta


def speed_partials(eos: BarotropicEos, pair: InvariantPair):
    """First partials of the characteristic speeds in (alpha, beta).

    Returns ``(dcin_da, dcin_db, dcout_da, dcout_db)``.
    """
    alpha = np.asarray(pair.alpha, dtype=float)
    beta = np.asarray(pair.beta, dtype=float)
    d = 0.5 * eos.deta_ds(0.5 * (alpha + beta))
    return 0.5 - d, -0.5 - d, 0.5 + d, -0.5 + d


def speed_second_partial(eos: BarotropicEos, pair: InvariantPair):
    """Common value of every second partial of c_out; c_in carries the opposite sign."""
    s = 0.5 * (np.asarray(pair.alpha, dtype=float) + np.asarray(pair.beta, dtype=float))
    return 0.25 * eos.d2eta_ds2(s)


def state_jacobian(eos: BarotropicEos, pair: InvariantPair) -> np.ndarray:
    """d(rho, w)/d(alpha, beta) as a 2x2 array (trailing axes for array input)."""
    rho, _ = from_invariants(eos, pair)
    eta = eos.sound_speed(rho)
    r = rho / (2.0 * eta)
    half = 0.5 * np.ones_like(r)
    return np.array([[r, r], [half, -half]])


def invariant_jacobian(eos: BarotropicEos, state: FluidState) -> np.ndarray:
    """d(alpha, beta)/d(rho, w); the inverse of `state_jacobian`."""
    rho = np.asarray(state.rho, dtype=float)
    q = eos.sound_speed(rho) / rho
    one = np.ones_like(q)
    return np.array([[q, one], [q, -one]])
