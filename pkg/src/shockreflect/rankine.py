"""Jump conditions, the implicit Hugoniot map H and the reflection-point solve.

Sign convention: ``[f] = f_plus - f_minus`` with "plus" the state behind the
shock and "minus" the state ahead.  With ``V = [rho w]/[rho]`` the momentum
jump condition becomes ``I = [rho w]**2 - [rho w**2 + p][rho] = 0``.  Written
in Riemann invariants this is ``J(alpha_p, beta_p, alpha_m, beta_m) = 0``;
near the reflection point it defines ``beta_p = H(alpha_p, alpha_m, beta_m)``.
"""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .eos import BarotropicEos, FluidState, InvariantPair, char_speeds, from_invariants, to_invariants
from .errors import DegenerateJumpError, HugoniotBranchLost, PreconditionError

log = logging.getLogger(__name__)

TOL_NEWTON = 1e-12
MAX_NEWTON = 50


@dataclass(frozen=True)
class ReflectionPointData:
    rho0: float
    V0: float
    eta0: float
    a: float
    beta0: float
    alpha_m0: float
    beta_m0: float
    cout_m0: float
    beta0_prime: float | None = None

    def with_beta0_prime(self, value: float) -> "ReflectionPointData":
        return dataclasses.replace(self, beta0_prime=float(value))

    def margins(self) -> tuple[float, float]:
        """Determinism margins ``(V0 - c_out_minus, eta0 - V0)`` at the origin."""
        return self.V0 - self.cout_m0, self.eta0 - self.V0


class HugoniotSlopes(NamedTuple):
    F: np.ndarray | float
    M1: np.ndarray | float
    M2: np.ndarray | float


def hugoniot_residual(eos: BarotropicEos, plus: FluidState, minus: FluidState):
    rp, wp = np.asarray(plus.rho, float), np.asarray(plus.w, float)
    rm, wm = np.asarray(minus.rho, float), np.asarray(minus.w, float)
    j_rho = rp - rm
    j_mom = rp * wp - rm * wm
    j_flux = (rp * wp * wp + eos.pressure(rp)) - (rm * wm * wm + eos.pressure(rm))
    return j_mom * j_mom - j_flux * j_rho


def _dI_dfirst(eos, ra, rb, wa, wb):
    # derivative of I(ra, rb, wa, wb) in its first density and first velocity
    # slot; swap symmetry of I gives the minus-side partials from the same code
    j_rho = ra - rb
    j_mom = ra * wa - rb * wb
    j_flux = (ra * wa * wa + eos.pressure(ra)) - (rb * wb * wb + eos.pressure(rb))
    eta2 = eos.sound_speed(ra) ** 2
    dI_dr = 2.0 * j_mom * wa - (wa * wa + eta2) * j_rho - j_flux
    dI_dw = 2.0 * j_mom * ra - 2.0 * ra * wa * j_rho
    return dI_dr, dI_dw


def shock_speed(eos: BarotropicEos, plus: FluidState, minus: FluidState):
    rp, wp = np.asarray(plus.rho, float), np.asarray(plus.w, float)
    rm, wm = np.asarray(minus.rho, float), np.asarray(minus.w, float)
    j_rho = rp - rm
    if np.any(j_rho == 0):
        raise DegenerateJumpError("degenerate jump: [rho] = 0")
    return (rp * wp - rm * wm) / j_rho


def residual_J(eos: BarotropicEos, alpha_p, beta_p, alpha_m, beta_m):
    plus = from_invariants(eos, InvariantPair(alpha_p, beta_p))
    minus = from_invariants(eos, InvariantPair(alpha_m, beta_m))
    return hugoniot_residual(eos, plus, minus)


def _chain(eos, rho, dI_dr, dI_dw):
    # d(rho, w)/d(alpha, beta) = [[rho/2eta, rho/2eta], [1/2, -1/2]]
    r = rho / (2.0 * eos.sound_speed(rho))
    return dI_dr * r + 0.5 * dI_dw, dI_dr * r - 0.5 * dI_dw


def dJ_dplus(eos: BarotropicEos, alpha_p, beta_p, alpha_m, beta_m):
    """``(dJ/dalpha_p, dJ/dbeta_p)`` by the chain rule; valid off the Hugoniot locus too."""
    rp, wp = from_invariants(eos, InvariantPair(alpha_p, beta_p))
    rm, wm = from_invariants(eos, InvariantPair(alpha_m, beta_m))
    return _chain(eos, rp, *_dI_dfirst(eos, rp, rm, wp, wm))


def dJ_dminus(eos: BarotropicEos, alpha_p, beta_p, alpha_m, beta_m):
    """``(dJ/dalpha_m, dJ/dbeta_m)`` through the swap symmetry of I."""
    rp, wp = from_invariants(eos, InvariantPair(alpha_p, beta_p))
    rm, wm = from_invariants(eos, InvariantPair(alpha_m, beta_m))
    return _chain(eos, rm, *_dI_dfirst(eos, rm, rp, wm, wp))


def dJ_dplus_on_shock(eos: BarotropicEos, alpha_p, beta_p, alpha_m, beta_m):
    """Closed forms of ``(dJ/dalpha_p, dJ/dbeta_p)`` that hold where J = 0.

    ``dJ/dalpha_p = -[rho] rho_p/(2 eta_p) (c_out_p - V)**2`` and
    ``dJ/dbeta_p = -[rho] rho_p/(2 eta_p) (V - c_in_p)**2``.
    """
    plus = from_invariants(eos, InvariantPair(alpha_p, beta_p))
    minus = from_invariants(eos, InvariantPair(alpha_m, beta_m))
    V = shock_speed(eos, plus, minus)
    eta = eos.sound_speed(plus.rho)
    cin, cout = plus.w - eta, plus.w + eta
    pref = -(plus.rho - minus.rho) * plus.rho / (2.0 * eta)
    return pref * (cout - V) ** 2, pref * (V - cin) ** 2


def solve_H(eos: BarotropicEos, alpha_p, alpha_m, beta_m, guess, tol=TOL_NEWTON, maxiter=MAX_NEWTON):
    """Solve ``J(alpha_p, beta_p, alpha_m, beta_m) = 0`` for ``beta_p`` by Newton.

    The branch is selected by the starting value: pass ``beta0`` at the
    reflection point and the previous trace value elsewhere.  Success means
    ``|J| < tol * max(1, |dJ/dbeta_p|)``; accepted entries are then polished
    until the Newton correction is at roundoff level (a few extra steps at
    most), so the output is smooth from node to node.  Entries already at
    roundoff at ``guess`` are returned bit-for-bit unchanged.
    """
    ap, am, bm = np.broadcast_arrays(*(np.asarray(q, float) for q in (alpha_p, alpha_m, beta_m)))
    beta = np.array(np.broadcast_to(np.asarray(guess, float), ap.shape), dtype=float)
    polish = 0
    for _ in range(maxiter + 1):
        J = residual_J(eos, ap, beta, am, bm)
        _, Jb = dJ_dplus(eos, ap, beta, am, bm)
        step = J / np.where(Jb == 0, np.inf, Jb)
        ok = np.abs(J) < tol * np.maximum(1.0, np.abs(Jb))
        settled = ok & (np.abs(step) <= 4.0 * np.spacing(np.abs(beta)))
        if settled.all():
            break
        if ok.all():
            polish += 1
            if polish > 3:
                break
        step = np.where(settled, 0.0, step)
        trial = beta - step
        # keep (alpha + beta)/2 inside the admissible range of the potential
        for _ in range(30):
            try:
                from_invariants(eos, InvariantPair(ap, trial))
                break
            except ValueError:
                step = 0.5 * step
                trial = beta - step
        beta = trial
    else:
        bad = np.flatnonzero(np.atleast_1d(~ok))
        raise HugoniotBranchLost(f"Hugoniot branch lost at nodes {bad.tolist()}")
    return beta if beta.ndim else float(beta)


def hugoniot_slopes(eos: BarotropicEos, alpha_p, alpha_m, beta_m, guess) -> HugoniotSlopes:
    """Partials ``F = dH/dalpha_p``, ``M1 = dH/dbeta_m``, ``M2 = dH/dalpha_m``."""
    beta_p = solve_H(eos, alpha_p, alpha_m, beta_m, guess)
    plus = from_invariants(eos, InvariantPair(alpha_p, beta_p))
    minus = from_invariants(eos, InvariantPair(alpha_m, beta_m))
    V = shock_speed(eos, plus, minus)
    cin, cout = char_speeds(eos, InvariantPair(alpha_p, beta_p))
    F = -(((cout - V) / (V - cin)) ** 2)
    _, Jb = dJ_dplus(eos, alpha_p, beta_p, alpha_m, beta_m)
    Jam, Jbm = dJ_dminus(eos, alpha_p, beta_p, alpha_m, beta_m)
    return HugoniotSlopes(F, -Jbm / Jb, -Jam / Jb)


def determinism_check(eos: BarotropicEos, plus_pair: InvariantPair, minus_pair: InvariantPair, V):
    """Margins ``(V - c_out_minus, c_out_plus - V)``; both must be positive."""
    _, cout_p = char_speeds(eos, plus_pair)
    _, cout_m = char_speeds(eos, minus_pair)
    return V - cout_m, cout_p - V


def _rho0_root(eos, rho_m, w_m, n_scan=400):
    def I(r):
        return hugoniot_residual(eos, FluidState(r, 0.0 * r), FluidState(rho_m, w_m))

    grid = rho_m * 1e3 ** (np.arange(1, n_scan + 1) / n_scan)
    grid = np.concatenate(([rho_m * (1 + 1e-9)], grid))
    vals = I(grid)
    flips = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    if flips.size == 0:
        raise PreconditionError("no deterministic reflection: no root of the Hugoniot residual")
    if flips.size > 1:
        log.warning("several Hugoniot roots for rho0; taking the smallest")
    lo, hi = grid[flips[0]], grid[flips[0] + 1]
    f_lo = I(lo)
    while hi - lo > 1e-13 * hi:
        mid = 0.5 * (lo + hi)
        f_mid = I(mid)
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    for _ in range(3):
        dr, _ = _dI_dfirst(eos, r, rho_m, 0.0, w_m)
        if dr == 0:
            break
        r_new = r - I(r) / dr
        if not lo - 1e-12 * hi <= r_new <= hi + 1e-12 * hi:
            break
        r = r_new
    return float(r)


def solve_reflection_point(eos: BarotropicEos, minus0: FluidState) -> ReflectionPointData:
    """Density and shock speed behind the reflected shock at the reflection point.

    The state behind is at rest (``w_plus = 0``).  Raises `PreconditionError`
    when the data is compatible with the wall, when no root exists, or when
    the root violates ``c_out_minus < V0 < eta0`` or ``V0 > 0``.
    """
    rho_m, w_m = float(minus0.rho), float(minus0.w)
    if w_m == 0:
        raise PreconditionError("data compatible with wall: w_minus = 0 at the reflection point")
    rho0 = _rho0_root(eos, rho_m, w_m)
    V0 = float(shock_speed(eos, FluidState(rho0, 0.0), minus0))
    eta0 = float(eos.sound_speed(rho0))
    cout_m0 = w_m + float(eos.sound_speed(rho_m))
    if not (cout_m0 < V0 < eta0 and V0 > 0):
        raise PreconditionError(
            f"determinism failure at reflection point: c_out_minus={cout_m0:.6g}, V0={V0:.6g}, eta0={eta0:.6g}"
        )
    a = (eta0 - V0) / (eta0 + V0)
    alpha_m0, beta_m0 = (float(q) for q in to_invariants(eos, minus0))
    beta0 = float(eos.potential(rho0))
    return ReflectionPointData(rho0, V0, eta0, a, beta0, alpha_m0, beta_m0, cout_m0)


def beta0_prime(eos: BarotropicEos, refl: ReflectionPointData, ahead_grads) -> float:
    """dbeta_plus/dv at v = 0.

    ``ahead_grads = (dalpha*/dt, dalpha*/dx, dbeta*/dt, dbeta*/dx)`` at the origin.
    """
    da_dt, da_dx, db_dt, db_dx = (float(g) for g in ahead_grads)
    a, eta0 = refl.a, refl.eta0
    dam = da_dt * (1 + a) / eta0 + da_dx * (1 - a)
    dbm = db_dt * (1 + a) / eta0 + db_dx * (1 - a)
    sl = hugoniot_slopes(eos, refl.beta0, refl.alpha_m0, refl.beta_m0, refl.beta0)
    return float((sl.M1 * dbm + sl.M2 * dam) / (1 + a**3))
