"""Reflection-point data for a gamma = 2 polytrope.

Solves the jump conditions at the wall for the state behind the reflected
shock, then shows how the coordinate ratio ``a`` responds to the incoming
flow speed.

Run with ``python demos/reflection_point.py``.
"""

import numpy as np

from shockreflect import BarotropicEos, FluidState, solve_reflection_point

eos = BarotropicEos("polytropic", K=0.5, gamma=2.0)

refl = solve_reflection_point(eos, FluidState(rho=1.0, w=-0.5))
print("state ahead: rho = 1, w = -0.5")
print(f"  rho0 = {refl.rho0:.10f}")
print(f"  V0   = {refl.V0:.10f}")
print(f"  eta0 = {refl.eta0:.10f}")
print(f"  a    = {refl.a:.10f}")
m1, m2 = refl.margins()
print(f"  determinism margins: V0 - c_out_minus = {m1:.4f}, eta0 - V0 = {m2:.4f}")

# stronger inflow gives a denser state behind and a slower reflected shock
# relative to the sound speed, which pushes a up
print("\n   w_minus      rho0        V0         a")
for w in -np.array([0.1, 0.25, 0.5, 1.0, 2.0]):
    r = solve_reflection_point(eos, FluidState(1.0, w))
    print(f"  {w:8.3f}  {r.rho0:9.5f}  {r.V0:9.5f}  {r.a:9.5f}")
