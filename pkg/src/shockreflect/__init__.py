"""Shock reflection in one-dimensional barotropic flow.

The flow behind a shock reflected from a rigid wall is computed in
characteristic coordinates by a fixed-point iteration on a triangle next to the
reflection point.  Modules:

``eos``      equation of state and Riemann invariants
``rankine``  jump conditions, Hugoniot relation, reflection-point data
``ahead``    exact states ahead of the shock
``grid``     discretised triangle, quadrature, interpolation
``solver``   the iteration
``verify``   independent checks of a converged solution
``cli``      command-line front end
"""

from .ahead import AheadField, boundary_characteristic, eval_ahead, eval_ahead_grads
from .eos import BarotropicEos, FluidState, InvariantPair, char_speeds, from_invariants, to_invariants
from .grid import DomainSpec
from .rankine import ReflectionPointData, solve_H, solve_reflection_point
from .solver import Diagnostics, IterateState, Solution, SolverConfig, solve
from .verify import VerificationReport, verify

__version__ = "0.1.0"

__all__ = [
    "AheadField",
    "BarotropicEos",
    "Diagnostics",
    "DomainSpec",
    "FluidState",
    "InvariantPair",
    "IterateState",
    "ReflectionPointData",
    "Solution",
    "SolverConfig",
    "VerificationReport",
    "boundary_characteristic",
    "char_speeds",
    "eval_ahead",
    "eval_ahead_grads",
    "from_invariants",
    "solve",
    "solve_H",
    "solve_reflection_point",
    "to_invariants",
    "verify",
]
