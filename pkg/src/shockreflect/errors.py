"""Exception hierarchy.

The CLI maps these onto exit codes: `PreconditionError` -> 2,
`SolverError` -> 1, `IntegrityError` -> 3, `ConfigError` -> 64.
"""


class DomainError(ValueError):
    """Argument outside the domain of a thermodynamic or geometric map."""


class VacuumError(DomainError):
    pass


class DegenerateJumpError(DomainError):
    """[rho] = 0, so the shock speed is undefined."""


class PreconditionError(ValueError):
    """The reflection-point data does not set up a deterministic reflection."""


class SolverError(RuntimeError):
    """Failure inside the fixed-point iteration.

    Carries the iteration index (``None`` outside the loop) and whatever
    diagnostics had been collected so far.
    """

    def __init__(self, message, iteration=None, diagnostics=None):
        super().__init__(message)
        self.iteration = iteration
        self.diagnostics = diagnostics


class HugoniotBranchLost(SolverError):
    pass


class ContainmentError(SolverError):
    pass


class ShockVanished(SolverError):
    pass


class DeterminismFailure(SolverError):
    pass


class NonContraction(SolverError):
    pass


class HorizonError(SolverError):
    pass


class InversionError(SolverError):
    pass


class ConfigError(ValueError):
    pass


class IntegrityError(RuntimeError):
    pass
