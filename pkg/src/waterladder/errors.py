"""Exception hierarchy."""


class WaterladderError(Exception):
    """Base class for all solver errors."""


class InvalidProblem(WaterladderError, ValueError):
    """Structurally invalid problem data (bounds, indices, parameters)."""


class InfeasibleProblem(WaterladderError, ValueError):
    """The constraint set is empty.

    ``constraint`` is the smallest (1-based) constraint index whose
    right-hand side lies below the prefix sum of the lower bounds.
    """

    def __init__(self, constraint, message=None):
        self.constraint = constraint
        super().__init__(message or f"infeasible: constraint j={constraint} "
                                    "is below the prefix sum of lower bounds")


class UnboundedPin(WaterladderError, ValueError):
    """An increasing term must be pinned at its lower bound, which is -inf."""


class UnboundedProblem(WaterladderError, ValueError):
    """A decreasing term is not covered by any constraint and has u = +inf."""


class InvalidObjective(WaterladderError, ValueError):
    """A term is not strictly convex on its box (derivative signs disagree)."""


class DomainError(WaterladderError, ValueError):
    """A term cannot be evaluated on the requested box."""


class BracketFailure(WaterladderError, ArithmeticError):
    """Root bracketing expanded past the float range without a sign change."""


class InternalInvariant(WaterladderError, RuntimeError):
    """An internal consistency check failed; indicates a bug."""


class GridTooLarge(WaterladderError, ValueError):
    """Brute-force grid would exceed the enumeration budget."""


class NoFeasibleGridPoint(WaterladderError, ValueError):
    """No grid point satisfies the constraints; refine the grid."""


class NonPositiveGain(InvalidProblem):
    pass


class NonPositivePower(InvalidProblem):
    pass
