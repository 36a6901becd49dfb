"""Separable convex minimization under nested prefix-sum and box constraints."""

from .errors import (BracketFailure, DomainError, GridTooLarge, InfeasibleProblem,
                     InternalInvariant, InvalidObjective, InvalidProblem, NoFeasibleGridPoint,
                     NonPositiveGain, NonPositivePower, UnboundedPin, UnboundedProblem,
                     WaterladderError)
from .kernel import Bracket, TermBank, XiMap, bracket, prefix_c, solve_prefix, xi
from .model import (Feasibility, Problem, Sense, Solution, TraceBlock, VariableMap,
                    check_feasibility, flip_sense, make_problem, solution_to_original)
from .preprocess import ReducedProblem, TermClass, classify_term, reduce, restore
from .solver import SolverOptions, solve, sweep
from .terms import (Custom, InverseLinear, LogInvSnr, Negated, NegLogCapacity, ObjectiveTerm,
                    ScaledExp, negate)
from .verify import KktReport, kkt_check, reconstruct_box_multipliers

__version__ = "0.1.0"
