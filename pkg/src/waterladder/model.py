"""Problem data model, feasibility test and the sign-flip transform."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidProblem
from .terms import ObjectiveTerm, negate

INF = math.inf


class Sense(str, enum.Enum):
    LE = "le"  # sum_{n<=j} x_n <= rho_j
    GE = "ge"  # sum_{n<=j} x_n >= rho_j


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Problem:
    """Separable objective with nested prefix-sum constraints and a box.

    Parameters
    ----------
    terms : sequence of ObjectiveTerm
        One strictly convex term per variable.
    lower, upper : sequence of float
        Box bounds; ``-inf`` / ``+inf`` are allowed.
    rho : mapping int -> float
        Right-hand sides keyed by 1-based constraint index j.  Indices absent
        from the mapping carry no constraint.
    sense : Sense
        Direction of the prefix-sum inequalities.
    """

    terms: tuple
    lower: np.ndarray
    upper: np.ndarray
    rho: Mapping[int, float]
    sense: Sense = Sense.LE

    def __post_init__(self):
        terms = tuple(self.terms)
        n = len(terms)
        if n == 0:
            raise InvalidProblem("a problem needs at least one term")
        for t in terms:
            if not isinstance(t, ObjectiveTerm):
                raise InvalidProblem(f"not an objective term: {t!r}")
        lower = _frozen(self.lower)
        upper = _frozen(self.upper)
        if lower.shape != (n,) or upper.shape != (n,):
            raise InvalidProblem(f"bounds must have length {n}")
        if np.isnan(lower).any() or np.isnan(upper).any():
            raise InvalidProblem("bounds must not be NaN")
        bad = np.flatnonzero(~(lower < upper))
        if bad.size:
            k = int(bad[0])
            raise InvalidProblem(
                f"empty box at n={k + 1}: l={lower[k]} is not below u={upper[k]}")
        rho = {}
        for j, r in dict(self.rho).items():
            j = int(j)
            r = float(r)
            if not 1 <= j <= n:
                raise InvalidProblem(f"constraint index {j} outside 1..{n}")
            if not math.isfinite(r):
                raise InvalidProblem(f"rho_{j} must be finite, got {r}")
            rho[j] = r
        for k, t in enumerate(terms):
            t.validate_box(lower[k], upper[k])
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "rho", dict(sorted(rho.items())))
        object.__setattr__(self, "sense", Sense(self.sense))

    @property
    def n(self) -> int:
        return len(self.terms)

    @property
    def constraint_indices(self) -> list[int]:
        return list(self.rho)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(float(t.value(xi)) for t, xi in zip(self.terms, x)))

    def prefix_sums(self, x) -> np.ndarray:
        return np.cumsum(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Feasibility:
    feasible: bool
    witness: Optional[int] = None  # smallest violating constraint index

    def __bool__(self):
        return self.feasible


def check_feasibility(p: Problem) -> Feasibility:
    """A point in the box satisfying every prefix constraint exists iff the
    extreme corner of the box does (lower corner for LE, upper corner for GE)."""
    if p.sense is Sense.GE:
        return check_feasibility(flip_sense(p)[0])
    with np.errstate(invalid="ignore"):
        prefix = np.cumsum(p.lower)
    for j, r in p.rho.items():
        if not prefix[j - 1] <= r:
            return Feasibility(False, j)
    return Feasibility(True)


@dataclass(frozen=True)
class VariableMap:
    """Maps a solution of a transformed problem back to the original one."""

    negate: bool = True

    def to_original(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return -y if self.negate else y.copy()


def flip_sense(p: Problem) -> tuple[Problem, VariableMap]:
    """Substitute y = -x: terms become f(-y), box [-u, -l], rhs -rho and the
    inequality direction reverses.  Applying it twice returns the original
    data exactly."""
    terms = tuple(negate(t) for t in p.terms)
    other = Sense.LE if p.sense is Sense.GE else Sense.GE
    q = Problem(terms, -p.upper, -p.lower, {j: -r for j, r in p.rho.items()}, other)
    return q, VariableMap(True)


@dataclass(frozen=True)
class TraceBlock:
    """One outer iteration: common multiplier ``mu`` on the block ending at ``k``.

    ``varsigma`` holds the per-constraint roots computed in that iteration,
    keyed by 1-based index (indices skipped by the skip rule are absent).
    """

    mu: float
    k: int
    varsigma: Mapping[int, float] = field(default_factory=dict, compare=False)


@dataclass(frozen=True, eq=False)
class Solution:
    x: np.ndarray
    sigma: np.ndarray
    nu: np.ndarray
    kappa: np.ndarray
    trace: tuple = ()
    iterations: int = 0

    def __post_init__(self):
        for name in ("x", "sigma", "nu", "kappa"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "trace", tuple(self.trace))

    @property
    def trace_pairs(self) -> list[tuple[float, int]]:
        return [(b.mu, b.k) for b in self.trace]

    def first_varsigma(self) -> dict[int, float]:
        return dict(self.trace[0].varsigma) if self.trace else {}


def solution_to_original(sol: Solution, vmap: VariableMap) -> Solution:
    """Map a solution of the flipped problem back: x = -y, sigma unchanged,
    box multipliers swap roles because the box is mirrored."""
    if not vmap.negate:
        return sol
    return Solution(-sol.x, sol.sigma, sol.kappa, sol.nu, sol.trace, sol.iterations)


def make_problem(terms: Sequence[ObjectiveTerm], lower, upper, rho,
                 sense: Sense | str = Sense.LE) -> Problem:
    """Convenience constructor; ``rho`` may be a mapping or a full-length list."""
    if not isinstance(rho, Mapping):
        rho = {j + 1: r for j, r in enumerate(rho)}
    return Problem(tuple(terms), lower, upper, rho, Sense(sense))
