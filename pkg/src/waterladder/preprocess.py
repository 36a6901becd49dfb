"""Reduction of a problem to one whose terms are all strictly decreasing.

Increasing terms are pinned at their lower bound, terms with an interior
minimum get their upper bound tightened to the minimizer, and a constraint
that holds with equality at the lower corner pins the whole prefix it covers.
``restore`` maps a solution of the reduced problem back, including the
multipliers of the constraints that were dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidObjective, UnboundedPin
from .model import Problem, Sense, Solution, TraceBlock
from .terms import INFINITE_PROBE, ObjectiveTerm

INCREASING = "IncreasingA"
INTERIOR_MIN = "InteriorMinB"
DECREASING = "DecreasingC"

ZERO_SLOPE_RTOL = 1e-12
MAX_BISECT = 200


@dataclass(frozen=True)
class TermClass:
    case: str
    z: Optional[float] = None


def _probe_step(l: float, u: float) -> float:
    span = u - l
    return 1e-8 * max(1.0, span if math.isfinite(span) else 1.0)


def _slope_at_end(t: ObjectiveTerm, x: float, side: int, delta: float) -> tuple[float, float]:
    """Return (probe point, f' there) just inside the end ``x`` of the box."""
    if math.isinf(x):
        return math.copysign(INFINITE_PROBE, x), -t.h_limit(x, side)
    p = x + side * delta
    return p, t.slope(p)


def _stationary_point(t: ObjectiveTerm, a: float, b: float, scale: float) -> float:
    """Bisection on f' over [a, b] with f'(a) < 0 < f'(b)."""
    while t.slope(a) >= 0:
        a = a - max(1.0, abs(a))
        if a < -1e300:
            raise InvalidObjective("could not bracket the stationary point from below")
    while t.slope(b) <= 0:
        b = b + max(1.0, abs(b))
        if b > 1e300:
            raise InvalidObjective("could not bracket the stationary point from above")
    tol = ZERO_SLOPE_RTOL * (1.0 + scale)
    m = 0.5 * (a + b)
    for _ in range(MAX_BISECT):
        m = 0.5 * (a + b)
        s = t.slope(m)
        if abs(s) <= tol or not a < m < b:
            break
        if s < 0:
            a = m
        else:
            b = m
    return m


def classify_term(t: ObjectiveTerm, l: float, u: float) -> TermClass:
    """Decide whether f is increasing, has an interior minimum, or is
    decreasing on [l, u]."""
    mono = t.monotone
    if mono == "decreasing":
        return TermClass(DECREASING)
    if mono == "increasing":
        return TermClass(INCREASING)
    delta = _probe_step(l, u)
    a, s_lo = _slope_at_end(t, l, +1, delta)
    b, s_hi = _slope_at_end(t, u, -1, delta)
    if s_lo >= 0 and s_hi > 0:
        return TermClass(INCREASING)
    if s_lo < 0 and s_hi <= 0:
        return TermClass(DECREASING)
    if s_lo < 0 < s_hi:
        return TermClass(INTERIOR_MIN, _stationary_point(t, a, b, abs(s_lo)))
    raise InvalidObjective(
        f"derivative signs f'(l+)={s_lo}, f'(u-)={s_hi} are inconsistent with a convex term")


def _equal_at_lower(rho: float, lsum: float) -> bool:
    return math.isfinite(lsum) and abs(rho - lsum) <= 1e-9 * max(1.0, abs(rho))


@dataclass(frozen=True, eq=False)
class ReducedProblem:
    """A reduced problem plus the bookkeeping needed to undo the reduction.

    All index maps use 1-based original indices.  ``inner`` is None when
    every variable was pinned.
    """

    source: Problem
    inner: Optional[Problem]
    pinned: dict = field(default_factory=dict)
    tightened_upper: dict = field(default_factory=dict)
    rho_shift: dict = field(default_factory=dict)
    index_map: tuple = ()
    constraint_map: dict = field(default_factory=dict)  # inner r -> original j
    j_max: int = 0


def reduce(p: Problem) -> ReducedProblem:
    """Reduce an LE-sense, feasible problem (flip GE problems first)."""
    if p.sense is not Sense.LE:
        raise ValueError("reduce expects an LE-sense problem; flip it first")
    n = p.n
    upper = p.upper.copy()
    pinned: dict[int, float] = {}
    tightened: dict[int, float] = {}
    for k, t in enumerate(p.terms):
        c = classify_term(t, p.lower[k], p.upper[k])
        if c.case == INCREASING:
            if math.isinf(p.lower[k]):
                raise UnboundedPin(f"variable {k + 1} is increasing with no finite lower bound")
            pinned[k + 1] = float(p.lower[k])
        elif c.case == INTERIOR_MIN:
            tightened[k + 1] = c.z
            upper[k] = c.z

    with np.errstate(invalid="ignore"):
        lsum = np.cumsum(p.lower)
    j_max = 0
    for j, r in p.rho.items():
        if _equal_at_lower(r, lsum[j - 1]):
            j_max = max(j_max, j)
    for k in range(j_max):
        pinned[k + 1] = float(p.lower[k])
        tightened.pop(k + 1, None)

    survivors = [k for k in range(1, n + 1) if k not in pinned]
    pin_prefix = np.cumsum([pinned.get(k, 0.0) for k in range(1, n + 1)])
    count = np.cumsum([0 if k in pinned else 1 for k in range(1, n + 1)])

    inner_rho: dict[int, float] = {}
    cmap: dict[int, int] = {}
    shift: dict[int, float] = {}
    for j, r in p.rho.items():
        if j <= j_max:
            continue
        rr = int(count[j - 1])
        if rr == 0:
            continue
        shift[j] = float(pin_prefix[j - 1])
        val = r - shift[j]
        if rr not in inner_rho or val <= inner_rho[rr]:
            inner_rho[rr] = val
            cmap[rr] = j

    inner = None
    if survivors:
        idx = np.array(survivors) - 1
        inner = Problem(tuple(p.terms[i] for i in idx), p.lower[idx], upper[idx],
                        inner_rho, Sense.LE)
    return ReducedProblem(p, inner, pinned,
                          {k: v for k, v in tightened.items() if k not in pinned},
                          shift, tuple(survivors), cmap, j_max)


def restore(rp: ReducedProblem, inner_sol: Optional[Solution]) -> Solution:
    """Lift a reduced-problem solution to the source problem.

    Box multipliers are left at zero; callers reconstruct them from x and
    sigma.
    """
    p = rp.source
    n = p.n
    x = np.empty(n)
    for k, v in rp.pinned.items():
        x[k - 1] = v
    lam = np.zeros(n + 2)  # lam[j] for original constraint j
    trace: list[TraceBlock] = []
    iterations = 0
    m = len(rp.index_map)
    if inner_sol is not None and m:
        x[np.array(rp.index_map) - 1] = inner_sol.x
        s_inner = np.append(inner_sol.sigma, 0.0)
        for r in range(1, m + 1):
            d = s_inner[r - 1] - s_inner[r]
            if d != 0.0 and r in rp.constraint_map:
                lam[rp.constraint_map[r]] += d
        for b in inner_sol.trace:
            k = rp.constraint_map.get(b.k, n if b.k == m else None)
            if k is None:
                k = rp.index_map[b.k - 1]
            vs = {rp.constraint_map[r]: v for r, v in b.varsigma.items()
                  if r in rp.constraint_map}
            trace.append(TraceBlock(b.mu, k, vs))
        iterations = inner_sol.iterations

    if rp.j_max:
        after = float(lam[rp.j_max + 1:].sum())
        need = max(p.terms[k].h_limit(p.lower[k], +1) for k in range(rp.j_max))
        lam[rp.j_max] = max(0.0, need - after)
        if lam[rp.j_max] > 0:
            trace.insert(0, TraceBlock(float(lam[rp.j_max] + after), rp.j_max))

    sigma = np.cumsum(lam[1:n + 1][::-1])[::-1].copy()
    if inner_sol is not None and m:
        # identical in exact arithmetic; keeps survivors' values bit-exact
        sigma[np.array(rp.index_map) - 1] = inner_sol.sigma
    if p.rho:
        if not trace:
            trace.append(TraceBlock(0.0, n))
        elif trace[-1].k != n:
            last = trace[-1]
            if last.mu == 0.0:
                trace[-1] = TraceBlock(0.0, n, last.varsigma)
            else:
                trace.append(TraceBlock(0.0, n))
    else:
        trace = []
    zeros = np.zeros(n)
    return Solution(x, sigma, zeros, zeros, trace, iterations)
