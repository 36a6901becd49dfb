"""Outer layer: the multiplier sweep and the full solve pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .errors import InfeasibleProblem, InternalInvariant, UnboundedProblem
from .kernel import EPS_ROOT, TermBank
from .model import (Problem, Sense, Solution, TraceBlock, check_feasibility, flip_sense,
                    solution_to_original)
from .preprocess import ReducedProblem, reduce, restore
from .verify import reconstruct_box_multipliers


@dataclass(frozen=True)
class SolverOptions:
    """skip_rule: only solve a prefix equation when it can beat the current
    best multiplier.  final_shortcut: settle the last variable directly from
    its constraint instead of running one more iteration."""

    skip_rule: bool = True
    final_shortcut: bool = False
    eps_root: float = EPS_ROOT
    eps_tie: float = 1e-9


def _unbounded_tail(q: Problem, start: int) -> None:
    if np.isinf(q.upper[start:]).any():
        k = start + int(np.flatnonzero(np.isinf(q.upper[start:]))[0]) + 1
        raise UnboundedProblem(
            f"variable {k} is unconstrained from above with u=+inf; the infimum is not attained")


def sweep(rp: Union[ReducedProblem, Problem], opts: Optional[SolverOptions] = None) -> Solution:
    """Run the multiplier sweep on an LE problem whose terms are all
    decreasing (the ``inner`` problem of a reduction).

    Indices in the returned trace refer to that problem.
    """
    opts = opts or SolverOptions()
    q = rp.inner if isinstance(rp, ReducedProblem) else rp
    n = q.n
    bank = TermBank.from_problem(q)
    rho = q.rho
    cons = list(rho)
    x = np.empty(n)
    sigma = np.empty(n)
    blocks: list[TraceBlock] = []
    iterations = 0
    j = 0
    prev_rho = 0.0

    while j < n:
        cands = [c for c in cons if c > j]
        if not cands:
            _unbounded_tail(q, j)
            x[j:] = q.upper[j:]
            sigma[j:] = 0.0
            if blocks:
                if blocks[-1].mu == 0.0:
                    blocks[-1] = TraceBlock(0.0, n, blocks[-1].varsigma)
                else:
                    blocks.append(TraceBlock(0.0, n))
            break

        if opts.final_shortcut and j == n - 1 and cands == [n]:
            g = rho[n] - float(x[:j].sum())
            t = q.terms[n - 1]
            if g >= q.upper[n - 1]:
                x[j], s = q.upper[n - 1], 0.0
            else:
                x[j] = max(g, q.lower[n - 1])
                s = max(0.0, t.h_limit(x[j], +1))
            sigma[j] = s
            blocks.append(TraceBlock(s, n, {n: s}))
            break

        iterations += 1
        gamma = {c: rho[c] - prev_rho for c in cands}
        varsigma: dict[int, float] = {}
        if opts.skip_rule:
            best = 0.0
            cum = None
            for c in cands:
                if cum is not None and cum[c - j - 1] < gamma[c]:
                    continue
                s = _root(bank, j, c, gamma[c], opts)
                varsigma[c] = s
                if s > best:
                    best = s
                    t = best - opts.eps_tie * (1.0 + best)
                    cum = bank.cumulative(t, j, n) if t > 0 else None
        else:
            for c in cands:
                varsigma[c] = _root(bank, j, c, gamma[c], opts)

        mu = max(varsigma.values())
        floor = mu - opts.eps_tie * (1.0 + mu)
        k = max(c for c, s in varsigma.items() if s >= floor)
        if k <= j:
            raise InternalInvariant(f"block end {k} does not advance past {j}")
        if mu == 0.0:
            x[j:k] = q.upper[j:k]
        else:
            x[j:k] = bank.xi(mu, j, k)
        sigma[j:k] = mu
        blocks.append(TraceBlock(mu, k, varsigma))
        prev_rho = rho[k]
        j = k

    if not cons:
        blocks = []
    zeros = np.zeros(n)
    return Solution(x, sigma, zeros, zeros, blocks, iterations)


def _root(bank: TermBank, j: int, c: int, gamma: float, opts: SolverOptions) -> float:
    try:
        return bank.solve(j, c, gamma, eps_root=opts.eps_root)
    except ValueError as exc:
        raise InternalInvariant(
            f"prefix equation for constraint {c} has no root above the lower corner") from exc


def solve(p: Problem, opts: Optional[SolverOptions] = None) -> Solution:
    """Solve a problem end to end in its own indexing and sign convention.

    Raises
    ------
    InfeasibleProblem
        When some prefix of lower bounds already exceeds its rhs.
    UnboundedPin, UnboundedProblem, InvalidObjective, BracketFailure
        For the degenerate inputs they name.
    """
    opts = opts or SolverOptions()
    if p.sense is Sense.GE:
        q, vmap = flip_sense(p)
        return solution_to_original(solve(q, opts), vmap)
    feas = check_feasibility(p)
    if not feas:
        raise InfeasibleProblem(feas.witness)
    rp = reduce(p)
    inner = sweep(rp, opts) if rp.inner is not None else None
    sol = restore(rp, inner)
    nu, kappa = reconstruct_box_multipliers(p, sol.x, sol.sigma)
    return Solution(sol.x, sol.sigma, nu, kappa, sol.trace, sol.iterations)


def objective_value(p: Problem, x) -> float:
    v = p.objective(x)
    return v if not math.isnan(v) else math.inf
