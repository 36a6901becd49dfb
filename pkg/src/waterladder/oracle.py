"""Brute-force grid reference optimizer for small instances.

Deliberately independent of the solver: it never uses h, xi or the
multiplier sweep, only objective values and exact prefix-sum comparisons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import GridTooLarge, InfeasibleProblem, NoFeasibleGridPoint
from .model import Problem, Sense, check_feasibility

MAX_DIM = 6
MAX_POINTS = 10 ** 8
CHUNK = 2_000_000


@dataclass(frozen=True)
class GridSpec:
    """points_per_dim grid points per axis.

    With an anchor every axis is clipped to ``anchor +/- bound_fallback``.
    Without one, finite bounds are kept and an infinite bound is replaced
    at distance 2*bound_fallback from the other bound (+/- bound_fallback
    when both are infinite)."""

    points_per_dim: int = 101
    bound_fallback: float = 10.0
    anchor: Optional[Sequence[float]] = None

    def __post_init__(self):
        if self.points_per_dim < 3:
            raise ValueError("points_per_dim must be at least 3")
        if not self.bound_fallback > 0:
            raise ValueError("bound_fallback must be positive")


class GridResult(NamedTuple):
    x: np.ndarray
    value: float
    step: np.ndarray
    tolerance: float  # sum_n step_n * max|f_n'| at the axis ends


def grid_axes(p: Problem, g: GridSpec) -> list[np.ndarray]:
    R = g.bound_fallback
    axes = []
    for k in range(p.n):
        l, u = float(p.lower[k]), float(p.upper[k])
        if g.anchor is not None:
            c = float(g.anchor[k])
            lo, hi = max(l, c - R), min(u, c + R)
            if not lo < hi:
                raise ValueError(f"anchor {c} for variable {k + 1} lies outside its box")
        else:
            lo = l if math.isfinite(l) else (u - 2 * R if math.isfinite(u) else -R)
            hi = u if math.isfinite(u) else (lo + 2 * R if math.isfinite(l) else R)
        axes.append(np.linspace(lo, hi, g.points_per_dim))
    return axes


def _slope_bound(t, axis: np.ndarray) -> float:
    best = 0.0
    for end, inward in ((0, 1), (-1, -2)):
        for idx in (end, inward):
            try:
                s = abs(t.slope(float(axis[idx])))
            except (ArithmeticError, ValueError):
                s = math.inf
            if math.isfinite(s):
                best = max(best, s)
                break
    return best


def lipschitz_tolerance(p: Problem, axes: Sequence[np.ndarray]) -> tuple[np.ndarray, float]:
    step = np.array([ax[1] - ax[0] for ax in axes])
    tol = sum(float(st) * _slope_bound(t, ax) for t, ax, st in zip(p.terms, axes, step))
    return step, tol


def _values(t, axis: np.ndarray) -> np.ndarray:
    with np.errstate(all="ignore"):
        v = np.asarray(t.value(axis), dtype=float)
    return np.where(np.isnan(v), np.inf, v)


def _ok(prefix, rho, sense):
    return prefix <= rho if sense is Sense.LE else prefix >= rho


def grid_solve(p: Problem, g: GridSpec) -> GridResult:
    """Exhaustively search the grid for the feasible point of least
    objective; ties go to the lexicographically first grid point."""
    feas = check_feasibility(p)
    if not feas:
        raise InfeasibleProblem(feas.witness)
    n, m = p.n, g.points_per_dim
    if n > MAX_DIM or float(m) ** n > MAX_POINTS:
        raise GridTooLarge(f"{m}^{n} grid points exceed the enumeration budget")
    axes = grid_axes(p, g)
    vals = [_values(t, ax) for t, ax in zip(p.terms, axes)]
    step, tol = lipschitz_tolerance(p, axes)

    # last coordinate: best feasible index as a function of the running sum
    last_ax, last_val = axes[-1], vals[-1]
    if p.sense is Sense.LE:
        run = np.minimum.accumulate(last_val)
        arg = _first_argmin_prefix(last_val)
    else:
        run = np.minimum.accumulate(last_val[::-1])[::-1]
        arg = _first_argmin_suffix(last_val)

    best_val, best_idx = math.inf, None
    rows = m ** (n - 2) if n >= 2 else 1
    per_chunk = max(1, CHUNK // max(rows, 1))
    first_range = range(0, m, per_chunk) if n >= 2 else [0]
    for start in first_range:
        stop = min(m, start + per_chunk) if n >= 2 else 1
        S, F, ok = _partial_grid(p, axes, vals, start, stop)
        k = _last_index(S, p, last_ax)
        valid = ok & (k >= 0) & (k < m)
        kc = np.clip(k, 0, m - 1)
        total = np.where(valid, F + run[kc], np.inf)
        if not np.isfinite(total).any() and not valid.any():
            continue
        r = int(np.argmin(total))
        if total[r] < best_val:
            best_val = float(total[r])
            best_idx = (start, r, int(arg[kc[r]]))
    if best_idx is None or not math.isfinite(best_val):
        raise NoFeasibleGridPoint("no grid point satisfies the constraints; refine the grid")
    start, r, k_last = best_idx
    head = np.unravel_index(r, (min(m, start + per_chunk) - start,) + (m,) * (n - 2)) if n >= 2 else ()
    idx = ([head[0] + start] + [int(h) for h in head[1:]]) if n >= 2 else []
    x = np.array([axes[d][i] for d, i in enumerate(idx)] + [last_ax[k_last]])
    return GridResult(x, float(p.objective(x)), step, tol)


def _first_argmin_prefix(v: np.ndarray) -> np.ndarray:
    out = np.empty(len(v), dtype=int)
    best = 0
    for i in range(len(v)):
        if v[i] < v[best]:
            best = i
        out[i] = best
    return out


def _first_argmin_suffix(v: np.ndarray) -> np.ndarray:
    out = np.empty(len(v), dtype=int)
    best = len(v) - 1
    for i in range(len(v) - 1, -1, -1):
        if v[i] <= v[best]:
            best = i
        out[i] = best
    return out


def _partial_grid(p: Problem, axes, vals, start: int, stop: int):
    """Running sums, objective and feasibility over dims 1..N-1 (flattened,
    lexicographic), restricted to first-axis indices [start, stop)."""
    n = p.n
    if n == 1:
        return np.zeros(1), np.zeros(1), np.ones(1, dtype=bool)
    shape = (stop - start,) + (len(axes[0]),) * (n - 2)
    S = np.zeros(shape)
    F = np.zeros(shape)
    ok = np.ones(shape, dtype=bool)
    for d in range(n - 1):
        view = [1] * (n - 1)
        view[d] = -1
        ax = axes[d][start:stop] if d == 0 else axes[d]
        vv = vals[d][start:stop] if d == 0 else vals[d]
        S = S + ax.reshape(view)
        F = F + vv.reshape(view)
        if d + 1 in p.rho:
            ok &= _ok(S, p.rho[d + 1], p.sense)
    return S.ravel(), F.ravel(), ok.ravel()


def _last_index(S: np.ndarray, p: Problem, axis: np.ndarray) -> np.ndarray:
    """For LE: largest index k with S + axis[k] <= rho_N (or m-1 if N is
    unconstrained).  For GE: smallest k with S + axis[k] >= rho_N."""
    m = len(axis)
    n = p.n
    if n not in p.rho:
        return np.full(S.shape, m - 1 if p.sense is Sense.LE else 0)
    rho = p.rho[n]
    if p.sense is Sense.LE:
        k = np.searchsorted(axis, rho - S, side="right") - 1
        # repair float disagreements between rho - S and S + a
        kc = np.clip(k, 0, m - 1)
        bad = (k >= 0) & ~(S + axis[kc] <= rho)
        k = np.where(bad, k - 1, k)
        kn = np.clip(k + 1, 0, m - 1)
        good = (k + 1 < m) & (S + axis[kn] <= rho)
        k = np.where(good, k + 1, k)
        kc = np.clip(k, 0, m - 1)
        return np.where((k >= 0) & (S + axis[kc] <= rho), k, -1)
    k = np.searchsorted(axis, rho - S, side="left")
    kc = np.clip(k, 0, m - 1)
    bad = (k < m) & ~(S + axis[kc] >= rho)
    k = np.where(bad, k + 1, k)
    kp = np.clip(k - 1, 0, m - 1)
    good = (k - 1 >= 0) & (S + axis[kp] >= rho)
    k = np.where(good, k - 1, k)
    kc = np.clip(k, 0, m - 1)
    return np.where((k < m) & (S + axis[kc] >= rho), k, m)
