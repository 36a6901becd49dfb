"""Tabular chart data: xi_n and the running sums c_n over a log-spaced
multiplier grid, plus marker rows for the optimum.

Column order (also documented in the README)::

    section, n, varsigma, water_level, value, xi_1..xi_N, c_1..c_N

``section`` is ``sample`` for grid rows, ``sigma_marker`` for one row per
variable holding (sigma_n, x_n) in (varsigma, value), and
``varsigma_marker`` for one row per first-iteration root holding
(varsigma_n, gamma_n).  ``water_level`` is 1/varsigma.
"""

from __future__ import annotations

import csv
import math
from typing import TextIO

import numpy as np

from .kernel import XiMap, xi
from .model import Problem, Sense, Solution, flip_sense, solution_to_original
from .preprocess import reduce

SAMPLES = 200


class _Pinned:
    def __init__(self, value):
        self.value = value

    def __call__(self, s):
        return self.value


def _maps(p: Problem):
    rp = reduce(p)
    out = []
    for k, t in enumerate(p.terms):
        idx = k + 1
        if idx in rp.pinned:
            out.append(_Pinned(rp.pinned[idx]))
        else:
            u = rp.tightened_upper.get(idx, p.upper[k])
            out.append(XiMap.build(t, p.lower[k], u))
    return out


def chart_columns(n: int) -> list[str]:
    return (["section", "n", "varsigma", "water_level", "value"]
            + [f"xi_{i}" for i in range(1, n + 1)] + [f"c_{i}" for i in range(1, n + 1)])


def sample_grid(maps, sol: Solution, samples: int = SAMPLES) -> np.ndarray:
    pts = [v for m in maps if isinstance(m, XiMap) for v in (m.h_at_u, m.h_at_l)]
    pts = [v for v in pts if math.isfinite(v) and v > 0]
    if not pts:
        pts = [v for v in sol.sigma if math.isfinite(v) and v > 0] or [1.0]
    return np.geomspace(min(pts) / 10.0, max(pts) * 10.0, samples)


def emit_chart_data(p: Problem, s: Solution, out: TextIO, samples: int = SAMPLES) -> int:
    """Write chart rows to ``out`` as CSV; returns the number of data rows.

    GE problems are charted through their LE image (y = -x)."""
    if p.sense is Sense.GE:
        q, vmap = flip_sense(p)
        return emit_chart_data(q, solution_to_original(s, vmap), out, samples)
    maps = _maps(p)
    n = p.n
    w = csv.writer(out, lineterminator="\n")
    w.writerow(chart_columns(n))
    rows = 0
    blank = [""] * (2 * n)
    for v in sample_grid(maps, s, samples):
        vals = [m(v) if isinstance(m, _Pinned) else xi(m, v) for m in maps]
        w.writerow(["sample", "", repr(float(v)), repr(float(1.0 / v)), ""]
                   + [repr(float(a)) for a in vals]
                   + [repr(float(c)) for c in np.cumsum(vals)])
        rows += 1
    for k in range(n):
        sg = float(s.sigma[k])
        w.writerow(["sigma_marker", k + 1, repr(sg), repr(1.0 / sg) if sg > 0 else "inf",
                    repr(float(s.x[k]))] + blank)
        rows += 1
    first = next((b for b in s.trace if b.varsigma), None)
    if first is not None:
        for j, v in sorted(first.varsigma.items()):
            w.writerow(["varsigma_marker", j, repr(float(v)), repr(1.0 / v) if v > 0 else "inf",
                        repr(float(p.rho[j]))] + blank)
            rows += 1
    return rows
