"""Independent KKT verification of a candidate solution."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .model import Problem, Sense, Solution, flip_sense


def _h_at(p: Problem, x: np.ndarray) -> np.ndarray:
    """h_n(x_n), taking one-sided limits when x_n sits on a bound."""
    out = np.empty(len(x))
    for k, t in enumerate(p.terms):
        xk = float(x[k])
        if xk == p.lower[k]:
            out[k] = t.h_limit(xk, +1)
        elif xk == p.upper[k]:
            out[k] = t.h_limit(xk, -1)
        else:
            out[k] = t.h(xk)
    return out


def reconstruct_box_multipliers(p: Problem, x, sigma) -> tuple[np.ndarray, np.ndarray]:
    """nu = max(h(x) - sigma, 0) for x <= u and kappa = max(sigma - h(x), 0)
    for x >= l.  For GE problems the roles follow the mirrored box."""
    x = np.asarray(x, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    if p.sense is Sense.GE:
        q, _ = flip_sense(p)
        nu_y, kappa_y = reconstruct_box_multipliers(q, -x, sigma)
        return kappa_y, nu_y
    h = _h_at(p, x)
    with np.errstate(invalid="ignore"):
        nu = np.maximum(h - sigma, 0.0)
        kappa = np.maximum(sigma - h, 0.0)
    return nu, kappa


@dataclass(frozen=True)
class KktReport:
    """Residuals of the optimality system; every field is >= 0.

    ``multiplier_gap`` measures sigma_n - sigma_{n+1} at indices that carry
    no constraint (it must vanish there).  ``worst_constraint`` is the
    index of the largest prefix-constraint violation, or None.
    """

    stationarity_residual: float
    monotone_violation: float
    primal_violation: float
    comp_slack_constraints: float
    comp_slack_boxes: float
    multiplier_gap: float
    tol: float
    dual_scale: float
    primal_scale: float
    worst_constraint: Optional[int] = None

    @property
    def passed(self) -> bool:
        d, q, t = self.dual_scale, self.primal_scale, self.tol
        return bool(self.stationarity_residual <= t * d
                    and self.monotone_violation <= t * d
                    and self.multiplier_gap <= t * d
                    and self.primal_violation <= t * q
                    and self.comp_slack_constraints <= t * d * q
                    and self.comp_slack_boxes <= t * d * q)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        return d


def _finite_max(a) -> float:
    a = np.abs(np.asarray(a, dtype=float))
    a = a[np.isfinite(a)]
    return float(a.max()) if a.size else 0.0


def _nanmax(values) -> float:
    """max that turns NaN into +inf so an undefined residual always fails."""
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return 0.0
    if np.isnan(v).any():
        return math.inf
    return float(max(0.0, v.max()))


def kkt_check(p: Problem, s: Solution, tol: float = 1e-6) -> KktReport:
    """Evaluate every KKT residual of ``s`` for ``p``; never raises on bad
    candidates, only reports."""
    x = np.asarray(s.x, dtype=float)
    sigma = np.asarray(s.sigma, dtype=float)
    nu = np.asarray(s.nu, dtype=float)
    kappa = np.asarray(s.kappa, dtype=float)
    if p.sense is Sense.GE:
        q, _ = flip_sense(p)
        return kkt_check(q, Solution(-x, sigma, kappa, nu, s.trace, s.iterations), tol)
    n = p.n
    l, u = p.lower, p.upper
    h = _h_at(p, x)
    with np.errstate(invalid="ignore"):
        stat = np.abs(-h + sigma + nu - kappa)
    nxt = np.append(sigma[1:], 0.0)
    drop = sigma - nxt
    mono = np.concatenate((-drop, -sigma))

    prefix = np.cumsum(x)
    L = np.array(list(p.rho), dtype=int)
    rho = np.array(list(p.rho.values()), dtype=float)
    viol = prefix[L - 1] - rho if L.size else np.zeros(0)
    box = np.concatenate((x - u, l - x))
    primal = _nanmax(np.concatenate((viol, box)))
    worst = int(L[np.argmax(viol)]) if L.size and viol.max() > 0 else None

    comp_c = np.abs(drop[L - 1] * viol) if L.size else np.zeros(0)
    free = np.ones(n, dtype=bool)
    if L.size:
        free[L - 1] = False
    gap = np.abs(drop[free])

    with np.errstate(invalid="ignore"):
        cb_u = np.where(np.isinf(u), np.abs(nu), np.abs(nu * (u - x)))
        cb_l = np.where(np.isinf(l), np.abs(kappa), np.abs(kappa * (x - l)))
    comp_b = np.concatenate((cb_u, cb_l, -nu, -kappa))

    dual_scale = 1.0 + max(_finite_max(sigma), _finite_max(nu), _finite_max(kappa))
    primal_scale = 1.0 + max(_finite_max(rho), _finite_max(prefix), _finite_max(x),
                             _finite_max(np.cumsum(np.abs(x))))
    return KktReport(
        stationarity_residual=_nanmax(stat),
        monotone_violation=_nanmax(mono),
        primal_violation=primal,
        comp_slack_constraints=_nanmax(comp_c),
        comp_slack_boxes=_nanmax(comp_b),
        multiplier_gap=_nanmax(gap),
        tol=tol,
        dual_scale=dual_scale,
        primal_scale=primal_scale,
        worst_constraint=worst,
    )
