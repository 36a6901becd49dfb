"""Inner layer: the clipped inverse map xi, prefix sums c, and the root of
c(s) = gamma.

``TermBank`` holds a whole reduced problem in flat arrays so that xi and its
prefix sums are evaluated for many terms at once; the list-of-``XiMap``
functions are thin wrappers over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _compiled
from .errors import BracketFailure
from .terms import (INF, InverseLinear, LogInvSnr, NegLogCapacity, ObjectiveTerm,
                    ScaledExp)

EPS_ROOT = 1e-12
EPS_ZERO = 1e-300
MAX_BISECT = 400
EXPAND_LIMIT = 1e308

GENERIC = -1
_CODES = {ScaledExp: 0, NegLogCapacity: 1, InverseLinear: 2, LogInvSnr: 3}
_INVERSES = {0: ScaledExp.h_inverse_array, 1: NegLogCapacity.h_inverse_array,
             2: InverseLinear.h_inverse_array, 3: LogInvSnr.h_inverse_array}
# x = A + B * phi(s) for the three families with an affine inverse
_PHI = {0: lambda s: -math.log(s), 1: lambda s: 1.0 / s, 2: lambda s: s ** -0.5}
_PHI_INV = {0: lambda v: math.exp(-v), 1: lambda v: 1.0 / v, 2: lambda v: v ** -2.0}


def _invert_h(term: ObjectiveTerm, s: float, l: float, u: float) -> float:
    """Solve h(x) = s on (l, u) by bisection; h is decreasing there."""
    a, b = l, u
    if math.isinf(a):
        a = min(-1.0, b - 1.0) if math.isfinite(b) else -1.0
        while term.h(a) <= s:
            a -= max(1.0, abs(a))
            if a < -EXPAND_LIMIT:
                raise BracketFailure(f"cannot bracket h^-1({s}) from below")
    if math.isinf(b):
        b = max(1.0, a + 1.0)
        while term.h(b) >= s:
            b += max(1.0, abs(b))
            if b > EXPAND_LIMIT:
                raise BracketFailure(f"cannot bracket h^-1({s}) from above")
    for _ in range(MAX_BISECT):
        m = 0.5 * (a + b)
        if not a < m < b:
            break
        if term.h(m) > s:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


@dataclass(frozen=True)
class XiMap:
    """Clipped inverse of h for one term on the box [l, u]."""

    term: ObjectiveTerm
    l: float
    u: float
    h_at_u: float
    h_at_l: float

    @classmethod
    def build(cls, term: ObjectiveTerm, l: float, u: float) -> "XiMap":
        return cls(term, float(l), float(u), term.h_limit(u, -1), term.h_limit(l, +1))

    def __call__(self, s: float) -> float:
        return xi(self, s)


def xi(m: XiMap, s: float) -> float:
    """min{max{h^-1(s), l}, u} in its piecewise form."""
    if s <= m.h_at_u:
        return m.u
    if s >= m.h_at_l:
        return m.l
    v = m.term.h_inverse(s)
    if v is None:
        v = _invert_h(m.term, s, m.l, m.u)
    if v <= EPS_ZERO and m.l == 0.0:
        return 0.0
    return min(max(v, m.l), m.u)


@dataclass(frozen=True)
class Bracket:
    omega: float
    Omega: float


def bracket(maps: Sequence[XiMap]) -> Bracket:
    return Bracket(max(0.0, min(m.h_at_u for m in maps)), max(m.h_at_l for m in maps))


class TermBank:
    """Flat-array view of a list of XiMaps."""

    def __init__(self, maps: Sequence[XiMap]):
        self.maps = list(maps)
        self.n = len(self.maps)
        self.code = np.array([_CODES.get(type(m.term), GENERIC) for m in self.maps], dtype=int)
        self.param = np.array([m.term.param if c != GENERIC else np.nan
                               for m, c in zip(self.maps, self.code)])
        self.l = np.array([m.l for m in self.maps], dtype=float)
        self.u = np.array([m.u for m in self.maps], dtype=float)
        self.hu = np.array([m.h_at_u for m in self.maps], dtype=float)
        self.hl = np.array([m.h_at_l for m in self.maps], dtype=float)
        codes = set(self.code.tolist())
        self.uniform = codes.pop() if len(codes) == 1 else None
        self.zero_floor = self.l == 0.0
        self.has_zero_floor = bool(self.zero_floor.any())
        if self.uniform is not None and self.uniform in _PHI:
            coef = [m.term.affine_coefficients() for m in self.maps]
            self.A = np.array([c[0] for c in coef])
            self.B = np.array([c[1] for c in coef])
        else:
            self.A = self.B = None
        self.compiled = _compiled.AVAILABLE and not (self.code == GENERIC).any()
        self._flat = (self.code.astype(np.int64), self.param, self.l, self.u, self.hu, self.hl)
        self.generic_count = np.concatenate(([0], np.cumsum(self.code == GENERIC)))

    @classmethod
    def from_problem(cls, p) -> "TermBank":
        return cls([XiMap.build(t, l, u) for t, l, u in zip(p.terms, p.lower, p.upper)])

    # -- evaluation -----------------------------------------------------
    def _raw_inverse(self, s: float, a: int, b: int) -> np.ndarray:
        if self.uniform is not None and self.uniform != GENERIC:
            return _INVERSES[self.uniform](self.param[a:b], s)
        code = self.code[a:b]
        out = np.empty(b - a)
        for c, f in _INVERSES.items():
            mask = code == c
            if mask.any():
                out[mask] = f(self.param[a:b][mask], s)
        for i in np.flatnonzero(code == GENERIC):
            m = self.maps[a + i]
            out[i] = xi(m, s) if m.h_at_u < s < m.h_at_l else m.u
        return out

    def xi(self, s: float, a: int = 0, b: Optional[int] = None) -> np.ndarray:
        """xi_i(s) for i in [a, b) (0-based, half-open)."""
        b = self.n if b is None else b
        if self.compiled:
            out = np.empty(b - a)
            _compiled.xi_window(*self._flat, a, b, float(s), out)
            return out
        return self._xi_np(s, a, b)

    def _xi_np(self, s: float, a: int, b: int) -> np.ndarray:
        u = self.u[a:b]
        if s <= 0.0:
            return u.copy()
        l = self.l[a:b]
        v = self._raw_inverse(s, a, b)
        if self.has_zero_floor and s > 1e250:
            v = np.where((v <= EPS_ZERO) & self.zero_floor[a:b], 0.0, v)
        v = np.minimum(np.maximum(v, l), u)
        v = np.where(s >= self.hl[a:b], l, v)
        return np.where(s <= self.hu[a:b], u, v)

    def slope(self, s: float, a: int, b: int, x: np.ndarray) -> float:
        """d/ds of sum xi_i over [a, b) at s > 0, given x = xi(s)."""
        active = (s > self.hu[a:b]) & (s < self.hl[a:b])
        code = self.code[a:b]
        d = np.zeros(b - a)
        for c in set(code[active].tolist()):
            m = active & (code == c)
            if c == 0:
                d[m] = -1.0 / s
            elif c == 1:
                d[m] = -1.0 / (s * s)
            elif c == 2:
                d[m] = -x[m] / (2.0 * s)
            else:
                d[m] = -1.0 / (s * s * (1.0 + 2.0 * self.param[a:b][m] * x[m]))
        if not math.isfinite(d.sum()):
            return math.nan
        return float(d.sum())

    def cumulative(self, s: float, a: int = 0, b: Optional[int] = None) -> np.ndarray:
        b = self.n if b is None else b
        if self.compiled:
            out = np.empty(b - a)
            _compiled.cumulative_window(*self._flat, a, b, float(s), out)
            return out
        return np.cumsum(self._xi_np(s, a, b))

    def total(self, s: float, a: int = 0, b: Optional[int] = None) -> float:
        b = self.n if b is None else b
        if self.compiled:
            return _compiled.total_window(*self._flat, a, b, float(s))
        return float(self._xi_np(s, a, b).sum())

    def _total_np(self, s: float, a: int, b: int) -> float:
        return float(self._xi_np(s, a, b).sum())

    # -- root finding ---------------------------------------------------
    def solve(self, a: int, b: int, gamma: float, method: str = "auto",
              eps_root: float = EPS_ROOT) -> float:
        """Largest s >= 0 with sum_{i in [a, b)} xi_i(s) = gamma; 0 when
        gamma is at or above the sum of upper bounds.

        ``method`` selects the route: "auto" (compiled kernel when every term
        is a catalog kind, else "numpy"), "numpy" (vectorized breakpoint
        sweep / segment search), "segment" (segment search then a smooth
        solve) or "bisect" (plain bisection on the full bracket).
        """
        if method == "auto":
            if self.compiled:
                s, status = _compiled.solve_window(*self._flat, a, b, float(gamma), eps_root)
                if status == 1:
                    raise ValueError(f"gamma={gamma} is not above the sum of lower bounds")
                if status == 2:
                    raise BracketFailure("no sign change below 1e308")
                return s
            method = "numpy"
        if gamma >= self.u[a:b].sum():
            return 0.0
        if not gamma > self.l[a:b].sum():
            raise ValueError(f"gamma={gamma} is not above the sum of lower bounds")
        if method == "bisect":
            hu, hl = self.hu[a:b], self.hl[a:b]
            lo = max(0.0, float(hu.min()))
            if self._total_np(lo, a, b) < gamma:
                lo = 0.0
            return self._bisect(a, b, gamma, lo, float(hl.max()), eps_root)
        tol = eps_root * (1.0 + abs(gamma))
        if method == "numpy":
            s = self._fast_root(a, b, gamma, tol)
            if s is not None:
                return s
        lo, hi = self._segment(a, b, gamma)
        s = self._closed_form(a, b, gamma, lo, hi)
        if s is not None and abs(self._total_np(s, a, b) - gamma) <= tol:
            return s
        if not self.generic_count[b] - self.generic_count[a]:
            s = self._newton(a, b, gamma, lo, hi, eps_root)
            if s is not None:
                return s
        return self._bisect(a, b, gamma, lo, hi, eps_root)

    def _fast_root(self, a, b, gamma, tol) -> Optional[float]:
        """Root without a breakpoint search, or None to use the careful path.

        Only for the affine families: sweep the sorted breakpoints once,
        accumulating the per-segment sums, and solve every segment's equation
        at once.  Results on a flat stretch of c are rejected so the careful path can
        apply the largest-root rule.
        """
        if self.A is None:
            return None
        hu, hl = self.hu[a:b], self.hl[a:b]
        s = self._event_sweep(a, b, gamma)
        if s is None or s <= 0:
            return None
        x = self._xi_np(s, a, b)
        if abs(float(x.sum()) - gamma) > tol or not ((s > hu) & (s < hl)).any():
            return None
        return s

    def _event_sweep(self, a, b, gamma) -> Optional[float]:
        hu, hl = self.hu[a:b], self.hl[a:b]
        u, l = self.u[a:b], self.l[a:b]
        A, B = self.A[a:b], self.B[a:b]
        start_u = hu > 0
        ev_u = start_u & np.isfinite(hu)
        ev_l = np.isfinite(hl) & (hl > 0)
        pts = np.concatenate((hu[ev_u], hl[ev_l]))
        zero_u, zero_l = np.zeros(int(ev_u.sum())), np.zeros(int(ev_l.sum()))
        dU = np.concatenate((-u[ev_u], zero_l))
        dL = np.concatenate((zero_u, l[ev_l]))
        dA = np.concatenate((A[ev_u], -A[ev_l]))
        dB = np.concatenate((B[ev_u], -B[ev_l]))
        order = np.argsort(pts, kind="stable")
        U = u[start_u].sum() + np.concatenate(([0.0], np.cumsum(dU[order])))
        Ls = np.concatenate(([0.0], np.cumsum(dL[order])))
        As = A[~start_u].sum() + np.concatenate(([0.0], np.cumsum(dA[order])))
        Bs = B[~start_u].sum() + np.concatenate(([0.0], np.cumsum(dB[order])))
        edges = pts[order]
        lo = np.concatenate(([0.0], edges))
        hi = np.concatenate((edges, [INF]))
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            v = (gamma - U - Ls - As) / Bs
            if self.uniform == 0:
                root = np.exp(-v)
            elif self.uniform == 1:
                root = np.where(v > 0, 1.0 / v, np.nan)
            else:
                root = np.where(v > 0, v ** -2.0, np.nan)
            slack = 1e-12 * np.maximum(1.0, lo)
            ok = (Bs > 1e-300) & (root >= lo - slack) & (root <= hi + slack)
        if not ok.any():
            return None
        k = int(np.flatnonzero(ok)[-1])
        return float(min(max(root[k], lo[k]), hi[k]))

    def _newton(self, a, b, gamma, lo, hi, eps_root) -> Optional[float]:
        """Safeguarded Newton in log(s) inside a breakpoint segment, where
        every xi is smooth; falls back (None) if it stalls."""
        tol = eps_root * (1.0 + abs(gamma))
        s = math.sqrt(lo * hi) if lo > 0 and math.isfinite(hi) else (
            0.5 * hi if lo == 0 else 2.0 * lo)
        for _ in range(60):
            x = self._xi_np(s, a, b)
            r = float(x.sum()) - gamma
            if abs(r) <= tol:
                return s
            if r > 0:
                lo = s
            else:
                hi = s
            d = self.slope(s, a, b, x)
            nxt = math.nan
            if d < 0:
                step = -r / (s * d)
                if abs(step) < 700:
                    nxt = s * math.exp(step)
            if not lo < nxt < hi:
                if math.isinf(hi):
                    nxt = 2.0 * max(s, 1.0)
                elif lo > 0:
                    nxt = math.sqrt(lo * hi)
                else:
                    nxt = 0.5 * hi
            if not lo < nxt < hi:
                return None
            s = nxt
        return None

    def _segment(self, a: int, b: int, gamma: float) -> tuple[float, float]:
        """Breakpoint interval [lo, hi) holding the root: c(lo) >= gamma > c(hi)."""
        pts = np.concatenate((self.hu[a:b], self.hl[a:b]))
        pts = np.sort(pts[np.isfinite(pts) & (pts > 0)])
        k_lo, k_hi = -1, len(pts)
        while k_hi - k_lo > 1:
            mid = (k_lo + k_hi) // 2
            if self._total_np(pts[mid], a, b) >= gamma:
                k_lo = mid
            else:
                k_hi = mid
        lo = float(pts[k_lo]) if k_lo >= 0 else 0.0
        hi = float(pts[k_hi]) if k_hi < len(pts) else INF
        return lo, hi

    def _closed_form(self, a, b, gamma, lo, hi) -> Optional[float]:
        if self.A is None:
            return None
        hu, hl = self.hu[a:b], self.hl[a:b]
        at_u = hu >= hi
        at_l = (hl <= lo) & ~at_u
        active = ~(at_u | at_l)
        if not active.any():
            return None
        rest = gamma - self.u[a:b][at_u].sum() - self.l[a:b][at_l].sum()
        v = (rest - self.A[a:b][active].sum()) / self.B[a:b][active].sum()
        try:
            s = _PHI_INV[self.uniform](v)
        except (OverflowError, ZeroDivisionError, ValueError):
            return None
        if isinstance(s, complex) or not math.isfinite(s):
            return None
        return min(max(s, lo), hi)

    def _bisect(self, a, b, gamma, lo, hi, eps_root) -> float:
        if math.isinf(hi):
            hi = max(1.0, 2.0 * lo)
            while self._total_np(hi, a, b) >= gamma:
                lo = hi
                hi *= 2.0
                if hi > EXPAND_LIMIT:
                    raise BracketFailure("no sign change below 1e308; check the objective terms")
        c_lo, c_hi = self._total_np(lo, a, b), self._total_np(hi, a, b)
        for _ in range(MAX_BISECT):
            if lo > 0 and hi > 2.0 * lo:
                mid = math.sqrt(lo) * math.sqrt(hi)
            else:
                mid = 0.5 * (lo + hi)
            if not lo < mid < hi:
                break
            c = self._total_np(mid, a, b)
            if c >= gamma:
                lo, c_lo = mid, c
            else:
                hi, c_hi = mid, c
            # both ends close: on an exact plateau c_lo == gamma alone is not
            # enough, the largest root is still further right
            tight = eps_root * (1.0 + abs(gamma)) * 1e-3
            if c_lo - gamma <= tight and gamma - c_hi <= tight:
                break
        return hi if abs(c_hi - gamma) <= abs(c_lo - gamma) else lo


def prefix_c(maps: Sequence[XiMap], s: float) -> float:
    """Sum of xi over the given maps."""
    return float(sum(xi(m, s) for m in maps))


def solve_prefix(maps: Sequence[XiMap], gamma: float, method: str = "auto",
                 eps_root: float = EPS_ROOT) -> float:
    """Largest s >= 0 with prefix_c(maps, s) = gamma (0 if gamma >= sum u)."""
    bank = TermBank(maps)
    return bank.solve(0, bank.n, gamma, method=method, eps_root=eps_root)
