"""Scalar-loop kernels for the four catalog kinds, JIT-compiled with numba.

Term kinds are encoded as integers: 0 ScaledExp, 1 NegLogCapacity,
2 InverseLinear, 3 LogInvSnr.  Windows are half-open [a, b) over flat
arrays.  ``solve_window`` returns (root, status) with status 0 = ok,
1 = gamma not above the sum of lower bounds, 2 = bracket expansion failed.
"""

import math

import numpy as np

try:
    from numba import njit
    AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


EPS_ZERO = 1e-300


@njit(cache=True, error_model="numpy")
def _xi_one(c, p, l, u, hu, hl, s):
    if s <= hu:
        return u
    if s >= hl:
        return l
    if c == 0:
        v = math.log(p) - math.log(s)
    elif c == 1:
        v = 1.0 / s - 1.0 / p
    elif c == 2:
        v = math.sqrt(p / s)
    else:
        v = 2.0 / (s * (1.0 + math.sqrt(1.0 + 4.0 * p / s)))
    if v <= EPS_ZERO and l == 0.0:
        return 0.0
    return min(max(v, l), u)


@njit(cache=True, error_model="numpy")
def _dxi_one(c, p, x, hu, hl, s):
    if s <= hu or s >= hl:
        return 0.0
    if c == 0:
        return -1.0 / s
    if c == 1:
        return -1.0 / (s * s)
    if c == 2:
        return -x / (2.0 * s)
    return -1.0 / (s * s * (1.0 + 2.0 * p * x))


@njit(cache=True, error_model="numpy")
def xi_window(code, par, l, u, hu, hl, a, b, s, out):
    for i in range(a, b):
        out[i - a] = _xi_one(code[i], par[i], l[i], u[i], hu[i], hl[i], s)


@njit(cache=True, error_model="numpy")
def cumulative_window(code, par, l, u, hu, hl, a, b, s, out):
    acc = 0.0
    for i in range(a, b):
        acc += _xi_one(code[i], par[i], l[i], u[i], hu[i], hl[i], s)
        out[i - a] = acc


@njit(cache=True, error_model="numpy")
def total_window(code, par, l, u, hu, hl, a, b, s):
    acc = 0.0
    for i in range(a, b):
        acc += _xi_one(code[i], par[i], l[i], u[i], hu[i], hl[i], s)
    return acc


@njit(cache=True, error_model="numpy")
def _value_slope(code, par, l, u, hu, hl, a, b, s):
    acc = 0.0
    d = 0.0
    for i in range(a, b):
        x = _xi_one(code[i], par[i], l[i], u[i], hu[i], hl[i], s)
        acc += x
        d += _dxi_one(code[i], par[i], x, hu[i], hl[i], s)
    return acc, d


@njit(cache=True, error_model="numpy")
def _closed_form(code, par, l, u, hu, hl, a, b, gamma, lo, hi, fam):
    rest = gamma
    sa = 0.0
    sb = 0.0
    for i in range(a, b):
        if hu[i] >= hi:
            rest -= u[i]
        elif hl[i] <= lo:
            rest -= l[i]
        else:
            p = par[i]
            if fam == 0:
                sa += math.log(p)
                sb += 1.0
            elif fam == 1:
                sa -= 1.0 / p
                sb += 1.0
            else:
                sb += math.sqrt(p)
    if sb <= 0.0:
        return -1.0
    v = (rest - sa) / sb
    if fam == 0:
        if -v > 709.0:
            return -1.0
        s = math.exp(-v)
    elif v <= 0.0:
        return -1.0
    elif fam == 1:
        s = 1.0 / v
    else:
        s = 1.0 / (v * v)
    return min(max(s, lo), hi)


@njit(cache=True, error_model="numpy")
def solve_window(code, par, l, u, hu, hl, a, b, gamma, eps_root):
    usum = 0.0
    lsum = 0.0
    fam = code[a]
    for i in range(a, b):
        usum += u[i]
        lsum += l[i]
        if code[i] != fam:
            fam = -1
    if fam == 3:
        fam = -1
    if gamma >= usum:
        return 0.0, 0
    if not gamma > lsum:
        return math.nan, 1
    tol = eps_root * (1.0 + abs(gamma))

    # breakpoint segment [lo, hi) with c(lo) >= gamma > c(hi)
    pts = np.empty(2 * (b - a))
    m = 0
    for i in range(a, b):
        if hu[i] > 0.0 and hu[i] < math.inf:
            pts[m] = hu[i]
            m += 1
        if hl[i] > 0.0 and hl[i] < math.inf:
            pts[m] = hl[i]
            m += 1
    pts = np.sort(pts[:m])
    k_lo = -1
    k_hi = m
    while k_hi - k_lo > 1:
        mid = (k_lo + k_hi) // 2
        if total_window(code, par, l, u, hu, hl, a, b, pts[mid]) >= gamma:
            k_lo = mid
        else:
            k_hi = mid
    lo = pts[k_lo] if k_lo >= 0 else 0.0
    hi = pts[k_hi] if k_hi < m else math.inf

    if fam >= 0:
        s = _closed_form(code, par, l, u, hu, hl, a, b, gamma, lo, hi, fam)
        if s > 0.0:
            r = total_window(code, par, l, u, hu, hl, a, b, s) - gamma
            if abs(r) <= tol:
                return s, 0

    # safeguarded Newton in log(s); every xi is smooth inside the segment
    if lo > 0.0 and hi < math.inf:
        s = math.sqrt(lo) * math.sqrt(hi)
    elif lo == 0.0:
        s = 0.5 * hi if hi < math.inf else 1.0
    else:
        s = 2.0 * lo
    nlo = lo
    nhi = hi
    for _ in range(60):
        c, d = _value_slope(code, par, l, u, hu, hl, a, b, s)
        r = c - gamma
        if abs(r) <= tol:
            return s, 0
        if r > 0:
            nlo = s
        else:
            nhi = s
        nxt = math.nan
        if d < 0.0 and d > -math.inf:
            step = -r / (s * d)
            if abs(step) < 700.0:
                nxt = s * math.exp(step)
        if not (nlo < nxt < nhi):
            if nhi == math.inf:
                nxt = 2.0 * max(s, 1.0)
            elif nlo > 0.0:
                nxt = math.sqrt(nlo) * math.sqrt(nhi)
            else:
                nxt = 0.5 * nhi
        if not (nlo < nxt < nhi):
            break
        s = nxt

    # bisection fallback
    if hi == math.inf:
        hi = max(1.0, 2.0 * lo)
        while total_window(code, par, l, u, hu, hl, a, b, hi) >= gamma:
            lo = hi
            hi *= 2.0
            if hi > 1e308:
                return math.nan, 2
    c_lo = total_window(code, par, l, u, hu, hl, a, b, lo)
    c_hi = total_window(code, par, l, u, hu, hl, a, b, hi)
    for _ in range(400):
        if lo > 0.0 and hi > 2.0 * lo:
            mid = math.sqrt(lo) * math.sqrt(hi)
        else:
            mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        c = total_window(code, par, l, u, hu, hl, a, b, mid)
        if c >= gamma:
            lo = mid
            c_lo = c
        else:
            hi = mid
            c_hi = c
    if abs(c_hi - gamma) <= abs(c_lo - gamma):
        return hi, 0
    return lo, 0
