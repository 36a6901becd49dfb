"""Random instance generators shared by the test modules."""

import math

import numpy as np

from waterladder import (Custom, InverseLinear, LogInvSnr, NegLogCapacity, ScaledExp,
                         make_problem)

INF = math.inf
KINDS = ("ScaledExp", "NegLogCapacity", "InverseLinear", "LogInvSnr")


def _loguniform(rng, lo, hi):
    return float(np.exp(rng.uniform(np.log(lo), np.log(hi))))


def random_box(rng, kind):
    """One (term, l, u) triple with a mix of finite and infinite bounds."""
    p = _loguniform(rng, 0.1, 10.0)
    if kind == "ScaledExp":
        t = ScaledExp(p)
        l = -INF if rng.random() < 0.5 else rng.uniform(-3, 1)
        base = rng.uniform(-2, 2) if l == -INF else l
        u = INF if rng.random() < 0.3 else base + rng.uniform(0.1, 4)
    elif kind == "NegLogCapacity":
        t = NegLogCapacity(p)
        r = rng.random()
        l = 0.0 if r < 0.5 else (-0.5 / p if r < 0.7 else rng.uniform(0, 1))
        u = INF if rng.random() < 0.4 else l + rng.uniform(0.1, 3)
    else:
        t = InverseLinear(p) if kind == "InverseLinear" else LogInvSnr(p)
        l = 0.0 if rng.random() < 0.5 else rng.uniform(0, 1)
        u = INF if rng.random() < 0.4 else l + rng.uniform(0.1, 3)
    return t, float(l), float(u)


def interior_point(rng, l, u):
    lo = l if math.isfinite(l) else (u - 3 if math.isfinite(u) else -1.0)
    hi = u if math.isfinite(u) else lo + 3
    return float(rng.uniform(lo + 0.05 * (hi - lo), hi - 0.05 * (hi - lo)))


def random_L(rng, n, upper):
    keep = rng.random(n) < rng.uniform(0.05, 1.0)
    L = [j + 1 for j in range(n) if keep[j]]
    if not L or any(math.isinf(upper[k]) for k in range(max(L), n)):
        L.append(n)
    return sorted(set(L))


def random_rho(rng, x0, L):
    prefix = np.cumsum(x0)
    rho = {}
    for j in L:
        slack = 0.0 if rng.random() < 0.3 else rng.exponential(1.0)
        rho[j] = float(prefix[j - 1] + slack)
    return rho


def random_instance(rng, kind, n, mixed=False):
    kinds = [KINDS[rng.integers(4)] if mixed else kind for _ in range(n)]
    triples = [random_box(rng, k) for k in kinds]
    terms = [t for t, _, _ in triples]
    lower = [l for _, l, _ in triples]
    upper = [u for _, _, u in triples]
    x0 = [interior_point(rng, l, u) for l, u in zip(lower, upper)]
    L = random_L(rng, n, upper)
    return make_problem(terms, lower, upper, random_rho(rng, x0, L))


def finite_instance(rng, kind, n, full_L=False, width=3.0):
    """All bounds finite (for the grid oracle)."""
    terms, lower, upper = [], [], []
    for _ in range(n):
        t, l, u = random_box(rng, kind)
        if not math.isfinite(l):
            l = (u - width) if math.isfinite(u) else rng.uniform(-3, 0)
        if not math.isfinite(u):
            u = l + rng.uniform(0.5, width)
        terms.append(t)
        lower.append(l)
        upper.append(u)
    x0 = [interior_point(rng, l, u) for l, u in zip(lower, upper)]
    L = list(range(1, n + 1)) if full_L else random_L(rng, n, upper)
    return make_problem(terms, lower, upper, random_rho(rng, x0, L))


def quadratic(a, c):
    """f(x) = a (x - c)^2, minimized at c."""
    return Custom(lambda x: a * (x - c) ** 2, lambda x: 2 * a * (x - c),
                  lambda s: c - s / (2 * a), name=f"quad({a:.3g},{c:.3g})")


def shifted_exp(a, c, sign):
    """f(x) = a exp(sign * (x - c)); increasing for sign=+1."""
    return Custom(lambda x: a * np.exp(sign * (x - c)),
                  lambda x: sign * a * math.exp(sign * (x - c)),
                  name=f"sexp({a:.3g},{c:.3g},{sign})")


def full_L_rho(rng, p):
    """Right-hand sides for every prefix, feasible for the box of ``p``."""
    x0 = [interior_point(rng, l, u) for l, u in zip(p.lower, p.upper)]
    return random_rho(rng, x0, list(range(1, p.n + 1)))


def reduction_instance(rng, n):
    """Finite-box instance mixing catalog terms with Custom quadratics and
    shifted exponentials; at least one term is increasing or has an
    interior minimum.  About 15% of instances put one constraint exactly at
    the lower corner."""
    shapes = ("quadA", "quadB", "quadC", "sexpA", "sexpC", "catalog")
    while True:
        picks = [shapes[rng.integers(len(shapes))] for _ in range(n)]
        if any(s in ("quadA", "quadB", "sexpA") for s in picks):
            break
    terms, lower, upper = [], [], []
    for s in picks:
        l = float(rng.uniform(-2, 1))
        u = l + float(rng.uniform(0.5, 3))
        if s.startswith("quad"):
            a = _loguniform(rng, 0.2, 5.0)
            if s == "quadA":
                c = l if rng.random() < 0.2 else l - rng.uniform(0, 1)
            elif s == "quadB":
                c = rng.uniform(l + 0.1 * (u - l), u - 0.1 * (u - l))
            else:
                c = u + rng.uniform(0, 1)
            t = quadratic(a, float(c))
        elif s.startswith("sexp"):
            t = shifted_exp(_loguniform(rng, 0.2, 3.0), float(rng.uniform(l, u)),
                            1 if s == "sexpA" else -1)
        else:
            t, l, u = random_box(rng, KINDS[rng.integers(4)])
            if not math.isfinite(l):
                l = u - 3 if math.isfinite(u) else -1.0
            if not math.isfinite(u):
                u = l + rng.uniform(0.5, 3)
        terms.append(t)
        lower.append(l)
        upper.append(u)
    x0 = [interior_point(rng, l, u) for l, u in zip(lower, upper)]
    L = random_L(rng, n, upper)
    rho = random_rho(rng, x0, L)
    if rng.random() < 0.15:
        j = L[rng.integers(len(L))]
        # only when the corner has a finite objective
        if all(np.isfinite(t.value(l)) for t, l in zip(terms[:j], lower[:j])):
            rho[j] = float(np.cumsum(lower)[j - 1])
    return make_problem(terms, lower, upper, rho)
