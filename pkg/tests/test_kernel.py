import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import KINDS, quadratic, random_box, shifted_exp
from waterladder import (BracketFailure, InverseLinear, LogInvSnr, NegLogCapacity, ScaledExp,
                         TermBank, XiMap, bracket, prefix_c, solve_prefix, xi)

INF = math.inf
W = (2.0, 5.0, 8.0, 0.5)
U = (0.4, -1.2, 2.0, -1.8)


def golden_maps():
    return [XiMap.build(ScaledExp(w), -INF, u) for w, u in zip(W, U)]


def test_xi_examples():
    m = golden_maps()
    assert xi(m[0], 4.451) == pytest.approx(math.log(2) - math.log(4.451))
    assert xi(m[0], 4.451) == pytest.approx(-0.8, abs=1e-3)
    assert xi(m[1], 4.451) == -1.2
    for kind in KINDS:
        t, l, u = random_box(np.random.default_rng(3), kind)
        mm = XiMap.build(t, l, u)
        if mm.h_at_u > 0:
            assert xi(mm, 0.0) == u


def test_prefix_c_examples():
    m = golden_maps()
    assert prefix_c(m[:2], 4.451) == pytest.approx(-2.0, abs=1e-3)
    assert prefix_c(m, 2.307) == pytest.approx(-1.9, abs=1e-3)
    assert prefix_c(m, 0.0) == pytest.approx(sum(U))


def test_solve_prefix_examples():
    m = golden_maps()
    assert solve_prefix(m[:1], 0.2) == pytest.approx(2 * math.exp(-0.2))
    assert solve_prefix(m[:1], 0.2) == pytest.approx(1.637, abs=1e-3)
    assert solve_prefix(m[2:3], 3.1) == 0.0
    # x_4 sits at its cap, so 8 exp(-x_3) with x_3 = 0.1 - u_4
    assert solve_prefix(m[2:4], 0.1) == pytest.approx(8 * math.exp(-1.9), rel=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@given(seed=st.integers(0, 10 ** 6), a=st.floats(1e-4, 1e4), b=st.floats(1e-4, 1e4))
@settings(max_examples=40, deadline=None)
def test_xi_non_increasing_and_projection_form(kind, seed, a, b):
    t, l, u = random_box(np.random.default_rng(seed), kind)
    m = XiMap.build(t, l, u)
    lo, hi = min(a, b), max(a, b)
    assert xi(m, lo) >= xi(m, hi)
    for s in (lo, hi):
        if m.h_at_u < s < m.h_at_l:
            assert xi(m, s) == min(max(t.h_inverse(s), l), u)


def test_bracket_invariants():
    rng = np.random.default_rng(5)
    for _ in range(50):
        maps = [XiMap.build(*random_box(rng, KINDS[rng.integers(4)])) for _ in range(4)]
        br = bracket(maps)
        assert br.omega <= br.Omega
        usum = sum(m.u for m in maps)
        lsum = sum(m.l for m in maps)
        if br.omega > 0:
            assert prefix_c(maps, 0.5 * br.omega) == usum
        if math.isfinite(br.Omega):
            assert prefix_c(maps, 2 * br.Omega) == lsum


def _random_window(rng, kinds, n):
    return [XiMap.build(*random_box(rng, kinds[rng.integers(len(kinds))])) for _ in range(n)]


def _target(rng, maps):
    x0 = []
    for m in maps:
        lo = m.l if math.isfinite(m.l) else (m.u - 3 if math.isfinite(m.u) else -1.0)
        hi = m.u if math.isfinite(m.u) else lo + 3
        x0.append(rng.uniform(lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo)))
    return float(sum(x0))


@pytest.mark.parametrize("kinds", [("ScaledExp",), ("NegLogCapacity",), KINDS])
def test_routes_agree(kinds):
    rng = np.random.default_rng(hash(kinds) % 2 ** 32)
    for _ in range(200):
        maps = _random_window(rng, kinds, int(rng.integers(1, 12)))
        gamma = _target(rng, maps)
        bank = TermBank(maps)
        roots = {meth: bank.solve(0, bank.n, gamma, method=meth)
                 for meth in ("auto", "numpy", "segment", "bisect")}
        ref = roots["bisect"]
        for meth, s in roots.items():
            assert abs(s - ref) <= 1e-8 * (1 + ref), (meth, roots)
            assert bank.total(s) == pytest.approx(gamma, rel=1e-9, abs=1e-9)


def test_monotone_in_gamma():
    rng = np.random.default_rng(9)
    for _ in range(100):
        maps = _random_window(rng, KINDS, 5)
        g1, g2 = sorted((_target(rng, maps), _target(rng, maps)))
        if g1 < g2:
            assert solve_prefix(maps, g1) >= solve_prefix(maps, g2)


def test_largest_root_on_plateau():
    # active ranges (1/e, 1) and (100/e, 100) are disjoint, so c = l_1 + u_2 = 1
    # on the whole interval [1, 100/e]; the largest root is its right end
    maps = [XiMap.build(ScaledExp(1.0), 0.0, 1.0), XiMap.build(ScaledExp(100.0), 0.0, 1.0)]
    for method in ("auto", "numpy", "segment", "bisect"):
        s = solve_prefix(maps, 1.0, method=method)
        assert s == pytest.approx(100 * math.exp(-1.0), rel=1e-10), method


def test_gamma_at_or_above_upper_sum_gives_zero():
    maps = golden_maps()
    assert solve_prefix(maps, sum(U)) == 0.0
    assert solve_prefix(maps, sum(U) + 1) == 0.0


def test_gamma_at_lower_sum_is_rejected():
    maps = [XiMap.build(InverseLinear(1.0), 0.0, 1.0)]
    for meth in ("auto", "numpy"):
        with pytest.raises(ValueError):
            solve_prefix(maps, 0.0, method=meth)


@pytest.mark.parametrize("method", ["auto", "numpy", "bisect"])
def test_bracket_failure(method):
    # h^-1(s) = -ln s never falls below about -709 before s overflows
    maps = [XiMap.build(ScaledExp(1.0), -INF, INF)]
    with pytest.raises(BracketFailure):
        solve_prefix(maps, -1000.0, method=method)


def test_custom_terms_use_generic_route():
    maps = [XiMap.build(quadratic(1.0, 2.0), 0.0, 2.0),
            XiMap.build(shifted_exp(1.0, 0.0, -1), -1.0, 3.0),
            XiMap.build(ScaledExp(2.0), -1.0, 1.0)]
    bank = TermBank(maps)
    assert not bank.compiled
    s = bank.solve(0, 3, 1.5)
    assert prefix_c(maps, s) == pytest.approx(1.5, abs=1e-9)
    assert bank.solve(0, 3, 1.5, method="bisect") == pytest.approx(s, rel=1e-8)


def test_tiny_inverse_reported_as_zero():
    m = XiMap.build(InverseLinear(1.0), 0.0, 1.0)
    assert xi(m, INF) == 0.0
    # h^-1(s) is about 1/s here, below the 1e-300 floor
    assert xi(XiMap.build(LogInvSnr(1.0), 0.0, INF), 1e305) == 0.0
    assert xi(XiMap.build(LogInvSnr(1.0), 0.0, INF), 1e290) > 0.0


def test_bank_windows_and_cumulative():
    maps = golden_maps()
    bank = TermBank(maps)
    np.testing.assert_allclose(bank.xi(4.451, 0, 2), [xi(m, 4.451) for m in maps[:2]])
    np.testing.assert_allclose(bank.cumulative(2.307),
                               np.cumsum([xi(m, 2.307) for m in maps]))
    assert bank.total(2.307, 2, 4) == pytest.approx(xi(maps[2], 2.307) + xi(maps[3], 2.307))


def test_neglog_closed_form_matches_bisection():
    rng = np.random.default_rng(21)
    for _ in range(100):
        maps = _random_window(rng, ("NegLogCapacity",), int(rng.integers(1, 20)))
        gamma = _target(rng, maps)
        bank = TermBank(maps)
        closed = bank.solve(0, bank.n, gamma, method="numpy")
        ref = bank.solve(0, bank.n, gamma, method="bisect")
        assert abs(closed - ref) <= 1e-8 * (1 + ref)
        assert isinstance(maps[0].term, NegLogCapacity)
