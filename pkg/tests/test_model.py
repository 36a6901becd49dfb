import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from waterladder import (Custom, DomainError, InvalidProblem, InverseLinear, Problem, ScaledExp,
                         Sense, Solution, check_feasibility, flip_sense, make_problem, solve)
from waterladder.model import solution_to_original
from waterladder.oracle import GridSpec, grid_solve

INF = math.inf


def golden():
    return make_problem([ScaledExp(w) for w in (2, 5, 8, 0.5)], [-INF] * 4,
                        [0.4, -1.2, 2, -1.8], [0.2, -2, 1.1, -1.9])


def test_feasibility_examples():
    assert check_feasibility(golden())
    r = check_feasibility(make_problem([ScaledExp(1)] * 2, [0, 0], [1, 1], {2: -1}))
    assert not r and r.witness == 2
    assert check_feasibility(make_problem([ScaledExp(1)] * 3, [1, 1, 1], [2, 2, 2], {3: 3}))


def test_feasibility_ge():
    p = make_problem([ScaledExp(1)] * 2, [0, 0], [1, 1], {1: 0.5, 2: 2.5}, "ge")
    r = check_feasibility(p)
    assert not r and r.witness == 2
    assert check_feasibility(make_problem([ScaledExp(1)] * 2, [0, 0], [1, 1], {2: 2}, "ge"))


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.lists(st.floats(-5, 5), min_size=3, max_size=3),
       st.integers(0, 2), st.floats(0, 3))
@settings(max_examples=100, deadline=None)
def test_feasibility_is_monotone(lower, rho, k, bump):
    terms = [ScaledExp(1.0)] * 3
    upper = [v + 1 for v in lower]
    p = make_problem(terms, lower, upper, rho)
    if not check_feasibility(p):
        return
    more_rho = list(rho)
    more_rho[k] += bump
    assert check_feasibility(make_problem(terms, lower, upper, more_rho))
    less_l = list(lower)
    less_l[k] -= bump
    assert check_feasibility(make_problem(terms, less_l, upper, rho))


def test_structural_validation():
    t = [ScaledExp(1.0)]
    with pytest.raises(InvalidProblem):
        make_problem(t, [1.0], [1.0], {1: 1})
    with pytest.raises(InvalidProblem):
        make_problem(t, [0.0], [1.0], {2: 1})
    with pytest.raises(InvalidProblem):
        make_problem(t, [0.0], [1.0], {1: INF})
    with pytest.raises(InvalidProblem):
        make_problem(t, [math.nan], [1.0], {1: 0})
    with pytest.raises(InvalidProblem):
        make_problem([InverseLinear(1.0)], [-1.0], [1.0], {1: 0})
    with pytest.raises(InvalidProblem):
        make_problem(t, [0.0, 0.0], [1.0, 1.0], {1: 0})
    with pytest.raises(InvalidProblem):
        make_problem([], [], [], {})


def test_problem_is_immutable():
    p = golden()
    with pytest.raises(ValueError):
        p.lower[0] = 0.0
    with pytest.raises(AttributeError):
        p.rho = {}
    assert list(p.rho) == [1, 2, 3, 4]
    assert p.n == 4
    assert p.constraint_indices == [1, 2, 3, 4]


def test_rho_is_sorted():
    p = make_problem([ScaledExp(1.0)] * 3, [0] * 3, [1] * 3, {3: 2.0, 1: 0.5})
    assert list(p.rho) == [1, 3]


def test_flip_sense_example():
    p = make_problem([ScaledExp(1.0)], [0.0], [5.0], {1: 2.0}, "ge")
    q, vmap = flip_sense(p)
    assert q.sense is Sense.LE
    assert list(q.lower) == [-5.0] and list(q.upper) == [0.0]
    assert q.rho == {1: -2.0}
    np.testing.assert_array_equal(vmap.to_original([1.5]), [-1.5])


def test_flip_twice_is_bit_identical():
    p = golden()
    r, _ = flip_sense(flip_sense(p)[0])
    assert r.sense is p.sense
    assert all(a is b for a, b in zip(r.terms, p.terms))
    assert r.lower.tobytes() == p.lower.tobytes()
    assert r.upper.tobytes() == p.upper.tobytes()
    assert r.rho == p.rho


def test_flip_preserves_values():
    p = golden()
    q, _ = flip_sense(p)
    rng = np.random.default_rng(0)
    for x in rng.uniform(-3, 3, (20, 4)):
        for t, g, v in zip(p.terms, q.terms, x):
            assert g.value(-v) == pytest.approx(t.value(v), rel=1e-12)


def test_flip_needs_derivative():
    p = make_problem([Custom(lambda x: x * x, None)], [0.0], [1.0], {1: 0.5})
    with pytest.raises(DomainError):
        flip_sense(p)


def test_ge_two_variables_against_oracle():
    p = make_problem([ScaledExp(1.0), ScaledExp(3.0)], [-2, -2], [5, 5], {1: 1.0, 2: 10.0}, "ge")
    s = solve(p)
    np.testing.assert_allclose(s.x, [5.0, 5.0])
    g = grid_solve(p, GridSpec(201))
    assert p.objective(s.x) <= g.value + g.tolerance


def test_solution_is_frozen_and_maps_back():
    s = Solution([1.0, 2.0], [3.0, 1.0], [0.5, 0.0], [0.0, 0.25])
    with pytest.raises(ValueError):
        s.x[0] = 0.0
    o = solution_to_original(s, flip_sense(golden())[1])
    np.testing.assert_array_equal(o.x, [-1.0, -2.0])
    np.testing.assert_array_equal(o.nu, s.kappa)
    np.testing.assert_array_equal(o.kappa, s.nu)


def test_objective_and_prefix():
    p = golden()
    x = [-0.8, -1.2, 1.9, -1.8]
    assert p.objective(x) == pytest.approx(sum(w * math.exp(-v) for w, v in
                                               zip((2, 5, 8, 0.5), x)))
    np.testing.assert_allclose(p.prefix_sums(x), [-0.8, -2.0, -0.1, -1.9])


def test_problem_constructor_accepts_lists():
    p = Problem((ScaledExp(1.0),), [0], [1], {1: 0.5})
    assert p.sense is Sense.LE and p.lower.dtype == float
