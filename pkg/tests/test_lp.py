from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from boostlab import lp


def test_textbook_lp():
    # max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
    res = lp.solve([3, 5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18])
    assert res.objective == 36
    assert res.x == [2, 6]
    assert res.duals_ub == [0, Fraction(3, 2), 1]


def test_negative_rhs_needs_phase_one():
    # max -x - y  with x + y >= 2  (written as -x - y <= -2)
    res = lp.solve([-1, -1], A_ub=[[-1, -1]], b_ub=[-2])
    assert res.objective == -2


def test_equalities_with_redundant_row():
    res = lp.solve([1, 1], A_eq=[[1, 1], [2, 2]], b_eq=[1, 2])
    assert res.objective == 1


def test_infeasible_and_unbounded():
    with pytest.raises(lp.Infeasible):
        lp.solve([1], A_ub=[[1]], b_ub=[-1])
    with pytest.raises(lp.Unbounded):
        lp.solve([1, 0], A_ub=[[-1, 1]], b_ub=[1])


def test_degenerate_cycling_example_terminates():
    # Beale's example cycles under the largest-coefficient rule
    c = [Fraction(3, 4), -150, Fraction(1, 50), -6]
    A = [
        [Fraction(1, 4), -60, Fraction(-1, 25), 9],
        [Fraction(1, 2), -90, Fraction(-1, 50), 3],
        [0, 0, 1, 0],
    ]
    res = lp.solve(c, A_ub=A, b_ub=[0, 0, 1])
    assert res.objective == Fraction(1, 20)


def test_zero_sum_games():
    rps = [[0, -1, 1], [1, 0, -1], [-1, 1, 0]]
    g = lp.solve_zero_sum(rps)
    assert g.value == 0
    assert g.row_strategy == [Fraction(1, 3)] * 3
    assert g.col_strategy == [Fraction(1, 3)] * 3
    pennies = [[1, -1], [-1, 1]]
    assert lp.solve_zero_sum(pennies).value == 0
    assert lp.solve_zero_sum([[2, 3], [1, 5]]).value == 2  # saddle point


def test_random_lps_against_highs():
    rng = np.random.default_rng(0)
    for _ in range(60):
        n, k = rng.integers(1, 6), rng.integers(1, 6)
        A = rng.integers(-5, 6, size=(k, n))
        b = rng.integers(-3, 10, size=k)
        c = rng.integers(-5, 6, size=n)
        ref = linprog(-c, A_ub=A, b_ub=b, bounds=[(0, None)] * n, method="highs")
        try:
            res = lp.solve(c.tolist(), A_ub=A.tolist(), b_ub=b.tolist())
        except lp.Infeasible:
            assert ref.status == 2
            continue
        except lp.Unbounded:
            assert ref.status == 3
            continue
        assert ref.status == 0
        assert float(res.objective) == pytest.approx(-ref.fun, abs=1e-7)
        # exact primal feasibility and strong duality
        for row, bi in zip(A.tolist(), b.tolist()):
            assert sum(Fraction(a) * x for a, x in zip(row, res.x)) <= bi
        assert all(y >= 0 for y in res.duals_ub)
        assert sum(y * bi for y, bi in zip(res.duals_ub, b.tolist())) == res.objective


def test_random_games_duality_exact():
    rng = np.random.default_rng(1)
    for _ in range(40):
        M = rng.integers(-4, 5, size=(rng.integers(1, 7), rng.integers(1, 7))).tolist()
        g = lp.solve_zero_sum(M)
        assert sum(g.row_strategy) == 1 and sum(g.col_strategy) == 1
        # the row mixture guarantees the value against every column and the
        # column mixture holds every row to it
        for j in range(len(M[0])):
            assert sum(q * M[i][j] for i, q in enumerate(g.row_strategy)) >= g.value
        for i in range(len(M)):
            assert sum(p * M[i][j] for j, p in enumerate(g.col_strategy)) <= g.value
