import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from boostlab.base_classes import Halfspaces, Thresholds1D, vc_dimension
from boostlab.core import ContractError, LabeledSample
from boostlab.gamma_vc import (
    binary_entropy,
    classical_vc_lower_estimate,
    composition_constant,
    composition_vc_check,
    gamma_shatter_check,
    gamma_vc_lower_estimate,
    gamma_vc_upper_formula,
    hadamard_class,
    hadamard_rows,
    labelings_up_to_negation,
    majority,
    sauer_check,
    sylvester,
    verify_orthogonal_advantage,
)
from boostlab.realizability import gamma_star


def highs_abs_game(vectors):
    """min_p max_i |<v_i, p>| as a float LP."""
    V = np.array(vectors, dtype=float)
    k, t = V.shape
    c = np.r_[np.zeros(t), 1.0]
    A = np.vstack([np.c_[V, -np.ones(k)], np.c_[-V, -np.ones(k)]])
    res = linprog(c, A_ub=A, b_ub=np.zeros(2 * k), A_eq=[np.r_[np.ones(t), 0.0]], b_eq=[1],
                  bounds=[(0, None)] * t + [(None, None)], method="highs")
    return res.fun


# worst gamma* over labelings of n equally spaced points (HiGHS + threshold sweep)
WORST_THRESHOLDS = [1, 1, Fraction(1, 3), Fraction(1, 3), Fraction(1, 5), Fraction(1, 5), Fraction(1, 7)]


@pytest.mark.parametrize("n", range(1, 8))
def test_worst_labeling_for_thresholds(n):
    rep = gamma_shatter_check(Thresholds1D(), list(range(n)), Fraction(1, n))
    assert rep.worst_gamma_star == WORST_THRESHOLDS[n - 1]
    assert rep.all_realizable
    assert rep.labelings_checked == 2 ** (n - 1)
    assert gamma_star(LabeledSample(list(range(n)), rep.worst_labeling), Thresholds1D())[0] == rep.worst_gamma_star


def test_even_worst_labeling_is_not_alternating():
    rep = gamma_shatter_check(Thresholds1D(), list(range(4)), Fraction(1, 4))
    assert rep.worst_labeling != (1, -1, 1, -1)
    assert gamma_star(LabeledSample(range(4), (1, -1, 1, -1)), Thresholds1D())[0] == Fraction(1, 3)


def test_shatter_stop_at_failure_and_guards():
    rep = gamma_shatter_check(Thresholds1D(), list(range(5)), Fraction(1, 2), stop_at_failure=True)
    assert not rep.all_realizable and not rep.complete
    assert rep.labelings_checked < 16
    with pytest.raises(ContractError):
        gamma_shatter_check(Thresholds1D(), list(range(13)), Fraction(1, 2))
    with pytest.raises(ContractError):
        gamma_shatter_check(Thresholds1D(), [0], 0)
    full = gamma_shatter_check(Halfspaces(2), [(0, 0), (1, 0), (0, 1)], 1, verify=True)
    assert full.all_realizable  # three points in general position are shattered
    assert full.to_json()["all_realizable"] is True


def test_labelings_up_to_negation():
    labs = list(labelings_up_to_negation(3))
    assert len(labs) == 4 and all(lab[0] == 1 for lab in labs)
    every = set(labs) | {tuple(-v for v in lab) for lab in labs}
    assert every == set(itertools.product((1, -1), repeat=3))


def test_lower_estimates():
    est = gamma_vc_lower_estimate(Thresholds1D(), lambda n: [list(range(n))], Fraction(1, 3))
    # 4 points reach 1/3, 5 points do not
    assert est.value == 4 and not est.budget_exhausted
    est = gamma_vc_lower_estimate(Thresholds1D(), lambda n: [list(range(n))], Fraction(1, 3), budget=2)
    assert est.budget_exhausted and est.value == 2
    sets = [list(range(n)) for n in range(1, 6)]
    assert gamma_vc_lower_estimate(Thresholds1D(), sets, 1).value == 2
    assert classical_vc_lower_estimate(Thresholds1D(), sets) == 2


# --- Hadamard -------------------------------------------------------------------


def test_sylvester_orthogonal_and_flip():
    for t in (1, 2, 4, 8, 16):
        H = sylvester(t)
        assert np.array_equal(H @ H.T, t * np.eye(t, dtype=np.int64))
    rows = hadamard_rows(4)
    assert all(r[0] == -s[0] for r, s in zip(rows, sylvester(4).tolist()))
    with pytest.raises(ContractError):
        sylvester(6)


@pytest.mark.parametrize("t,expected", [(2, 1), (4, Fraction(1, 2)), (8, Fraction(2, 5))])
def test_orthogonal_advantage(t, expected):
    v = verify_orthogonal_advantage(hadamard_rows(t))
    assert v == expected
    assert v * v >= Fraction(1, t)
    assert float(v) == pytest.approx(highs_abs_game(hadamard_rows(t)), abs=1e-9)


def test_orthogonal_advantage_unflipped_and_random_signs():
    assert verify_orthogonal_advantage(sylvester(4).tolist()) == 1  # constant first row
    r = random.Random(0)
    for t in (4, 8):
        H = sylvester(t) * np.array([r.choice((1, -1)) for _ in range(t)])
        v = verify_orthogonal_advantage(H.tolist())
        assert v * v >= Fraction(1, t)
    with pytest.raises(ContractError):
        verify_orthogonal_advantage([(1, 1), (1, 1)])


@pytest.mark.parametrize("t,s,worst", [(2, 1, 1), (2, 2, 1), (4, 1, Fraction(1, 2)), (4, 2, Fraction(1, 2))])
def test_hadamard_class_gamma(t, s, worst):
    cls = hadamard_class(t, s)
    rep = gamma_shatter_check(cls, list(range(t * s)), Fraction(1, t), stop_at_failure=False)
    assert rep.worst_gamma_star == worst
    assert rep.worst_gamma_star ** 2 >= Fraction(1, t)
    with pytest.raises(ContractError):
        hadamard_class(3, 1)


# --- composition ---------------------------------------------------------------------


def brute_composed_vc(classes, g):
    pats = {tuple(g(tuple(b[j] for b in combo)) for j in range(len(classes[0][0])))
            for combo in itertools.product(*classes)}
    return vc_dimension(pats)


def test_composition_constant_values():
    for T in range(1, 8):
        c = composition_constant(T)
        x = 1 / (T * c)
        assert x < 0.5
        assert binary_entropy(x) == pytest.approx(1 / (T + 1), abs=1e-12)
    assert composition_constant(1) == pytest.approx(9.0886, abs=1e-4)
    assert composition_constant(2) == pytest.approx(8.1313, abs=1e-4)
    assert composition_constant(3) == pytest.approx(7.9950, abs=1e-4)
    with pytest.raises(ContractError):
        composition_constant(0)


def test_composition_examples():
    thr = [tuple(1 if i >= t else -1 for i in range(4)) for t in range(5)]
    thr = sorted(set(thr) | {tuple(-v for v in p) for p in thr})
    for table in itertools.product((-1, 1), repeat=4):
        d, bound = composition_vc_check([thr, thr], [table])
        g = dict(zip(itertools.product((-1, 1), repeat=2), table))
        assert d == brute_composed_vc([thr, thr], g.__getitem__)
        assert d <= bound
    d, bound = composition_vc_check([thr], [lambda b: b[0]])
    assert d == 2
    d, bound = composition_vc_check([thr, thr, thr], [majority])
    assert d == brute_composed_vc([thr, thr, thr], majority)
    assert d <= bound


def test_composition_with_several_g():
    r = random.Random(5)
    n = 5
    B = [tuple(r.choice((1, -1)) for _ in range(n)) for _ in range(4)]
    G = [lambda b: b[0] * b[1], lambda b: max(b), lambda b: min(b)]
    d, bound = composition_vc_check([B, B], G)
    pats = set()
    for g in G:
        for b1, b2 in itertools.product(B, B):
            pats.add(tuple(g((b1[j], b2[j])) for j in range(n)))
    assert d == vc_dimension(pats) <= bound


def test_composition_input_errors():
    with pytest.raises(ContractError):
        composition_vc_check([], [majority])
    with pytest.raises(ContractError):
        composition_vc_check([[(1, -1)], [(1,)]], [majority])
    with pytest.raises(ContractError):
        composition_vc_check([[(1, -1)]], [(1, 1, 1)])


def test_upper_formula_and_sauer():
    assert gamma_vc_upper_formula(1, 1) == 64.0
    assert gamma_vc_upper_formula(3, 0.5) == pytest.approx(64 * 3 / 0.25 * math.log(6))
    assert sauer_check([(1, -1, 1), (-1, 1, 1), (1, 1, 1)])
