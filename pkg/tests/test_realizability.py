from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from boostlab.base_classes import DecisionStumps, FiniteClass, Halfspaces, Thresholds1D
from boostlab.core import ContractError, LabeledSample, uniform
from boostlab.realizability import (
    NOT_REALIZABLE,
    REALIZABLE,
    RealizabilityCertificate,
    certificate_listener,
    gamma_star,
    hull_contains,
    hull_gamma_star,
    is_gamma_realizable,
    verify_certificate,
)

from conftest import alternating


def highs_game_value(sample, cls):
    """Float value of max_q min_i y_i sum_b q_b b_i via HiGHS."""
    pats = np.array([p for p, _ in cls.enumerate_restrictions(sample)], dtype=float)
    y = np.array(sample.labels, dtype=float)
    N, m = pats.shape
    # variables q_1..q_N, v ; maximize v
    c = np.zeros(N + 1)
    c[-1] = -1
    A_ub = np.hstack([-(pats * y).T, np.ones((m, 1))])
    A_eq = np.hstack([np.ones((1, N)), np.zeros((1, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(m), A_eq=A_eq, b_eq=[1],
                  bounds=[(0, None)] * N + [(None, None)], method="highs")
    assert res.status == 0
    return -res.fun


# values frozen from a dense threshold sweep plus HiGHS, computed outside the package
ALTERNATING_GAMMA = {1: 1, 2: 1, 3: Fraction(1, 3), 4: Fraction(1, 3), 5: Fraction(1, 5),
                     6: Fraction(1, 5), 7: Fraction(1, 7), 8: Fraction(1, 7)}


@pytest.mark.parametrize("m", sorted(ALTERNATING_GAMMA))
def test_alternating_thresholds_frozen(m):
    g, cert = gamma_star(alternating(m), Thresholds1D())
    assert g == ALTERNATING_GAMMA[m]
    assert verify_certificate(alternating(m), Thresholds1D(), cert)


def test_xor_and_grid_minimum_frozen():
    xor = LabeledSample([(0, 0), (0, 1), (1, 0), (1, 1)], [1, -1, -1, 1])
    assert gamma_star(xor, Halfspaces(2))[0] == Fraction(1, 2)
    grid = [(a, b) for a in range(3) for b in range(3)]
    worst = LabeledSample(grid, [1, -1, 1, -1, -1, -1, 1, -1, 1])
    assert gamma_star(worst, Halfspaces(2))[0] == Fraction(3, 13)


def test_consistent_hypothesis_gives_one():
    s = LabeledSample([0, 1, 2, 3], [-1, -1, 1, 1])
    g, cert = gamma_star(s, Thresholds1D())
    assert g == 1
    assert len(cert.mixture) == 1


def test_query_below_and_above_gamma_star():
    s = alternating(3)
    yes = is_gamma_realizable(s, Thresholds1D(), "1/3")
    assert yes.verdict == REALIZABLE and verify_certificate(s, Thresholds1D(), yes)
    no = is_gamma_realizable(s, Thresholds1D(), "34/100")
    assert no.verdict == NOT_REALIZABLE and verify_certificate(s, Thresholds1D(), no)
    # uniform weights already defeat every threshold beyond 1/3
    manual = RealizabilityCertificate(NOT_REALIZABLE, Fraction(34, 100), Fraction(1, 3), adversary=uniform(3))
    assert verify_certificate(s, Thresholds1D(), manual)
    with pytest.raises(ContractError):
        is_gamma_realizable(s, Thresholds1D(), 0)


def test_tampered_certificates_fail():
    s = alternating(5)
    _, cert = gamma_star(s, Thresholds1D())
    bumped = replace(cert, gamma=cert.gamma + Fraction(1, 100), gamma_star=cert.gamma_star + Fraction(1, 100))
    assert not verify_certificate(s, Thresholds1D(), bumped)
    bad_adv = replace(cert, adversary=(Fraction(1, 2),) * 5)  # sums to 5/2
    assert not verify_certificate(s, Thresholds1D(), bad_adv)
    skew = replace(cert, adversary=(1, 0, 0, 0, 0))
    with pytest.raises(ContractError):
        verify_certificate(s, Thresholds1D(), skew)  # ints, not rationals
    skew = replace(cert, adversary=(Fraction(1),) + (Fraction(0),) * 4)
    assert not verify_certificate(s, Thresholds1D(), skew)
    h, w = cert.mixture[0]
    foreign = replace(cert, mixture=((replace(h, kind="stump", axis=5), Fraction(1)),))
    assert not verify_certificate(s, Thresholds1D(), foreign)
    with pytest.raises(ContractError):
        verify_certificate(s, Thresholds1D(), replace(cert, mixture=None))


def test_certificate_json_round_trip():
    s = alternating(4)
    _, cert = gamma_star(s, Thresholds1D())
    again = RealizabilityCertificate.from_json(__import__("json").loads(cert.dumps()))
    assert again == cert
    with pytest.raises(ContractError):
        RealizabilityCertificate.from_json({"verdict": "realizable"})


def test_listener_sees_every_certificate():
    seen = []
    with certificate_listener(lambda s, c, cert: seen.append(cert.gamma_star)):
        gamma_star(alternating(3), Thresholds1D())
        is_gamma_realizable(alternating(4), Thresholds1D(), "1/4")
    assert seen == [Fraction(1, 3), Fraction(1, 3)]
    gamma_star(alternating(3), Thresholds1D())
    assert len(seen) == 2


def test_finite_class_example():
    fc = FiniteClass([(1, 1, -1), (1, -1, 1), (-1, 1, 1)])
    s = LabeledSample([0, 1, 2], [1, 1, 1])
    # the uniform mixture gives margin 1/3 everywhere
    assert gamma_star(s, fc)[0] == Fraction(1, 3)
    assert hull_gamma_star(s, fc) == Fraction(1, 3)


labeled_grid = st.lists(
    st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=1, max_size=6, unique=True
).flatmap(lambda pts: st.tuples(st.just(pts), st.lists(st.sampled_from([1, -1]), min_size=len(pts), max_size=len(pts))))


@settings(max_examples=40, deadline=None)
@given(labeled_grid, st.sampled_from(["stumps", "halfspaces"]))
def test_game_matches_highs_and_bounds_hull(data, kind):
    pts, labels = data
    s = LabeledSample(pts, labels)
    cls = DecisionStumps(2) if kind == "stumps" else Halfspaces(2)
    g, cert = gamma_star(s, cls)
    h = hull_gamma_star(s, cls)
    assert h <= g
    assert float(g) == pytest.approx(highs_game_value(s, cls), abs=1e-9)
    assert verify_certificate(s, cls, cert)
    if h > 0:
        assert hull_contains(s, cls, h)
    assert not hull_contains(s, cls, g + Fraction(1, 1000))


def test_hull_value_can_be_strictly_below_gamma_star():
    s = LabeledSample([(0, 0), (0, 1), (1, 0), (1, 1)], [1, 1, 1, -1])
    cls = DecisionStumps(2)
    assert gamma_star(s, cls)[0] == Fraction(1, 3)
    assert hull_gamma_star(s, cls) == 0
    assert not hull_contains(s, cls, Fraction(1, 100))
    # every stump pattern satisfies b1 + b4 == b2 + b3, which y violates
    for pat, _ in cls.enumerate_restrictions(s):
        assert pat[0] + pat[3] == pat[1] + pat[2]
    # halfspaces on the same sample have no such relation and the two values meet
    assert gamma_star(s, Halfspaces(2))[0] == hull_gamma_star(s, Halfspaces(2))


@settings(max_examples=30, deadline=None)
@given(labeled_grid)
def test_gamma_star_monotone_under_supersets(data):
    # stumps are contained in halfspaces, so the edge can only grow
    pts, labels = data
    s = LabeledSample(pts, labels)
    assert gamma_star(s, DecisionStumps(2))[0] <= gamma_star(s, Halfspaces(2))[0]


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([1, -1]), min_size=2, max_size=8))
def test_dropping_points_cannot_lower_gamma_star(labels):
    s = LabeledSample(list(range(len(labels))), labels)
    sub = LabeledSample(list(range(len(labels) - 1)), labels[:-1])
    assert gamma_star(sub, Thresholds1D())[0] >= gamma_star(s, Thresholds1D())[0]
