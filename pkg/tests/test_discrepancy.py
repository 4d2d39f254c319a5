import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostlab.base_classes import DecisionStumps, Halfspaces, Thresholds1D
from boostlab.core import ContractError, LabeledSample
from boostlab.discrepancy import (
    SetSystem,
    branch_and_bound_min_disc,
    check_identity_eq4,
    coloring_to_gamma_bound,
    exhaustive_min_disc,
    min_discrepancy_coloring,
    min_uniform_edge,
    normalized_system_disc,
    set_disc,
    system_disc,
    uniform_edge,
    weighted_disc,
)
from boostlab.realizability import gamma_star


def brute_disc(n, sets):
    return min(
        max((abs(sum(c[i] for i in s)) for s in sets), default=0)
        for c in itertools.product((1, -1), repeat=n)
    )


def random_system(r, n, k):
    return SetSystem(n, [[i for i in range(n) if r.random() < 0.5] for _ in range(k)])


def test_disc_examples():
    sys3 = SetSystem(3, [[0, 1], [1, 2], [0, 2]])
    assert set_disc((1, -1, 1), [0, 2]) == 2
    assert system_disc((1, -1, 1), sys3) == 2
    assert min_discrepancy_coloring(sys3)[1] == 2  # odd cycle: some pair shares a color
    assert normalized_system_disc((1, -1, 1), sys3) == Fraction(2, 3)
    assert system_disc((), SetSystem(0, [])) == 0
    with pytest.raises(ContractError):
        system_disc((1, 1), sys3)
    with pytest.raises(ContractError):
        SetSystem(2, [[0, 2]])


def test_weighted_disc_and_identity_example():
    p = (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))
    c = (1, -1, 1)
    b = (1, 1, -1)
    assert weighted_disc(None, p, c, b) == Fraction(1, 4)
    assert weighted_disc(None, p, c, (-1, -1, 1)) == Fraction(1, 4)
    assert check_identity_eq4(None, p, c, b)
    with pytest.raises(ContractError):
        weighted_disc(LabeledSample([0, 1], [1, 1]), p, c, b)


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 10).flatmap(lambda m: st.tuples(
    st.lists(st.integers(0, 20), min_size=m, max_size=m).filter(any),
    st.lists(st.sampled_from([1, -1]), min_size=m, max_size=m),
    st.lists(st.sampled_from([1, -1]), min_size=m, max_size=m),
)))
def test_identity_holds_for_random_instances(case):
    w, c, b = case
    p = [Fraction(x, sum(w)) for x in w]
    assert check_identity_eq4(None, p, c, b)
    # disc(c; b) + disc(c; -b) is the total signed weight
    assert weighted_disc(None, p, c, b) + weighted_disc(None, p, c, [-x for x in b]) == sum(
        pi * ci for pi, ci in zip(p, c)
    )


def test_searches_agree_with_brute_force():
    r = random.Random(11)
    for _ in range(200):
        n = r.randint(1, 9)
        system = random_system(r, n, r.randint(0, 6))
        truth = brute_disc(n, system.sets)
        c1, v1 = exhaustive_min_disc(system)
        c2, v2 = branch_and_bound_min_disc(system)
        assert v1 == v2 == truth
        assert system_disc(c1, system) == v1 and system_disc(c2, system) == v2
        assert c1[0] == 1 and c2[0] == 1


def test_branch_and_bound_beyond_exhaustive_range():
    r = random.Random(3)
    system = random_system(r, 26, 8)
    c, v = min_discrepancy_coloring(system)
    assert system_disc(c, system) == v
    # every nonempty odd set forces at least 1
    if any(len(s) % 2 for s in system.sets):
        assert v >= 1
    with pytest.raises(ContractError):
        exhaustive_min_disc(system)
    with pytest.raises(ContractError):
        min_discrepancy_coloring(system, "magic")


@pytest.mark.parametrize("n", range(1, 13))
def test_thresholds_have_discrepancy_one(n):
    system = SetSystem.from_class(Thresholds1D(), [(i,) for i in range(n)])
    c, v = min_discrepancy_coloring(system)
    assert v == 1
    alt = tuple(1 if i % 2 == 0 else -1 for i in range(n))
    assert system_disc(alt, system) == 1


def test_set_system_csv_round_trip(tmp_path):
    system = SetSystem(4, [[0, 1], [], [3, 2]])
    path = tmp_path / "s.csv"
    path.write_text(system.to_csv())
    assert SetSystem.from_csv(path) == system
    path.write_text("0,1\n")
    with pytest.raises(ContractError):
        SetSystem.from_csv(path)
    path.write_text("n=3\n0,x\n")
    with pytest.raises(ContractError):
        SetSystem.from_csv(path)


def test_from_patterns_uses_supports():
    system = SetSystem.from_patterns([(1, -1, 1), (-1, -1, -1)])
    assert system.sets == ((), (0, 2))
    assert system.incidence().tolist() == [[0, 0, 0], [1, 0, 1]]


def test_uniform_edge_examples_on_a_line():
    pts = [(i,) for i in range(4)]
    alt = (1, -1, 1, -1)
    assert uniform_edge(Thresholds1D(), pts, alt) == Fraction(1, 2)
    assert coloring_to_gamma_bound(Thresholds1D(), pts, alt) == Fraction(1, 2)
    assert coloring_to_gamma_bound(Thresholds1D(), pts, (1, 1, 1, 1)) == 1
    c, v = min_uniform_edge(Thresholds1D(), pts)
    assert v == Fraction(1, 2)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), min_size=2, max_size=6, unique=True), st.data())
def test_edge_bounds_chain(points, data):
    c = tuple(data.draw(st.lists(st.sampled_from([1, -1]), min_size=len(points), max_size=len(points))))
    for cls in (DecisionStumps(2), Halfspaces(2)):
        g, _ = gamma_star(LabeledSample(points, c), cls)
        # gamma* <= edge against uniform weights <= the discrepancy bound
        assert g <= uniform_edge(cls, points, c) <= coloring_to_gamma_bound(cls, points, c)
        system = SetSystem.from_class(cls, points)
        assert coloring_to_gamma_bound(cls, points, c) <= Fraction(2 * system_disc(c, system), len(points))
