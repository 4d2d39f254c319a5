import itertools
import random
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boostlab.base_classes import (
    DecisionStumps,
    FiniteClass,
    Halfspaces,
    HypothesisDesc,
    Thresholds1D,
    dual_vc_dimension,
    evaluate,
    integer_rank,
    make_class,
    sauer_bound,
    span_rank,
    vc_dimension,
)
from boostlab.core import ContractError


def sweep_oracle(points, axes, lo=-2.0, hi=6.0, steps=801):
    """Patterns of sign(s (x_axis - t)) over a fine grid of t and both signs."""
    pats = set()
    for ax in axes:
        for t in np.linspace(lo, hi, steps):
            for s in (1, -1):
                pats.add(tuple(1 if s * (float(p[ax]) - t) >= 0 else -1 for p in points))
    return pats


def direction_oracle(points, k=20000, seed=0):
    """Halfspace patterns seen along many random directions (may miss some, never invents)."""
    rng = np.random.default_rng(seed)
    X = np.array(points, dtype=float)
    proj = X @ rng.normal(size=(X.shape[1], k))
    pats = set()
    for j in range(k):
        v = np.sort(proj[:, j])
        for c in np.concatenate([[v[0] - 1], (v[1:] + v[:-1]) / 2, [v[-1] + 1]]):
            pat = tuple(np.where(proj[:, j] >= c, 1, -1))
            pats.add(pat)
            pats.add(tuple(-x for x in pat))
    return pats


def patterns(cls, points):
    return {p for p, _ in cls.enumerate_restrictions(points)}


# --- evaluation --------------------------------------------------------------


def test_evaluate_examples():
    stump = HypothesisDesc("stump", sign=1, axis=0, threshold=Fraction(1, 2))
    assert evaluate(stump, (1,)) == 1
    assert evaluate(stump, (0,)) == -1
    hs = HypothesisDesc("halfspace", normal=(1, -1), offset=0)
    assert evaluate(hs, (2, 2)) == 1  # boundary counts as +1


def test_evaluate_dimension_mismatch():
    hs = HypothesisDesc("halfspace", normal=(1, -1), offset=0)
    with pytest.raises(ContractError):
        evaluate(hs, (1,))
    with pytest.raises(ContractError):
        evaluate(HypothesisDesc("stump", axis=3, threshold=0), (1, 2))


def test_desc_json_round_trip():
    for h in [
        HypothesisDesc("threshold", sign=-1, threshold=Fraction(5, 2)),
        HypothesisDesc("stump", sign=1, axis=1, threshold=Fraction(-1, 3)),
        HypothesisDesc("halfspace", normal=(Fraction(1, 2), 3), offset=Fraction(-7, 4)),
        HypothesisDesc("finite", index=2, values=(1, -1, 1)),
    ]:
        assert HypothesisDesc.from_json(h.to_json()) == h


# --- enumeration -------------------------------------------------------------


def test_thresholds_on_three_points():
    got = patterns(Thresholds1D(), [(0,), (1,), (2,)])
    assert got == sweep_oracle([(0,), (1,), (2,)], [0])
    assert len(got) == 6


@pytest.mark.parametrize("m", [1, 2, 5, 9])
def test_thresholds_count_matches_sweep(m):
    pts = [(i,) for i in range(m)]
    got = patterns(Thresholds1D(), pts)
    assert got == sweep_oracle(pts, [0], hi=m + 2)
    assert len(got) == 2 * m


def test_stumps_on_grids_match_sweep():
    g2 = [(a, b) for a in range(2) for b in range(2)]
    g3 = [(a, b) for a in range(3) for b in range(3)]
    assert patterns(DecisionStumps(2), g2) == sweep_oracle(g2, [0, 1])
    assert len(patterns(DecisionStumps(2), g2)) == 6
    assert patterns(DecisionStumps(2), g3) == sweep_oracle(g3, [0, 1])
    assert len(patterns(DecisionStumps(2), g3)) == 10


def test_halfspaces_on_three_by_three_grid():
    g3 = [(a, b) for a in range(3) for b in range(3)]
    got = patterns(Halfspaces(2), g3)
    oracle = direction_oracle(g3)
    assert oracle <= got
    assert len(got) == 58 == len(oracle)


def test_halfspace_counts_in_general_position():
    # n generic points in R^d realize 2 * sum_{i<=d} C(n-1, i) dichotomies
    r = random.Random(2)
    for d, n in [(1, 5), (2, 4), (2, 6), (3, 5), (3, 6)]:
        pts = [tuple(r.randint(-10**6, 10**6) for _ in range(d)) for _ in range(n)]
        got = patterns(Halfspaces(d), pts)
        assert len(got) == 2 * sum(comb(n - 1, i) for i in range(d + 1))
        assert direction_oracle(pts, k=4000) <= got


def test_halfspaces_degenerate_collinear_points():
    pts = [(0, 0), (1, 1), (2, 2), (3, 3)]
    # same as thresholds on a line
    assert len(patterns(Halfspaces(2), pts)) == 8
    pts3 = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0)]  # coplanar square
    assert patterns(Halfspaces(3), pts3) == patterns(Halfspaces(2), [p[:2] for p in pts3])


def test_halfspace_dimension_cap():
    with pytest.raises(ContractError):
        Halfspaces(4)
    with pytest.raises(ContractError):
        Halfspaces(2).enumerate_restrictions([(0, 0, 0)])


def test_finite_class_closure_and_csv(tmp_path):
    fc = FiniteClass([(1, -1)])
    assert patterns(fc, [(0,), (1,)]) == {(1, -1), (-1, 1)}
    path = tmp_path / "f.csv"
    path.write_text(fc.to_csv())
    again = FiniteClass.from_csv(path)
    assert patterns(again, [(0,), (1,)]) == {(1, -1), (-1, 1)}
    with pytest.raises(ContractError):
        fc.enumerate_restrictions([(0,), (5,)])


def test_make_class_specs(tmp_path):
    assert make_class("thresholds").name == "thresholds"
    assert make_class("stumps2").dim == 2
    assert make_class("stumps-3").dim == 3
    assert make_class("halfspaces2").dim == 2
    path = tmp_path / "f.csv"
    path.write_text("1,-1,1\n")
    assert make_class(f"finite:{path}").dim == 1
    with pytest.raises(ContractError):
        make_class("trees")


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=6, unique=True))
def test_witnesses_reproduce_patterns(points):
    for cls in (DecisionStumps(2), Halfspaces(2)):
        rs = cls.enumerate_restrictions(points)
        pats = [p for p, _ in rs]
        assert pats == sorted(set(pats))
        for p, desc in rs:
            assert tuple(evaluate(desc, x) for x in points) == p
            assert tuple(-b for b in p) in set(pats)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=1, max_size=7, unique=True))
def test_planar_halfspaces_vc_at_most_three_and_sauer(points):
    pats = patterns(Halfspaces(2), points)
    d = vc_dimension(pats)
    assert d <= 3
    assert len(pats) <= sauer_bound(len(points), d)


# --- VC calculators ------------------------------------------------------------


def brute_vc(pats):
    pats = list(pats)
    m = len(pats[0])
    best = 0
    for k in range(1, m + 1):
        for idx in itertools.combinations(range(m), k):
            if len({tuple(p[i] for i in idx) for p in pats}) == 2**k:
                best = k
                break
        else:
            break
    return best


def test_vc_examples():
    assert vc_dimension({(1, 1), (1, -1)}) == 1
    assert vc_dimension(set(itertools.product((1, -1), repeat=3))) == 3
    assert vc_dimension({(1, 1, 1)}) == 0


def test_vc_of_thresholds_on_five_points():
    five = [(i,) for i in range(5)]
    # the negation-closed class shatters any two points
    assert vc_dimension(patterns(Thresholds1D(), five)) == 2
    upward = {tuple(1 if i >= t else -1 for i in range(5)) for t in range(6)}
    assert vc_dimension(upward) == 1


def test_dual_vc_examples():
    assert dual_vc_dimension({(1, 1)}) == 0
    assert dual_vc_dimension({(1, -1)}) == 1
    cube = set(itertools.product((1, -1), repeat=2))
    # four hypotheses on two points: the transpose has only two columns
    transpose = {tuple(p[i] for p in sorted(cube)) for i in range(2)}
    assert dual_vc_dimension(cube) == brute_vc(transpose) == 1
    eight = patterns(Thresholds1D(), [(i,) for i in range(8)])
    transpose = {tuple(p[i] for p in sorted(eight)) for i in range(8)}
    assert dual_vc_dimension(eight) == brute_vc(transpose) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 7), st.data())
def test_vc_matches_brute_force(m, data):
    pats = data.draw(st.sets(st.tuples(*[st.sampled_from([1, -1])] * m), min_size=1, max_size=20))
    assert vc_dimension(pats) == brute_vc(pats)
    assert len(pats) <= sauer_bound(m, vc_dimension(pats))


def test_vc_guard():
    many = set(itertools.product((1, -1), repeat=12))
    with pytest.raises(ContractError):
        vc_dimension(many, work_limit=50)


def test_vc_beyond_64_points():
    pts = [(i,) for i in range(40)]
    assert dual_vc_dimension(patterns(Thresholds1D(), pts)) == 1  # 80 hypotheses as columns


# --- ranks ---------------------------------------------------------------------


def test_integer_rank_against_numpy():
    rng = np.random.default_rng(0)
    for _ in range(50):
        M = rng.integers(-2, 3, size=(rng.integers(1, 8), rng.integers(1, 8)))
        assert integer_rank(M.tolist()) == np.linalg.matrix_rank(M)


def test_span_rank_examples():
    assert span_rank(Thresholds1D(), [(x,) for x in (0.5, 3, -2, 7, 11)]) == 5
    assert span_rank(FiniteClass([(1, 1)]), [(0,), (1,)]) == 1
    assert span_rank(DecisionStumps(2), [(0, 5), (3, 1), (7, 8)]) == 3
    assert span_rank(Thresholds1D(), [(i,) for i in range(60)]) == 60
