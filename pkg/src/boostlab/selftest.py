"""Fast invariant checks run by ``boostlab selftest`` (well under a minute)."""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction

from . import boost, discrepancy, gamma_vc, realizability
from .base_classes import DecisionStumps, Halfspaces, Thresholds1D, evaluate, sauer_bound, vc_dimension
from .core import LabeledSample
from .rng import Rng, splitmix64


def _rng_vector():
    state, outs = 0, []
    for _ in range(3):
        state, out = splitmix64(state)
        outs.append(out)
    assert outs == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]
    a = Rng(7).random_array(64, use_numba=False)
    b = Rng(7).random_array(64)
    assert (a == b).all()


def _alternating_gamma():
    s = LabeledSample([0, 1, 2], [1, -1, 1])
    value, cert = realizability.gamma_star(s, Thresholds1D())
    assert value == Fraction(1, 3)
    assert realizability.verify_certificate(s, Thresholds1D(), cert)


def _two_formulations():
    r = random.Random(3)
    for _ in range(20):
        pts = r.sample(range(20), r.randint(1, 6))
        s = LabeledSample(pts, [r.choice((1, -1)) for _ in pts])
        v, cert = realizability.gamma_star(s, Thresholds1D())
        assert v == realizability.hull_gamma_star(s, Thresholds1D())
        assert realizability.verify_certificate(s, Thresholds1D(), cert)


def _witness_soundness():
    r = random.Random(4)
    for cls in (Thresholds1D(), DecisionStumps(2), Halfspaces(2)):
        for _ in range(5):
            pts = [tuple(r.randint(0, 4) for _ in range(cls.dim)) for _ in range(r.randint(1, 6))]
            pats = cls.enumerate_restrictions(pts)
            for p, desc in pats:
                assert tuple(evaluate(desc, x) for x in pts) == p
            ps = {p for p, _ in pats}
            assert all(tuple(-b for b in p) in ps for p in ps)
            d = vc_dimension(ps)
            assert len(ps) <= sauer_bound(len(pts), d)
            if isinstance(cls, Halfspaces):
                assert d <= 3


def _boost_example():
    s = LabeledSample([0, 1, 2], [1, -1, 1])
    trace = boost.FitTrace()
    model = boost.fit(s, Thresholds1D(), gamma_star=Fraction(1, 3), trace=trace)
    assert model.rounds == 2
    assert [r.pattern for r in trace.records] == [(-1, -1, 1), (1, -1, -1)]
    assert all(boost.predict(model, x) == y for x, y in zip(s.points, s.labels))


def _separation_equivalence():
    for m in range(1, 5):
        for labels in itertools.product((1, -1), repeat=m):
            pats = list(itertools.product((1, -1), repeat=m))
            for hyps in itertools.combinations(pats, 2):
                sigs = [tuple(h[i] for h in hyps) for i in range(m)]
                consistent = all(
                    labels[i] == labels[j] for i in range(m) for j in range(m) if sigs[i] == sigs[j]
                )
                assert boost.separates(hyps, labels) == consistent


def _eq4_identity():
    r = random.Random(5)
    for _ in range(2000):
        m = r.randint(1, 8)
        w = [r.randint(0, 9) for _ in range(m)]
        if sum(w) == 0:
            w[0] = 1
        p = [Fraction(x, sum(w)) for x in w]
        c = [r.choice((1, -1)) for _ in range(m)]
        b = [r.choice((1, -1)) for _ in range(m)]
        assert discrepancy.check_identity_eq4(None, p, c, b)


def _hadamard():
    for t in (2, 4, 8):
        v = gamma_vc.verify_orthogonal_advantage(gamma_vc.hadamard_rows(t))
        assert v * v >= Fraction(1, t)


def _composition():
    th = [p for p, _ in Thresholds1D().enumerate_restrictions([(i,) for i in range(4)])]
    computed, bound = gamma_vc.composition_vc_check([th, th, th], [gamma_vc.majority])
    assert computed <= bound


def _discrepancy_search():
    r = random.Random(6)
    for _ in range(30):
        n = r.randint(1, 10)
        system = discrepancy.SetSystem(n, [[i for i in range(n) if r.random() < 0.5] for _ in range(r.randint(1, 6))])
        assert discrepancy.exhaustive_min_disc(system)[1] == discrepancy.branch_and_bound_min_disc(system)[1]


CHECKS = [
    ("rng reference vector and numba/python agreement", _rng_vector),
    ("alternating 3-point thresholds: gamma* = 1/3, certificate verifies", _alternating_gamma),
    ("minmax and hull-membership LPs agree", _two_formulations),
    ("restriction witnesses sound, negation-closed, Sauer bound", _witness_soundness),
    ("boosting hand example: two rounds, consistent", _boost_example),
    ("separation iff consistent cell labeling exists", _separation_equivalence),
    ("discrepancy identity for correlations", _eq4_identity),
    ("orthogonal-advantage bound v^2 >= 1/t", _hadamard),
    ("composition VC within the entropy bound", _composition),
    ("branch-and-bound discrepancy equals exhaustive scan", _discrepancy_search),
]


def run(out=print) -> bool:
    ok = True
    for name, fn in CHECKS:
        start = time.perf_counter()
        try:
            fn()
            status = "PASS"
        except Exception as exc:  # report every failure, keep going
            status = f"FAIL ({type(exc).__name__}: {exc})"
            ok = False
        out(f"{status:4s}  {name}  [{time.perf_counter() - start:.2f}s]")
    return ok
