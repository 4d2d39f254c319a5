"""Exact gamma-realizability: the minmax edge gamma* and two-sided certificates.

``gamma_star`` solves the zero-sum game between a mixture over the class's
restrictions and a distribution over sample indices.  One LP solve yields the
value together with optimal strategies for both players, which become the
certificate.  ``hull_gamma_star`` solves a different LP: the largest gamma
with gamma*y in the convex hull of the restriction patterns.  Hull membership
forces the margin to equal gamma on every point, so the hull value never
exceeds gamma*.  It matches gamma* for thresholds, but a class whose patterns
obey a linear relation can fall short.  Stumps on the 2x2 grid with labels
(+,+,+,-) have gamma* = 1/3 and hull value 0, because every stump pattern
satisfies b1 + b4 = b2 + b3.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass
from fractions import Fraction

from . import lp
from .base_classes import BaseClass, HypothesisDesc, evaluate
from .core import ContractError, LabeledSample, correlation, fmt_fraction, to_fraction

MAX_PATTERNS = 5000
REALIZABLE = "realizable"
NOT_REALIZABLE = "not_realizable"

# callables invoked as listener(sample, cls, cert) for every certificate
# produced by gamma_star; used to audit whole experiment runs
_listeners: list = []


@contextlib.contextmanager
def certificate_listener(fn):
    _listeners.append(fn)
    try:
        yield fn
    finally:
        _listeners.remove(fn)


@dataclass(frozen=True)
class RealizabilityCertificate:
    verdict: str
    gamma: Fraction
    gamma_star: Fraction
    mixture: tuple | None = None  # ((HypothesisDesc, weight), ...)
    adversary: tuple | None = None  # one weight per sample index

    def to_json(self) -> dict:
        out = {
            "verdict": self.verdict,
            "gamma": fmt_fraction(self.gamma),
            "gamma_star": fmt_fraction(self.gamma_star),
        }
        if self.mixture is not None:
            out["mixture"] = [{"hypothesis": h.to_json(), "weight": fmt_fraction(w)} for h, w in self.mixture]
        if self.adversary is not None:
            out["adversary"] = [fmt_fraction(w) for w in self.adversary]
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: dict) -> "RealizabilityCertificate":
        try:
            mixture = None
            if d.get("mixture") is not None:
                mixture = tuple(
                    (HypothesisDesc.from_json(e["hypothesis"]), to_fraction(e["weight"])) for e in d["mixture"]
                )
            adversary = None
            if d.get("adversary") is not None:
                adversary = tuple(to_fraction(w) for w in d["adversary"])
            return cls(
                verdict=d["verdict"],
                gamma=to_fraction(d["gamma"]),
                gamma_star=to_fraction(d["gamma_star"]),
                mixture=mixture,
                adversary=adversary,
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ContractError(f"malformed certificate: {exc}") from exc


def _restrictions(sample: LabeledSample, cls: BaseClass) -> list:
    if len(sample) == 0:
        raise ContractError("sample must be nonempty")
    rs = cls.enumerate_restrictions(sample)
    if len(rs) > MAX_PATTERNS:
        raise ContractError(f"enumeration guard: {len(rs)} restrictions exceed {MAX_PATTERNS}")
    return rs


def gamma_star_patterns(labels, patterns) -> lp.GameSolution:
    """Game solution for an explicit pattern list (rows) against sample indices."""
    payoff = [[y * b for y, b in zip(labels, pat)] for pat in patterns]
    return lp.solve_zero_sum(payoff)


def gamma_star(sample: LabeledSample, cls: BaseClass) -> tuple[Fraction, RealizabilityCertificate]:
    """Exact gamma* = min_p max_b sum_i p_i y_i b(x_i) with both optimal strategies."""
    rs = _restrictions(sample, cls)
    sol = gamma_star_patterns(sample.labels, [p for p, _ in rs])
    value = sol.value
    if value < 0:  # symmetric classes always give gamma* >= 0
        raise lp.LPError(f"negative game value {value} for a symmetric class")
    mixture = tuple((desc, w) for (_, desc), w in zip(rs, sol.row_strategy) if w != 0)
    cert = RealizabilityCertificate(
        verdict=REALIZABLE,
        gamma=value,
        gamma_star=value,
        mixture=mixture,
        adversary=tuple(sol.col_strategy),
    )
    for fn in list(_listeners):
        fn(sample, cls, cert)
    return value, cert


def is_gamma_realizable(sample: LabeledSample, cls: BaseClass, gamma) -> RealizabilityCertificate:
    gamma = to_fraction(gamma)
    if not 0 < gamma <= 1:
        raise ContractError(f"gamma must lie in (0, 1], got {gamma}")
    value, cert = gamma_star(sample, cls)
    verdict = REALIZABLE if value >= gamma else NOT_REALIZABLE
    return RealizabilityCertificate(
        verdict=verdict,
        gamma=gamma,
        gamma_star=value,
        mixture=cert.mixture,
        adversary=cert.adversary,
    )


def verify_certificate(sample: LabeledSample, cls: BaseClass, cert: RealizabilityCertificate) -> bool:
    """Re-check a certificate with exact arithmetic, independently of the LP.

    Mixture hypotheses are re-evaluated from their parameters and must belong
    to the class; the adversary is tested against a fresh enumeration of the
    class's restrictions.  Returns False on any failed inequality and raises
    :class:`ContractError` when the certificate is structurally malformed.
    """
    if not isinstance(cert, RealizabilityCertificate) or cert.verdict not in (REALIZABLE, NOT_REALIZABLE):
        raise ContractError("malformed certificate")
    if not isinstance(cert.gamma, Fraction) or not isinstance(cert.gamma_star, Fraction):
        raise ContractError("certificate values must be exact rationals")
    m = len(sample)
    if cert.verdict == REALIZABLE and cert.mixture is None:
        raise ContractError("realizable certificate without a mixture")
    if cert.verdict == NOT_REALIZABLE and cert.adversary is None:
        raise ContractError("non-realizable certificate without an adversary")
    if (cert.gamma_star >= cert.gamma) != (cert.verdict == REALIZABLE):
        return False

    if cert.mixture is not None:
        weights = [w for _, w in cert.mixture]
        if any(not isinstance(w, Fraction) for w in weights):
            raise ContractError("mixture weights must be exact rationals")
        if any(w < 0 for w in weights) or sum(weights, Fraction(0)) != 1:
            return False
        class_patterns = {p for p, _ in cls.enumerate_restrictions(sample)}
        margins = [Fraction(0)] * m
        for desc, w in cert.mixture:
            try:
                pat = tuple(evaluate(desc, x) for x in sample.points)
            except ContractError:
                return False
            if pat not in class_patterns:
                return False
            for i, (y, b) in enumerate(zip(sample.labels, pat)):
                margins[i] += w * y * b
        worst = min(margins)
        if worst < cert.gamma_star:
            return False
        if cert.verdict == REALIZABLE and worst < cert.gamma:
            return False

    if cert.adversary is not None:
        p = cert.adversary
        if len(p) != m:
            return False
        if any(not isinstance(w, Fraction) for w in p):
            raise ContractError("adversary weights must be exact rationals")
        if any(w < 0 for w in p) or sum(p, Fraction(0)) != 1:
            return False
        best = max(correlation(sample, p, pat) for pat, _ in cls.enumerate_restrictions(sample))
        if best > cert.gamma_star:
            return False
        if cert.verdict == NOT_REALIZABLE and best >= cert.gamma:
            return False
    return True


def hull_gamma_star(sample: LabeledSample, cls: BaseClass) -> Fraction:
    """Largest gamma with gamma*(y_1..y_m) in the convex hull of the restrictions.

    Variables (q_1..q_N, gamma) >= 0; constraints sum_b q_b b_i - gamma y_i = 0
    for every i and sum_b q_b = 1.  Solved with the two-phase path of the
    simplex, independently of the game formulation.  Always <= gamma*.
    """
    rs = _restrictions(sample, cls)
    pats = [p for p, _ in rs]
    N = len(pats)
    A_eq = []
    b_eq = []
    for i, y in enumerate(sample.labels):
        A_eq.append([pat[i] for pat in pats] + [-y])
        b_eq.append(0)
    A_eq.append([1] * N + [0])
    b_eq.append(1)
    res = lp.solve([0] * N + [1], A_eq=A_eq, b_eq=b_eq)
    return res.objective


def hull_contains(sample: LabeledSample, cls: BaseClass, gamma) -> bool:
    """Feasibility of gamma*y in the convex hull of the restriction patterns."""
    gamma = to_fraction(gamma)
    rs = _restrictions(sample, cls)
    pats = [p for p, _ in rs]
    A_eq = [[pat[i] for pat in pats] for i in range(len(sample))]
    b_eq = [gamma * y for y in sample.labels]
    A_eq.append([1] * len(pats))
    b_eq.append(1)
    try:
        lp.solve([0] * len(pats), A_eq=A_eq, b_eq=b_eq)
    except lp.Infeasible:
        return False
    return True
