"""gamma-VC dimension by exhaustive search, plus the witness constructions.

A point set is gamma-shattered when every labeling of it is
gamma-realizable.  ``gamma_shatter_check`` solves one exact game per
labeling.  For a symmetric class a labeling and its negation have the same
minmax edge (negate every pattern), so only labelings whose first entry is
+1 are solved.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from . import lp
from .base_classes import BaseClass, FiniteClass, sauer_bound, vc_dimension
from .core import ContractError, LabeledSample, check_pattern, to_fraction
from .realizability import gamma_star, verify_certificate

MAX_SHATTER_POINTS = 12
MAX_HADAMARD_PATTERNS = 100_000
MAX_COMPOSED = 5_000_000


@dataclass(frozen=True)
class GammaShatterReport:
    points: tuple
    gamma: Fraction
    all_realizable: bool
    worst_labeling: tuple
    worst_gamma_star: Fraction
    labelings_checked: int = 0
    complete: bool = True  # False when the scan stopped at the first failure

    def to_json(self) -> dict:
        from .core import fmt_fraction, pattern_str

        return {
            "points": [[fmt_fraction(c) for c in p] for p in self.points],
            "gamma": fmt_fraction(self.gamma),
            "all_realizable": self.all_realizable,
            "worst_labeling": pattern_str(self.worst_labeling),
            "worst_gamma_star": fmt_fraction(self.worst_gamma_star),
            "labelings_checked": self.labelings_checked,
            "complete": self.complete,
        }


def labelings_up_to_negation(n: int) -> Iterable[tuple]:
    """All +-1 vectors of length n whose first entry is +1, in lexicographic order of the rest."""
    for rest in itertools.product((1, -1), repeat=n - 1):
        yield (1,) + rest


def gamma_shatter_check(
    cls: BaseClass,
    points: Sequence,
    gamma,
    stop_at_failure: bool = False,
    verify: bool = False,
) -> GammaShatterReport:
    """Minimum of gamma* over all labelings of ``points`` and its argmin.

    Ties between labelings keep the first one met.  With ``verify`` every
    emitted certificate is re-checked independently (slower).
    """
    gamma = to_fraction(gamma)
    if not 0 < gamma <= 1:
        raise ContractError(f"gamma must lie in (0, 1], got {gamma}")
    pts = [p if isinstance(p, tuple) else (p,) for p in points]
    n = len(pts)
    if n == 0:
        raise ContractError("need at least one point")
    if n > MAX_SHATTER_POINTS:
        raise ContractError(f"shatter check size guard: {n} points > {MAX_SHATTER_POINTS}")
    worst, worst_lab = None, None
    checked = 0
    complete = True
    for lab in labelings_up_to_negation(n):
        sample = LabeledSample(pts, lab)
        value, cert = gamma_star(sample, cls)
        checked += 1
        if verify and not verify_certificate(sample, cls, cert):
            raise lp.LPError(f"certificate for labeling {lab} failed verification")
        if worst is None or value < worst:
            worst, worst_lab = value, lab
        if stop_at_failure and value < gamma:
            complete = checked == 2 ** (n - 1)
            break
    return GammaShatterReport(
        points=tuple(LabeledSample(pts, (1,) * n).points),
        gamma=gamma,
        all_realizable=worst >= gamma,
        worst_labeling=worst_lab,
        worst_gamma_star=worst,
        labelings_checked=checked,
        complete=complete,
    )


@dataclass(frozen=True)
class LowerEstimate:
    value: int
    witness: tuple
    budget_exhausted: bool
    sets_tried: int


def gamma_vc_lower_estimate(
    cls: BaseClass,
    point_generator: Callable[[int], Iterable[Sequence]] | Iterable[Sequence],
    gamma,
    budget: int = 64,
) -> LowerEstimate:
    """Largest size among generated point sets that are gamma-shattered.

    ``point_generator`` is either an iterable of candidate point sets or a
    callable ``n -> iterable of sets of size n`` tried for n = 1, 2, ...  The
    callable form stops at the first size with no shattered candidate.
    ``budget`` caps the number of candidate sets examined.
    """
    gamma = to_fraction(gamma)
    best, witness, tried = 0, (), 0

    def attempt(pts) -> bool | None:
        nonlocal best, witness, tried
        if tried >= budget:
            return None
        tried += 1
        pts = list(pts)
        if len(pts) > MAX_SHATTER_POINTS:
            return None
        rep = gamma_shatter_check(cls, pts, gamma, stop_at_failure=True)
        if rep.all_realizable and len(pts) > best:
            best, witness = len(pts), rep.points
        return rep.all_realizable

    if callable(point_generator):
        n = 1
        while n <= MAX_SHATTER_POINTS:
            found = False
            for pts in point_generator(n):
                res = attempt(pts)
                if res is None:
                    return LowerEstimate(best, witness, True, tried)
                if res:
                    found = True
                    break
            if not found:
                break
            n += 1
    else:
        for pts in point_generator:
            if attempt(pts) is None:
                return LowerEstimate(best, witness, True, tried)
    return LowerEstimate(best, witness, False, tried)


def integer_grid(n: int) -> list:
    return [[(i,) for i in range(n)]]


def classical_vc_lower_estimate(cls: BaseClass, point_sets: Iterable[Sequence]) -> int:
    """Largest generated set that is shattered in the ordinary sense."""
    best = 0
    for pts in point_sets:
        pts = [p if isinstance(p, tuple) else (p,) for p in pts]
        pats = {p for p, _ in cls.enumerate_restrictions(pts)}
        if len(pats) == 2 ** len(pts):
            best = max(best, len(pts))
    return best


# --- Hadamard construction ----------------------------------------------------


def sylvester(t: int) -> np.ndarray:
    if t < 1 or t & (t - 1):
        raise ContractError(f"Sylvester order must be a power of two, got {t}")
    H = np.array([[1]], dtype=np.int64)
    while H.shape[0] < t:
        H = np.block([[H, H], [H, -H]])
    return H


def hadamard_rows(t: int) -> list:
    """Sylvester rows with column 0 negated, so no row is constant."""
    H = sylvester(t).copy()
    H[:, 0] *= -1
    return [tuple(int(v) for v in row) for row in H]


def hadamard_class(t: int, s: int) -> FiniteClass:
    """All s-fold concatenations of the 2t signed (column-flipped) Sylvester rows."""
    if t not in (2, 4, 8, 16):
        raise ContractError(f"t must be one of 2, 4, 8, 16, got {t}")
    if s < 1:
        raise ContractError("s must be positive")
    if (2 * t) ** s > MAX_HADAMARD_PATTERNS:
        raise ContractError(f"hadamard size guard: (2t)^s = {(2 * t) ** s} patterns")
    base = hadamard_rows(t)
    signed = sorted(set(base) | {tuple(-v for v in r) for r in base})
    pats = [sum(combo, ()) for combo in itertools.product(signed, repeat=s)]
    return FiniteClass(pats, name=f"hadamard{t}x{s}")


def _is_orthogonal(vectors: Sequence[Sequence[int]]) -> bool:
    V = np.array(vectors, dtype=np.int64)
    G = V @ V.T
    return bool(np.all(G == np.diag(np.diag(G))))


def verify_orthogonal_advantage(vectors: Sequence[Sequence[int]]) -> Fraction:
    """Exact min over distributions p of max_i |<v_i, p>|.

    For t pairwise-orthogonal +-1 vectors of length t this is at least
    1/sqrt(t); compare ``value**2 >= Fraction(1, t)`` to stay rational.
    """
    vecs = [check_pattern(v) for v in vectors]
    if not vecs:
        raise ContractError("need at least one vector")
    t = len(vecs[0])
    if any(len(v) != t for v in vecs):
        raise ContractError("vectors have different lengths")
    if not _is_orthogonal(vecs):
        raise ContractError("vectors are not pairwise orthogonal")
    rows = vecs + [tuple(-x for x in v) for v in vecs]
    return lp.solve_zero_sum(rows).value


# --- composition bound -------------------------------------------------------


def binary_entropy(x: float) -> float:
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def composition_constant(T: int) -> float:
    """c_T = 1/(T x) where x < 1/2 solves h(x) = 1/(T+1)."""
    if T < 1:
        raise ContractError("T must be positive")
    target = 1.0 / (T + 1)
    x = brentq(lambda v: binary_entropy(v) - target, 1e-300, 0.5, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    return 1.0 / (T * x)


def _as_table(g, T: int) -> tuple:
    """Truth table of g over {-1,+1}^T, inputs in itertools.product((-1, 1)) order."""
    if callable(g):
        return tuple(int(g(bits)) for bits in itertools.product((-1, 1), repeat=T))
    table = check_pattern(g)
    if len(table) != 2**T:
        raise ContractError(f"truth table has {len(table)} entries, expected {2 ** T}")
    return table


def composition_vc_check(classes: Sequence[Iterable[Sequence[int]]], G: Sequence) -> tuple[int, float]:
    """(brute-force VC of {g(b_1..b_T)}, c_T * (sum VC(B_i) + VC(G))).

    ``G`` holds functions of a T-tuple of +-1 values or truth tables in
    ``itertools.product((-1, 1), repeat=T)`` order.  Raises
    :class:`AssertionError` if the computed dimension exceeds the bound.
    """
    T = len(classes)
    if T < 1 or not G:
        raise ContractError("need at least one class and one composing function")
    sets = [sorted({check_pattern(p) for p in B}) for B in classes]
    if any(not s for s in sets):
        raise ContractError("every class needs at least one pattern")
    n = len(sets[0][0])
    if any(len(p) != n for s in sets for p in s):
        raise ContractError("all classes must live on the same domain")
    if n > 16:
        raise ContractError(f"composition size guard: domain of {n} points > 16")
    tables = np.array([_as_table(g, T) for g in G], dtype=np.int64)
    combos = math.prod(len(s) for s in sets)
    if combos * len(tables) > MAX_COMPOSED:
        raise ContractError("composition size guard exceeded")

    # input index of point j under (b_1..b_T): bit i set when b_i(x_j) = +1,
    # most significant bit first to match itertools.product ordering
    idx = np.zeros((1, n), dtype=np.int64)
    for s in sets:
        bits = (np.array(s, dtype=np.int64) > 0).astype(np.int64)
        idx = (idx[:, None, :] * 2 + bits[None, :, :]).reshape(-1, n)
    weights = 1 << np.arange(n, dtype=np.int64)
    masks = set()
    for table in tables:
        out = (table[idx] > 0).astype(np.int64)
        masks.update(np.unique(out @ weights).tolist())
    composed = [tuple(1 if (mk >> j) & 1 else -1 for j in range(n)) for mk in masks]

    computed = vc_dimension(composed)
    d_classes = [vc_dimension(s) for s in sets]
    d_G = vc_dimension([tuple(t) for t in tables.tolist()])
    bound = composition_constant(T) * (sum(d_classes) + d_G)
    if computed > bound + 1e-9:
        raise AssertionError(f"composed VC {computed} exceeds the bound {bound}")
    return computed, bound


def majority(bits) -> int:
    return 1 if sum(bits) >= 0 else -1


def gamma_vc_upper_formula(d: int, gamma, constant: float = 64.0) -> float:
    """constant * d / gamma^2 * log(d / gamma) (natural log, floored at 1)."""
    g = float(gamma)
    return constant * d / g**2 * max(1.0, math.log(max(d, 1) / g))


def sauer_check(patterns: Sequence[Sequence[int]]) -> bool:
    pats = {check_pattern(p) for p in patterns}
    m = len(next(iter(pats)))
    return len(pats) <= sauer_bound(m, vc_dimension(pats))
