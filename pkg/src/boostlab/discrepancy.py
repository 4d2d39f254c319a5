"""Weighted and unweighted discrepancy of +-1 colorings on set systems.

Two normalizations are kept apart by name:

* ``set_disc(c, f) = |sum_{i in f} c_i|`` and ``system_disc`` (its max over the
  sets) are the unnormalized combinatorial quantities.
* ``weighted_disc(p, c, b) = sum_{i : b_i = +1} p_i c_i`` is signed and
  weighted.  Under the uniform p it equals the unnormalized signed sum
  divided by n.

The link to realizability: for any labeling c and pattern b,
``E_p[c b] = weighted_disc(p, c, b) - weighted_disc(p, c, -b)``, so a coloring
that is balanced on every support bounds the uniform-distribution edge.
"""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .base_classes import BaseClass
from .core import ContractError, check_pattern, negate, to_fraction

EXHAUSTIVE_LIMIT = 22
BRANCH_LIMIT = 40


@dataclass(frozen=True)
class SetSystem:
    n: int
    sets: tuple  # sorted tuples of indices, deduplicated

    def __init__(self, n: int, sets: Iterable[Iterable[int]]):
        if n < 0:
            raise ContractError("ground size must be nonnegative")
        clean = set()
        for s in sets:
            t = tuple(sorted(set(int(i) for i in s)))
            if t and (t[0] < 0 or t[-1] >= n):
                raise ContractError(f"set {t} is not a subset of [0, {n})")
            clean.add(t)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "sets", tuple(sorted(clean)))

    @classmethod
    def from_patterns(cls, patterns: Iterable[Sequence[int]]) -> "SetSystem":
        """Supports {i : b_i = +1} of the given patterns."""
        pats = [check_pattern(p) for p in patterns]
        if not pats:
            raise ContractError("need at least one pattern")
        n = len(pats[0])
        return cls(n, [[i for i, b in enumerate(p) if b > 0] for p in pats])

    @classmethod
    def from_class(cls, base: BaseClass, points) -> "SetSystem":
        return cls.from_patterns(p for p, _ in base.enumerate_restrictions(points))

    def incidence(self) -> np.ndarray:
        A = np.zeros((len(self.sets), self.n), dtype=np.int64)
        for r, s in enumerate(self.sets):
            A[r, list(s)] = 1
        return A

    def to_csv(self) -> str:
        """First line ``n=<ground size>``, then one row of indices per set (empty row for the empty set)."""
        buf = io.StringIO()
        buf.write(f"n={self.n}\n")
        w = csv.writer(buf, lineterminator="\n")
        for s in self.sets:
            w.writerow(s)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, path) -> "SetSystem":
        with open(path, newline="") as fh:
            lines = fh.read().splitlines()
        if not lines or not lines[0].startswith("n="):
            raise ContractError(f"{path}: first line must be n=<ground size>")
        try:
            n = int(lines[0][2:])
            sets = [[int(v) for v in row] for row in csv.reader(lines[1:])]
        except ValueError as exc:
            raise ContractError(f"{path}: {exc}") from exc
        return cls(n, sets)


# --- weighted notion -----------------------------------------------------------


def weighted_disc(sample, p: Sequence, c: Sequence[int], b: Sequence[int]):
    """sum of p_i c_i over indices with b_i = +1 (exact for rational p).

    ``sample`` only fixes the length and may be None.
    """
    c, b = check_pattern(c), check_pattern(b)
    m = len(sample) if sample is not None else len(p)
    if not len(p) == len(c) == len(b) == m:
        raise ContractError("length mismatch between sample, p, c and b")
    exact = all(isinstance(x, (int, Fraction)) for x in p)
    total = Fraction(0) if exact else 0.0
    for pi, ci, bi in zip(p, c, b):
        if bi > 0:
            total += pi * ci
    return total


def check_identity_eq4(sample, p: Sequence, c: Sequence[int], b: Sequence[int]) -> bool:
    """E_p[c b] == weighted_disc(c; b) - weighted_disc(c; -b), compared exactly."""
    p = [to_fraction(x) for x in p]
    lhs = sum((pi * ci * bi for pi, ci, bi in zip(p, c, b)), Fraction(0))
    rhs = weighted_disc(sample, p, c, b) - weighted_disc(sample, p, c, negate(tuple(b)))
    return lhs == rhs


# --- unweighted notion ---------------------------------------------------------


def set_disc(c: Sequence[int], s: Iterable[int]) -> int:
    return abs(sum(c[i] for i in s))


def system_disc(c: Sequence[int], system: SetSystem) -> int:
    """max over sets of |sum of colors| (0 for a system without sets)."""
    c = check_pattern(c)
    if len(c) != system.n:
        raise ContractError("coloring length differs from the ground size")
    return max((set_disc(c, s) for s in system.sets), default=0)


def normalized_system_disc(c: Sequence[int], system: SetSystem) -> Fraction:
    """system_disc / n: the uniform-weight version."""
    return Fraction(system_disc(c, system), system.n) if system.n else Fraction(0)


def _coloring(bits: int, n: int) -> tuple:
    return tuple(1 if (bits >> (n - 1 - i)) & 1 == 0 else -1 for i in range(n))


def exhaustive_min_disc(system: SetSystem) -> tuple[tuple, int]:
    """Scan every coloring with c_0 = +1 (disc is invariant under c -> -c).

    Colorings are visited in lexicographic order with +1 before -1; the first
    optimum wins.
    """
    n = system.n
    if n > EXHAUSTIVE_LIMIT:
        raise ContractError(f"exhaustive discrepancy size guard: n={n} > {EXHAUSTIVE_LIMIT}")
    if n == 0:
        return (), 0
    A = system.incidence()
    best_val, best_c = None, None
    total = 1 << (n - 1)
    chunk = 1 << 14
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(total, start + chunk), dtype=np.int64)
        C = 1 - 2 * ((codes[:, None] >> shifts[None, :]) & 1)
        vals = np.abs(C @ A.T).max(axis=1) if len(system.sets) else np.zeros(len(codes), dtype=np.int64)
        k = int(np.argmin(vals))
        if best_val is None or vals[k] < best_val:
            best_val, best_c = int(vals[k]), _coloring(int(codes[k]), n)
    return best_c, best_val


def branch_and_bound_min_disc(system: SetSystem) -> tuple[tuple, int]:
    """Depth-first search over colorings with c_0 fixed to +1.

    A set with partial sum s and r uncolored members ends with discrepancy at
    least max(|s| - r, (|s| + r) mod 2); a branch dies when some set's bound
    reaches the incumbent.
    """
    n = system.n
    if n > BRANCH_LIMIT:
        raise ContractError(f"branch-and-bound size guard: n={n} > {BRANCH_LIMIT}")
    if n == 0:
        return (), 0
    sets = [s for s in system.sets]
    member = [[k for k, s in enumerate(sets) if i in s] for i in range(n)]
    sums = [0] * len(sets)
    left = [len(s) for s in sets]

    # incumbent from a greedy pass
    greedy = []
    for i in range(n):
        plus = max((abs(sums[k] + 1) for k in member[i]), default=0)
        minus = max((abs(sums[k] - 1) for k in member[i]), default=0)
        ci = 1 if (i == 0 or plus <= minus) else -1
        greedy.append(ci)
        for k in member[i]:
            sums[k] += ci
    best_c, best_val = tuple(greedy), system_disc(greedy, system)
    sums = [0] * len(sets)
    colors = [0] * n

    def bound(k: int) -> int:
        s, r = abs(sums[k]), left[k]
        return max(s - r, (s + r) % 2)

    def rec(i: int) -> None:
        nonlocal best_c, best_val
        if i == n:
            val = max((abs(v) for v in sums), default=0)
            if val < best_val:
                best_val, best_c = val, tuple(colors)
            return
        for ci in ((1,) if i == 0 else (1, -1)):
            colors[i] = ci
            for k in member[i]:
                sums[k] += ci
                left[k] -= 1
            if all(bound(k) < best_val for k in member[i]):
                rec(i + 1)
            for k in member[i]:
                sums[k] -= ci
                left[k] += 1
            if best_val == 0 or (best_val == 1 and _parity_floor(sets) == 1):
                return

    rec(0)
    return best_c, best_val


def _parity_floor(sets) -> int:
    return 1 if any(len(s) % 2 for s in sets) else 0


def min_discrepancy_coloring(system: SetSystem, method: str = "auto") -> tuple[tuple, int]:
    """Exact disc(F) = min over colorings of the max set imbalance, with a minimizer."""
    if method == "exhaustive" or (method == "auto" and system.n <= 20):
        return exhaustive_min_disc(system)
    if method in ("auto", "branch"):
        return branch_and_bound_min_disc(system)
    raise ContractError(f"unknown method {method!r}")


# --- link to realizability ----------------------------------------------------


def uniform_edge(base: BaseClass, points, coloring: Sequence[int]) -> Fraction:
    """max over restrictions b of (1/n) sum_i c_i b_i: the edge against uniform p."""
    c = check_pattern(coloring)
    n = len(c)
    rs = base.enumerate_restrictions(points)
    if len(rs[0][0]) != n:
        raise ContractError("coloring length differs from the number of points")
    return max(Fraction(sum(ci * bi for ci, bi in zip(c, p)), n) for p, _ in rs)


def coloring_to_gamma_bound(base: BaseClass, points, coloring: Sequence[int]) -> Fraction:
    """max over restrictions b of (|disc(c; supp b)| + |disc(c; supp -b)|) / n.

    Bounds ``uniform_edge`` from above, since sum c_i b_i is the difference of
    the two signed sums.
    """
    c = check_pattern(coloring)
    n = len(c)
    best = Fraction(0)
    for p, _ in base.enumerate_restrictions(points):
        if len(p) != n:
            raise ContractError("coloring length differs from the number of points")
        pos = sum(ci for ci, b in zip(c, p) if b > 0)
        neg = sum(ci for ci, b in zip(c, p) if b < 0)
        best = max(best, Fraction(abs(pos) + abs(neg), n))
    return best


def min_uniform_edge(base: BaseClass, points) -> tuple[tuple, Fraction]:
    """min over labelings c of ``uniform_edge``; exhaustive with c_0 = +1."""
    rs = base.enumerate_restrictions(points)
    n = len(rs[0][0])
    B = np.array([p for p, _ in rs], dtype=np.int64)
    best_c, best = None, None
    for rest in itertools.product((1, -1), repeat=n - 1):
        c = np.array((1,) + rest, dtype=np.int64)
        val = int((B @ c).max())
        if best is None or val < best:
            best, best_c = val, tuple(int(v) for v in c)
    return best_c, Fraction(best, n)
