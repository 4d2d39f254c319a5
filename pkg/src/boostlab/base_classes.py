"""Base classes of weak hypotheses and exact enumeration of their restrictions.

Every class here is symmetric (``b`` is in the class iff ``-b`` is), and every
enumerated restriction carries a witness :class:`HypothesisDesc` whose
evaluation on the sample reproduces the pattern exactly.

Sign convention: ``sign(0) = +1`` everywhere.
"""

from __future__ import annotations

import csv
import itertools
import json
import threading
from collections import OrderedDict
from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd
from typing import Iterable, Sequence

import numpy as np

from .core import (
    ContractError,
    LabeledSample,
    check_pattern,
    fmt_fraction,
    negate,
    parse_pattern_str,
    pattern_str,
    to_fraction,
)

MAX_HALFSPACE_DIM = 3


def _sign(v) -> int:
    return 1 if v >= 0 else -1


@dataclass(frozen=True)
class HypothesisDesc:
    """Parameters of one concrete hypothesis.

    kind is one of ``threshold`` (``sign(s*(x - t))`` on a line), ``stump``
    (same on coordinate ``axis``), ``halfspace`` (``sign(w.x + b)``) or
    ``finite`` (row ``index`` of an explicit table, evaluated at integer
    domain points).
    """

    kind: str
    sign: int = 1
    axis: int = 0
    threshold: Fraction = Fraction(0)
    normal: tuple = ()
    offset: Fraction = Fraction(0)
    index: int = -1
    values: tuple = ()

    def to_json(self) -> dict:
        if self.kind in ("threshold", "stump"):
            d = {"kind": self.kind, "sign": self.sign, "threshold": fmt_fraction(self.threshold)}
            if self.kind == "stump":
                d["axis"] = self.axis
            return d
        if self.kind == "halfspace":
            return {
                "kind": "halfspace",
                "normal": [fmt_fraction(w) for w in self.normal],
                "offset": fmt_fraction(self.offset),
            }
        if self.kind == "finite":
            return {"kind": "finite", "index": self.index, "values": pattern_str(self.values)}
        raise ContractError(f"unknown hypothesis kind {self.kind!r}")

    @classmethod
    def from_json(cls, d: dict) -> "HypothesisDesc":
        if not isinstance(d, dict) or "kind" not in d:
            raise ContractError(f"malformed hypothesis descriptor {d!r}")
        kind = d["kind"]
        try:
            if kind in ("threshold", "stump"):
                sign = int(d["sign"])
                if sign not in (1, -1):
                    raise ContractError("stump sign must be +1 or -1")
                return cls(kind, sign=sign, axis=int(d.get("axis", 0)), threshold=to_fraction(d["threshold"]))
            if kind == "halfspace":
                return cls(
                    kind,
                    normal=tuple(to_fraction(w) for w in d["normal"]),
                    offset=to_fraction(d["offset"]),
                )
            if kind == "finite":
                return cls(kind, index=int(d["index"]), values=parse_pattern_str(d["values"]))
        except (KeyError, TypeError) as exc:
            raise ContractError(f"malformed hypothesis descriptor {d!r}") from exc
        raise ContractError(f"unknown hypothesis kind {kind!r}")

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def evaluate(h: HypothesisDesc, x) -> int:
    """Evaluate a hypothesis at a point, returning +1 or -1."""
    x = tuple(x) if isinstance(x, (list, tuple)) else (x,)
    if h.kind == "threshold":
        if len(x) != 1:
            raise ContractError(f"threshold expects a 1-d point, got dimension {len(x)}")
        return _sign(h.sign * (to_fraction(x[0]) - h.threshold))
    if h.kind == "stump":
        if not 0 <= h.axis < len(x):
            raise ContractError(f"stump axis {h.axis} out of range for dimension {len(x)}")
        return _sign(h.sign * (to_fraction(x[h.axis]) - h.threshold))
    if h.kind == "halfspace":
        if len(x) != len(h.normal):
            raise ContractError(f"halfspace of dimension {len(h.normal)} applied to point of dimension {len(x)}")
        return _sign(sum((w * to_fraction(c) for w, c in zip(h.normal, x)), h.offset))
    if h.kind == "finite":
        if len(x) != 1:
            raise ContractError("finite-class points are 1-d domain indices")
        k = to_fraction(x[0])
        if k.denominator != 1 or not 0 <= k < len(h.values):
            raise ContractError(f"domain index {x[0]} outside finite class domain of size {len(h.values)}")
        return h.values[int(k)]
    raise ContractError(f"unknown hypothesis kind {h.kind!r}")


def restrict(h: HypothesisDesc, points: Sequence) -> tuple:
    return tuple(evaluate(h, p) for p in points)


# --- classes ---------------------------------------------------------------


class BaseClass:
    """Common surface: ``name``, ``dim``, ``vc_estimate`` and enumeration."""

    name = "base"
    dim = 1
    vc_estimate = 1
    symmetric = True

    @property
    def cache_key(self) -> tuple:
        return (type(self).__name__, self.dim)

    def enumerate_restrictions(self, sample) -> list:
        """Sorted ``(pattern, witness)`` pairs, one per distinct restriction."""
        points = tuple(_points_of(sample))
        if not points:
            raise ContractError("cannot enumerate restrictions on an empty sample")
        for p in points:
            if len(p) != self.dim:
                raise ContractError(f"{self.name} expects dimension {self.dim}, got {len(p)}")
        return list(_cached_enumeration(self, points))

    def _enumerate(self, points) -> dict:
        raise NotImplementedError

    def evaluate(self, h: HypothesisDesc, x) -> int:
        return evaluate(h, x)

    def __repr__(self) -> str:
        return f"<{self.name}>"


class Thresholds1D(BaseClass):
    name = "thresholds"
    dim = 1
    vc_estimate = 1

    def _enumerate(self, points):
        return _axis_sweep(points, 0, "threshold")


class DecisionStumps(BaseClass):
    vc_estimate = 2

    def __init__(self, dim: int):
        if dim < 1:
            raise ContractError("stump dimension must be positive")
        self.dim = dim
        self.name = f"stumps{dim}"
        # VC(DS_d) grows like log d; this is only used to size sampled-mode m0
        self.vc_estimate = 1 if dim == 1 else 2 + int(np.log2(dim))

    def _enumerate(self, points):
        table: dict = {}
        for axis in range(self.dim):
            for pat, desc in _axis_sweep(points, axis, "stump").items():
                table.setdefault(pat, desc)
        return table


class Halfspaces(BaseClass):
    def __init__(self, dim: int):
        if not 1 <= dim <= MAX_HALFSPACE_DIM:
            raise ContractError(f"halfspace enumeration supports 1 <= d <= {MAX_HALFSPACE_DIM}, got {dim}")
        self.dim = dim
        self.name = f"halfspaces{dim}"
        self.vc_estimate = dim + 1

    def _enumerate(self, points):
        found = _halfspace_dichotomies(list(points), self.dim)
        table = {}
        for pat, (w, b) in found.items():
            desc = HypothesisDesc("halfspace", normal=tuple(w), offset=b)
            table[pat] = desc
        return table


class FiniteClass(BaseClass):
    """An explicit table of patterns over the domain {0, ..., n-1}.

    The table is closed under negation at construction.  Sample points are
    1-d integer domain indices.
    """

    def __init__(self, patterns: Iterable[Sequence[int]], name: str = "finite"):
        rows = [check_pattern(p) for p in patterns]
        if not rows:
            raise ContractError("finite class needs at least one pattern")
        n = len(rows[0])
        if any(len(r) != n for r in rows):
            raise ContractError("finite class patterns have different lengths")
        closed = sorted(set(rows) | {negate(r) for r in rows})
        self.patterns = closed
        self.domain_size = n
        self.dim = 1
        self.name = name
        self.vc_estimate = max(1, int(np.floor(np.log2(len(closed)))))

    @property
    def cache_key(self) -> tuple:
        return ("FiniteClass", tuple(self.patterns))

    def _enumerate(self, points):
        idx = []
        for p in points:
            k = p[0]
            if k.denominator != 1 or not 0 <= k < self.domain_size:
                raise ContractError(f"point {fmt_fraction(k)} is not a domain index of this finite class")
            idx.append(int(k))
        table: dict = {}
        for j, row in enumerate(self.patterns):
            pat = tuple(row[k] for k in idx)
            table.setdefault(pat, HypothesisDesc("finite", index=j, values=row))
        return table

    def to_csv(self) -> str:
        return "".join(",".join("+1" if b > 0 else "-1" for b in row) + "\n" for row in self.patterns)

    @classmethod
    def from_csv(cls, path, name: str | None = None) -> "FiniteClass":
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                vals = []
                for cell in row:
                    cell = cell.strip()
                    if cell in ("+", "+1", "1"):
                        vals.append(1)
                    elif cell in ("-", "-1"):
                        vals.append(-1)
                    else:
                        raise ContractError(f"{path}: bad entry {cell!r} in finite class CSV")
                rows.append(vals)
        return cls(rows, name=name or f"finite:{path}")


def make_class(spec: str) -> BaseClass:
    """Build a class from a CLI-style name.

    Accepted: ``thresholds``, ``stumps<d>``, ``halfspaces<d>`` (also with a
    ``-`` or ``:`` before ``d``), ``finite:<csv path>``.
    """
    s = spec.strip().lower()
    if s in ("thresholds", "thresholds1d", "stumps1-thresholds"):
        return Thresholds1D()
    if s.startswith("finite:"):
        return FiniteClass.from_csv(spec.split(":", 1)[1])
    for prefix, ctor in (("stumps", DecisionStumps), ("halfspaces", Halfspaces)):
        if s.startswith(prefix):
            rest = s[len(prefix):].lstrip("-:_")
            if not rest.isdigit():
                raise ContractError(f"class {spec!r}: expected a dimension after {prefix}")
            return ctor(int(rest))
    raise ContractError(f"unknown base class {spec!r}")


# --- enumeration helpers ---------------------------------------------------


class _EnumerationCache:
    """LRU map (class key, exact points) -> sorted restriction list."""

    def __init__(self, size: int = 512):
        self.size = size
        self.data: OrderedDict = OrderedDict()
        self.lock = threading.Lock()

    def get(self, cls: "BaseClass", points: tuple) -> tuple:
        key = (cls.cache_key, points)
        with self.lock:
            if key in self.data:
                self.data.move_to_end(key)
                return self.data[key]
        table = cls._enumerate(points)
        for pat in list(table):
            neg = negate(pat)
            if neg not in table:
                table[neg] = _negated_desc(table[pat])
        result = tuple(sorted(table.items()))
        with self.lock:
            self.data[key] = result
            if len(self.data) > self.size:
                self.data.popitem(last=False)
        return result


_CACHE = _EnumerationCache()


def _cached_enumeration(cls: "BaseClass", points: tuple) -> tuple:
    return _CACHE.get(cls, points)


def _points_of(sample) -> list:
    if isinstance(sample, LabeledSample):
        return list(sample.points)
    return [tuple(to_fraction(c) for c in (p if isinstance(p, (list, tuple)) else (p,))) for p in sample]


def _negated_desc(desc: HypothesisDesc) -> HypothesisDesc:
    if desc.kind in ("threshold", "stump"):
        # sign(-s(x - t)) differs from -sign(s(x - t)) only at x == t, which sweeps avoid
        return HypothesisDesc(desc.kind, sign=-desc.sign, axis=desc.axis, threshold=desc.threshold)
    raise ContractError(f"cannot negate {desc.kind} witness")


def _axis_sweep(points, axis: int, kind: str) -> dict:
    """All threshold patterns along one coordinate, both orientations."""
    values = sorted({p[axis] for p in points})
    cuts = [values[0] - 1]
    cuts += [(a + b) / 2 for a, b in zip(values, values[1:])]
    cuts.append(values[-1] + 1)
    table: dict = {}
    for s in (1, -1):
        for t in cuts:
            pat = tuple(_sign(s * (p[axis] - t)) for p in points)
            table.setdefault(pat, HypothesisDesc(kind, sign=s, axis=axis, threshold=t))
    return table


def _rref(rows: list, ncols: int):
    """Reduced row echelon form over the rationals; returns (matrix, pivots)."""
    m = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [v / pv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def _nullspace(rows: list, ncols: int) -> list:
    red, pivots = _rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(red, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def _canonical_hyperplane(v: list) -> tuple:
    lead = next(x for x in v if x != 0)
    return tuple(x / lead for x in v)


def _halfspace_dichotomies(points: list, k: int) -> dict:
    """Map every dichotomy of ``points`` realizable by sign(w.x + b) in R^k
    to a witness (w, b).

    Every non-constant separable dichotomy is realized by perturbing a
    hyperplane through k affinely independent points; the points lying on that
    hyperplane then take any dichotomy realizable inside it, found by recursion
    one dimension down.  Point sets with a lower-dimensional affine hull are
    first mapped onto coordinates of that hull.
    """
    n = len(points)
    zero = tuple(Fraction(0) for _ in range(k))
    out = {
        tuple([1] * n): (zero, Fraction(1)),
        tuple([-1] * n): (zero, Fraction(-1)),
    }
    distinct = sorted(set(points))
    if k == 0 or len(distinct) == 1:
        return out

    base = distinct[0]
    diffs = [[a - b for a, b in zip(p, base)] for p in distinct[1:]]
    _, pivots = _rref(diffs, k)
    if len(pivots) < k:
        # affine hull has dimension len(pivots); pivot coordinates parametrize it
        sub_pts = [tuple(p[c] for c in pivots) for p in points]
        for pat, (u, c) in _halfspace_dichotomies(sub_pts, len(pivots)).items():
            w = [Fraction(0)] * k
            for coord, val in zip(pivots, u):
                w[coord] = val
            out.setdefault(pat, (tuple(w), c))
        return out

    seen_planes = set()
    for subset in itertools.combinations(distinct, k):
        ns = _nullspace([list(p) + [1] for p in subset], k + 1)
        if len(ns) != 1:
            continue
        plane = _canonical_hyperplane(ns[0])
        if plane in seen_planes:
            continue
        seen_planes.add(plane)
        w0, b0 = plane[:k], plane[k]
        drop = next(j for j in range(k) if w0[j] != 0)
        vals0 = [sum((wi * xi for wi, xi in zip(w0, p)), b0) for p in points]
        on = [i for i in range(n) if vals0[i] == 0]
        sub_pts = [tuple(c for j, c in enumerate(points[i]) if j != drop) for i in on]
        sub = _halfspace_dichotomies(sub_pts, k - 1)
        for orient in (1, -1):
            w = [orient * x for x in w0]
            b = orient * b0
            vals = [orient * v for v in vals0]
            for sub_pat, (u, c) in sub.items():
                lift = list(u[:drop]) + [Fraction(0)] + list(u[drop:])
                g = [sum((ui * xi for ui, xi in zip(lift, p)), c) for p in points]
                off = [i for i in range(n) if vals[i] != 0]
                if off:
                    margin = min(abs(vals[i]) for i in off)
                    scale = max([Fraction(1)] + [abs(g[i]) for i in off])
                    eps = margin / (2 * scale)
                else:
                    eps = Fraction(1)
                ww = tuple(a + eps * bb for a, bb in zip(w, lift))
                bb0 = b + eps * c
                pat = tuple(_sign(vals[i] + eps * g[i]) for i in range(n))
                out.setdefault(pat, (ww, bb0))
    return out


# --- combinatorial parameters ----------------------------------------------


def sauer_bound(m: int, d: int) -> int:
    """sum_{i <= d} C(m, i)."""
    return sum(comb(m, i) for i in range(0, min(d, m) + 1))


VC_WORK_LIMIT = 2_000_000


def vc_dimension(patterns: Iterable[Sequence[int]], work_limit: int = VC_WORK_LIMIT) -> int:
    """Largest k such that some k indices are shattered by ``patterns``.

    Exhaustive level-wise search: shattered sets are closed under taking
    subsets, so a (k+1)-set is only examined when all its k-subsets were
    shattered.  Raises :class:`ContractError` when the search would examine
    more than ``work_limit`` candidate sets.
    """
    pats = {check_pattern(p) for p in patterns}
    if not pats:
        raise ContractError("vc_dimension needs a nonempty pattern set")
    m = len(next(iter(pats)))
    if any(len(p) != m for p in pats):
        raise ContractError("patterns have different lengths")
    if len(pats) < 2 or m == 0:
        return 0
    if m <= 64:
        masks = np.array([sum(1 << i for i, b in enumerate(p) if b > 0) for p in pats], dtype=np.uint64)

        def shattered(idx: tuple) -> bool:
            s = np.uint64(sum(1 << i for i in idx))
            return np.unique(masks & s).size == (1 << len(idx))

    else:
        big = [sum(1 << i for i, b in enumerate(p) if b > 0) for p in pats]

        def shattered(idx: tuple) -> bool:
            s = sum(1 << i for i in idx)
            return len({v & s for v in big}) == (1 << len(idx))

    level = [(i,) for i in range(m) if shattered((i,))]
    work = m
    best = 1 if level else 0
    while level:
        current = set(level)
        nxt = []
        for a in level:
            for j in range(a[-1] + 1, m):
                cand = a + (j,)
                if any(cand[:r] + cand[r + 1:] not in current for r in range(len(cand) - 1)):
                    continue
                work += 1
                if work > work_limit:
                    raise ContractError("vc_dimension size guard: search budget exceeded")
                if shattered(cand):
                    nxt.append(cand)
        if nxt:
            best = len(nxt[0])
        level = nxt
        if len(pats) < (1 << (best + 1)):
            break
    return best


def dual_vc_dimension(patterns: Iterable[Sequence[int]], work_limit: int = VC_WORK_LIMIT) -> int:
    """VC dimension of the transposed system (points acting on hypotheses)."""
    pats = sorted({check_pattern(p) for p in patterns})
    if not pats:
        raise ContractError("dual_vc_dimension needs a nonempty pattern set")
    m = len(pats[0])
    columns = {tuple(p[i] for p in pats) for i in range(m)}
    return vc_dimension(columns, work_limit=work_limit)


def integer_rank(rows: Iterable[Sequence[int]]) -> int:
    """Exact rank over Q of an integer matrix.

    Rows are reduced one at a time against an integer echelon basis, with each
    row divided by the gcd of its entries; numpy int64 is used while entries
    stay below 2**30, Python ints otherwise.
    """
    basis: list = []  # (pivot column, row as list/array)
    use_obj = False
    for raw in rows:
        row = np.array(list(raw), dtype=object if use_obj else np.int64)
        for pc, brow in basis:
            a = row[pc]
            if a == 0:
                continue
            p = brow[pc]
            if not use_obj and (abs(int(a)) > 2**30 or abs(int(p)) > 2**30 or np.abs(row).max() > 2**30):
                use_obj = True
                row = row.astype(object)
                basis = [(c, r.astype(object)) for c, r in basis]
                brow = dict(basis)[pc]
            row = row * p - brow * a
        nz = np.nonzero(row)[0]
        if nz.size == 0:
            continue
        g = 0
        for v in row[nz]:
            g = gcd(g, int(v))
        if g > 1:
            row = row // g
        basis.append((int(nz[0]), row))
    return len(basis)


def span_rank(cls: BaseClass, points: Sequence) -> int:
    """Rank over Q of the matrix whose rows are the class's restrictions.

    Rank equal to ``len(points)`` certifies that every labeling of the points
    is gamma-realizable for some gamma > 0.
    """
    pats = [p for p, _ in cls.enumerate_restrictions(points)]
    # b and -b span the same line
    half = sorted({max(p, negate(p)) for p in pats})
    return integer_rank(half)
