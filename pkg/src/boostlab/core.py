"""Shared domain types: labeled samples, distributions, patterns, correlations.

Coordinates and weights are kept as :class:`fractions.Fraction` so that every
certificate-bearing computation downstream stays exact.  Floats handed to the
constructors are converted exactly (``Fraction(0.1)`` is the binary value, not
1/10), so pass ``"1/10"`` strings when a decimal is meant.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from pathlib import Path
from typing import Iterable, Sequence

Pattern = tuple  # tuple of +1/-1 ints
Point = tuple  # tuple of Fractions


class ContractError(ValueError):
    """Raised when an operation's preconditions are violated."""


def to_fraction(value) -> Fraction:
    """Parse ints, Fractions, floats and ``"p/q"`` / decimal strings exactly."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ContractError(f"non-finite coordinate {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ContractError(f"cannot parse rational {value!r}") from exc
    raise ContractError(f"unsupported numeric type {type(value).__name__}")


def parse_rational_strict(text: str) -> Fraction:
    """Parse an exact ``p/q`` (or integer) string; decimals are rejected."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ContractError(f"expected an exact rational like 1/3, got {text!r}")
    return to_fraction(text)


def fmt_fraction(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def check_pattern(bits: Iterable[int]) -> Pattern:
    bits = tuple(int(b) for b in bits)
    for b in bits:
        if b not in (1, -1):
            raise ContractError(f"pattern entries must be +1/-1, got {b}")
    return bits


def negate(pattern: Pattern) -> Pattern:
    return tuple(-b for b in pattern)


def pattern_str(pattern: Sequence[int]) -> str:
    return "".join("+" if b > 0 else "-" for b in pattern)


def parse_pattern_str(text: str) -> Pattern:
    try:
        return tuple({"+": 1, "-": -1}[ch] for ch in text)
    except KeyError as exc:
        raise ContractError(f"bad signature string {text!r}") from exc


@dataclass(frozen=True)
class LabeledSample:
    """A finite sequence of (point, label) pairs.

    Duplicate points are allowed as long as they carry the same label; a point
    that appears with both labels can never be separated by any hypothesis
    class, so such samples are rejected here rather than deep inside a fit.
    """

    points: tuple
    labels: tuple
    dim: int

    def __init__(self, points, labels, dim: int | None = None):
        pts = tuple(tuple(to_fraction(c) for c in _as_coords(p)) for p in points)
        labs = check_pattern(labels)
        if len(pts) != len(labs):
            raise ContractError(f"{len(pts)} points but {len(labs)} labels")
        if dim is None:
            if not pts:
                raise ContractError("cannot infer dimension of an empty sample")
            dim = len(pts[0])
        if dim < 1:
            raise ContractError("dimension must be positive")
        for p in pts:
            if len(p) != dim:
                raise ContractError(f"point {p} does not have dimension {dim}")
        seen: dict = {}
        for i, (p, y) in enumerate(zip(pts, labs)):
            j = seen.setdefault(p, i)
            if labs[j] != y:
                raise ContractError(
                    f"duplicate point {tuple(map(fmt_fraction, p))} carries both labels "
                    f"(indices {j} and {i}); no hypothesis class can separate it"
                )
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labs)
        object.__setattr__(self, "dim", dim)

    def __len__(self) -> int:
        return len(self.labels)

    def relabel(self, labels) -> "LabeledSample":
        return LabeledSample(self.points, labels, self.dim)

    def subsample(self, indices: Sequence[int]) -> "LabeledSample":
        return LabeledSample([self.points[i] for i in indices], [self.labels[i] for i in indices], self.dim)


def _as_coords(p):
    if isinstance(p, (list, tuple)):
        return p
    return (p,)


def check_distribution(weights, m: int | None = None, exact: bool = True) -> tuple:
    """Validate a distribution over sample indices and return it as a tuple.

    Exact mode requires Fractions summing to exactly one; float mode allows a
    1e-12 slack.
    """
    if exact:
        w = tuple(to_fraction(x) for x in weights)
        total = sum(w, Fraction(0))
        ok = total == 1
    else:
        w = tuple(float(x) for x in weights)
        total = sum(w)
        ok = abs(total - 1.0) <= 1e-12
    if m is not None and len(w) != m:
        raise ContractError(f"distribution has length {len(w)}, sample has {m}")
    if any(x < 0 for x in w):
        raise ContractError("distribution weights must be nonnegative")
    if not ok:
        raise ContractError(f"distribution sums to {total}, not 1")
    return w


def uniform(m: int) -> tuple:
    return tuple(Fraction(1, m) for _ in range(m))


def correlation(sample: LabeledSample, q: Sequence, pattern: Sequence[int]):
    """Return sum_i q_i * y_i * pattern_i (exact for rational weights)."""
    m = len(sample)
    if len(q) != m or len(pattern) != m:
        raise ContractError(
            f"length mismatch: sample {m}, distribution {len(q)}, pattern {len(pattern)}"
        )
    total = Fraction(0) if all(isinstance(x, (int, Fraction)) for x in q) else 0.0
    for qi, yi, bi in zip(q, sample.labels, pattern):
        if yi == bi:
            total += qi
        else:
            total -= qi
    return total


def signature(hypotheses: Sequence[Sequence[int]], index: int) -> Pattern:
    """The column (b_1(x_i), ..., b_T(x_i)) of the hypothesis patterns."""
    if hypotheses:
        m = len(hypotheses[0])
        if any(len(h) != m for h in hypotheses):
            raise ContractError("hypothesis patterns have different lengths")
        if not 0 <= index < m:
            raise ContractError(f"index {index} out of range for patterns of length {m}")
    return tuple(h[index] for h in hypotheses)


def signatures(hypotheses: Sequence[Sequence[int]], m: int) -> list:
    return [signature(hypotheses, i) for i in range(m)] if hypotheses else [()] * m


def cells(hypotheses: Sequence[Sequence[int]], m: int) -> dict:
    """Group sample indices by signature."""
    groups: dict = {}
    for i, sig in enumerate(signatures(hypotheses, m)):
        groups.setdefault(sig, []).append(i)
    return groups


# --- CSV I/O -----------------------------------------------------------------


def read_sample_csv(path) -> LabeledSample:
    """Read ``x_1..x_d,label`` rows (header required)."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ContractError(f"{path}: empty file")
    header, body = rows[0], [r for r in rows[1:] if r]
    if len(header) < 2 or header[-1].strip().lower() not in ("label", "y"):
        raise ContractError(f"{path}: header must be x_1..x_d,label")
    dim = len(header) - 1
    points, labels = [], []
    for lineno, row in enumerate(body, start=2):
        if len(row) != dim + 1:
            raise ContractError(f"{path}:{lineno}: expected {dim + 1} columns")
        points.append(tuple(to_fraction(c) for c in row[:dim]))
        try:
            labels.append(int(row[dim]))
        except ValueError as exc:
            raise ContractError(f"{path}:{lineno}: bad label {row[dim]!r}") from exc
    if not points:
        raise ContractError(f"{path}: no examples")
    return LabeledSample(points, labels, dim)


def read_points_csv(path) -> list:
    """Read unlabeled ``x_1..x_d`` rows; a trailing label column is ignored."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise ContractError(f"{path}: need a header and at least one point")
    header = rows[0]
    dim = len(header)
    if header[-1].strip().lower() in ("label", "y"):
        dim -= 1
    return [tuple(to_fraction(c) for c in row[:dim]) for row in rows[1:]]


def sample_to_csv(sample: LabeledSample) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x_{k + 1}" for k in range(sample.dim)] + ["label"])
    for p, y in zip(sample.points, sample.labels):
        w.writerow([fmt_fraction(c) for c in p] + [y])
    return buf.getvalue()


def atomic_write(path, data: str | bytes) -> None:
    """Write to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
