"""Dense exact-rational simplex with Bland's rule.

The solver keeps a dictionary (only the nonbasic columns are stored), so a
problem with ``r`` constraints and ``n`` structural variables costs ``O(r*n)``
Fraction operations per pivot.  Bland's smallest-index rule for both the
entering and the leaving variable guarantees termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class LPError(RuntimeError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


@dataclass
class LPResult:
    objective: Fraction
    x: list
    # dual values of the <= constraints (nonnegative at a maximum)
    duals_ub: list = field(default_factory=list)
    pivots: int = 0


class _Dictionary:
    """x_B = b - A x_N ;  z = z0 + c . x_N   (maximize)."""

    def __init__(self, A, b, basic, nonbasic):
        self.A = A
        self.b = b
        self.basic = basic
        self.nonbasic = nonbasic
        self.c = [ZERO] * len(nonbasic)
        self.z = ZERO
        self.pivots = 0

    def pivot(self, r: int, s: int) -> None:
        A, b, c = self.A, self.b, self.c
        row = A[r]
        piv = row[s]
        inv = ONE / piv
        new_row = [v * inv for v in row]
        new_row[s] = inv
        br = b[r] * inv
        for i, other in enumerate(A):
            if i == r:
                continue
            f = other[s]
            if f == 0:
                continue
            for j, v in enumerate(new_row):
                if v:
                    other[j] -= f * v
            other[s] = -f * inv
            b[i] -= f * br
        cs = c[s]
        if cs:
            for j, v in enumerate(new_row):
                if v:
                    c[j] -= cs * v
            c[s] = -cs * inv
            self.z += cs * br
        A[r] = new_row
        b[r] = br
        self.basic[r], self.nonbasic[s] = self.nonbasic[s], self.basic[r]
        self.pivots += 1

    def optimize(self, max_pivots: int = 1_000_000) -> None:
        while True:
            entering = None
            for j, cj in enumerate(self.c):
                if cj > 0 and (entering is None or self.nonbasic[j] < self.nonbasic[entering]):
                    entering = j
            if entering is None:
                return
            leave = None
            best = None
            for i, row in enumerate(self.A):
                a = row[entering]
                if a > 0:
                    ratio = self.b[i] / a
                    if (
                        best is None
                        or ratio < best
                        or (ratio == best and self.basic[i] < self.basic[leave])
                    ):
                        best, leave = ratio, i
            if leave is None:
                raise Unbounded("objective is unbounded")
            self.pivot(leave, entering)
            if self.pivots > max_pivots:
                raise LPError("pivot limit exceeded")


def solve(
    c: Sequence,
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
) -> LPResult:
    """Maximize ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``x >= 0``.

    Two-phase simplex in exact arithmetic.  Raises :class:`Infeasible` or
    :class:`Unbounded`.
    """
    n = len(c)
    c = [Fraction(v) for v in c]
    n_ub, n_eq = len(A_ub), len(A_eq)
    if len(b_ub) != n_ub or len(b_eq) != n_eq:
        raise ValueError("constraint matrix and right-hand side lengths differ")
    # variable ids: 0..n-1 structural, n..n+n_ub-1 slacks, then artificials
    rows, rhs, basic = [], [], []
    nonbasic = list(range(n))
    flipped_slacks = []
    art_rows = []
    next_art = n + n_ub
    for i in range(n_ub):
        coeffs = [Fraction(v) for v in A_ub[i]]
        if len(coeffs) != n:
            raise ValueError("A_ub row has wrong length")
        bi = Fraction(b_ub[i])
        if bi >= 0:
            rows.append(coeffs)
            rhs.append(bi)
            basic.append(n + i)
        else:
            rows.append([-v for v in coeffs])
            rhs.append(-bi)
            flipped_slacks.append((len(rows) - 1, n + i))
            basic.append(next_art)
            art_rows.append(len(rows) - 1)
            next_art += 1
    for i in range(n_eq):
        coeffs = [Fraction(v) for v in A_eq[i]]
        if len(coeffs) != n:
            raise ValueError("A_eq row has wrong length")
        bi = Fraction(b_eq[i])
        sgn = 1 if bi >= 0 else -1
        rows.append([sgn * v for v in coeffs])
        rhs.append(sgn * bi)
        basic.append(next_art)
        art_rows.append(len(rows) - 1)
        next_art += 1
    # flipped row: -A x - s + art = -b, so s has dictionary coefficient -1
    for r, sid in flipped_slacks:
        nonbasic.append(sid)
        for i, row in enumerate(rows):
            row.append(-ONE if i == r else ZERO)

    d = _Dictionary(rows, rhs, basic, nonbasic)
    first_art = n + n_ub
    if art_rows:
        # phase 1: maximize -(sum of artificials)
        d.c = [sum((d.A[i][j] for i in art_rows), ZERO) for j in range(len(d.nonbasic))]
        d.z = -sum((d.b[i] for i in art_rows), ZERO)
        d.optimize()
        if d.z < 0:
            raise Infeasible("constraints are infeasible")
        # drive zero-level artificials out of the basis
        i = 0
        while i < len(d.basic):
            if d.basic[i] >= first_art:
                col = next(
                    (j for j, v in enumerate(d.A[i]) if v != 0 and d.nonbasic[j] < first_art),
                    None,
                )
                if col is None:
                    del d.A[i], d.b[i], d.basic[i]
                    continue
                d.pivot(i, col)
            i += 1
        keep = [j for j, v in enumerate(d.nonbasic) if v < first_art]
        d.A = [[row[j] for j in keep] for row in d.A]
        d.nonbasic = [d.nonbasic[j] for j in keep]

    # phase 2 objective in terms of the current nonbasic variables
    cost = lambda v: c[v] if v < n else ZERO  # noqa: E731
    d.c = [cost(v) for v in d.nonbasic]
    d.z = ZERO
    for i, v in enumerate(d.basic):
        cv = cost(v)
        if cv:
            d.z += cv * d.b[i]
            for j, a in enumerate(d.A[i]):
                if a:
                    d.c[j] -= cv * a
    d.optimize()

    x = [ZERO] * n
    for i, v in enumerate(d.basic):
        if v < n:
            x[v] = d.b[i]
    duals = [ZERO] * n_ub
    for j, v in enumerate(d.nonbasic):
        if n <= v < n + n_ub:
            duals[v - n] = -d.c[j]
    return LPResult(objective=d.z, x=x, duals_ub=duals, pivots=d.pivots)


@dataclass
class GameSolution:
    value: Fraction
    row_strategy: list  # maximizer's mixture over rows
    col_strategy: list  # minimizer's distribution over columns
    pivots: int


def solve_zero_sum(payoff: Sequence[Sequence]) -> GameSolution:
    """Exact value of the zero-sum game ``max_q min_p q^T M p``.

    Rows are the maximizer's pure strategies.  Entries are shifted to be
    positive, the minimizer's LP ``max 1.w  s.t.  M' w <= 1, w >= 0`` is
    solved (its origin is feasible, so no phase 1 is needed) and the
    maximizer's mixture is read off the duals of the row constraints.
    """
    if not payoff or not payoff[0]:
        raise ValueError("empty payoff matrix")
    ncols = len(payoff[0])
    M = [[Fraction(v) for v in row] for row in payoff]
    if any(len(row) != ncols for row in M):
        raise ValueError("ragged payoff matrix")
    low = min(min(row) for row in M)
    shift = ONE - low if low <= 0 else ZERO
    A = [[v + shift for v in row] for row in M]
    res = solve([ONE] * ncols, A_ub=A, b_ub=[ONE] * len(A))
    if res.objective <= 0:
        raise LPError("degenerate game LP")
    shifted_value = ONE / res.objective
    p = [w * shifted_value for w in res.x]
    q = [y * shifted_value for y in res.duals_ub]
    return GameSolution(value=shifted_value - shift, row_strategy=q, col_strategy=p, pivots=res.pivots)
