"""Graph Separation Boosting.

The algorithm keeps the graph whose edges join oppositely labeled examples
that no weak hypothesis has split yet.  Each round reweights the sample in
proportion to vertex degree, asks the weak learner for a hypothesis, and
drops the edges that hypothesis cuts.  When no edge is left the hypotheses
separate the sample and a lookup table over signatures is a consistent
aggregation.

Edges are never stored.  Two indices are joined exactly when they share a
signature and disagree on the label, so the degree of ``i`` is the number of
opposite-label indices in its cell, and one hashing pass over the sample
recomputes every degree after a round.
"""

from __future__ import annotations

import csv
import io
import json
import math
import subprocess
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .base_classes import BaseClass, HypothesisDesc, dual_vc_dimension, evaluate, sauer_bound
from .core import ContractError, LabeledSample, fmt_fraction, pattern_str, parse_pattern_str

FULL_ERM = "full-erm"
SAMPLED = "sampled"
UNSEEN_NEGATIVE = "negative"
UNSEEN_NEAREST = "nearest"


class BoostError(RuntimeError):
    """A fit could not finish (round budget exhausted or no progress)."""


class InvariantViolation(AssertionError):
    """A per-round guarantee of the algorithm failed; indicates a bug."""


# --- edge graph ----------------------------------------------------------------


@dataclass(frozen=True)
class EdgeGraphState:
    """Cells of the current signature partition and the induced degrees.

    ``cell_ids[i]`` numbers the cell of index ``i``; ``patterns`` holds the
    restrictions b_1..b_t, so the signature of ``i`` is column ``i`` of it.
    """

    round: int
    labels: tuple
    patterns: tuple
    cell_ids: tuple
    degrees: tuple
    remaining_edges: int

    @property
    def signatures(self) -> list:
        return [tuple(p[i] for p in self.patterns) for i in range(len(self.labels))]

    def num_cells(self) -> int:
        return len(set(self.cell_ids))


def _partition(labels: Sequence[int], cell_ids: Sequence[int]) -> tuple[tuple, int]:
    pos: dict = {}
    neg: dict = {}
    for c, y in zip(cell_ids, labels):
        if y > 0:
            pos[c] = pos.get(c, 0) + 1
        else:
            neg[c] = neg.get(c, 0) + 1
    degrees = tuple(neg.get(c, 0) if y > 0 else pos.get(c, 0) for c, y in zip(cell_ids, labels))
    edges = sum(n * neg.get(c, 0) for c, n in pos.items())
    return degrees, edges


def initial_state(labels: Sequence[int]) -> EdgeGraphState:
    labels = tuple(labels)
    cell_ids = (0,) * len(labels)
    degrees, edges = _partition(labels, cell_ids)
    return EdgeGraphState(0, labels, (), cell_ids, degrees, edges)


def refine(state: EdgeGraphState, pattern: Sequence[int]) -> EdgeGraphState:
    """Split every cell by the sign of ``pattern``; recompute degrees in O(m)."""
    pattern = tuple(pattern)
    if len(pattern) != len(state.labels):
        raise ContractError(f"pattern has length {len(pattern)}, sample has {len(state.labels)}")
    renumber: dict = {}
    cell_ids = tuple(renumber.setdefault((c, b), len(renumber)) for c, b in zip(state.cell_ids, pattern))
    degrees, edges = _partition(state.labels, cell_ids)
    return EdgeGraphState(state.round + 1, state.labels, state.patterns + (pattern,), cell_ids, degrees, edges)


def state_from_patterns(labels: Sequence[int], patterns: Sequence[Sequence[int]]) -> EdgeGraphState:
    state = initial_state(labels)
    for p in patterns:
        state = refine(state, p)
    return state


def degree_distribution(state: EdgeGraphState) -> tuple:
    """P_i = deg(i) / sum of degrees, as exact fractions."""
    if state.remaining_edges == 0:
        raise ContractError("degree distribution is undefined once every edge is removed")
    total = 2 * state.remaining_edges
    return tuple(Fraction(d, total) for d in state.degrees)


def separates(hypotheses: Sequence[Sequence[int]], sample) -> bool:
    """True iff every opposite-label pair is split by some hypothesis."""
    labels = sample.labels if isinstance(sample, LabeledSample) else tuple(sample)
    for h in hypotheses:
        if len(h) != len(labels):
            raise ContractError("hypothesis length differs from sample size")
    return state_from_patterns(labels, hypotheses).remaining_edges == 0


# --- weak learners -----------------------------------------------------------


class ErmLearner:
    """Exact empirical risk minimization over the class's restrictions.

    Restrictions to the training sample are enumerated once.  A query with
    integer weights ``w`` returns the pattern maximizing sum_i w_i y_i b_i; the
    sorted enumeration order makes ``argmax`` pick the lexicographically
    smallest maximizer (with -1 < +1).  Running ERM on a subsample is the same
    query with multiplicities as weights, since every hypothesis's behavior on
    the subsample is a projection of its full restriction.
    """

    def __init__(self, cls: BaseClass, sample: LabeledSample):
        self.cls = cls
        self.sample = sample
        self.restrictions = cls.enumerate_restrictions(sample)
        self.patterns = [p for p, _ in self.restrictions]
        self.matrix = np.array(self.patterns, dtype=np.int64)
        self.labels = np.array(sample.labels, dtype=np.int64)
        self.index = {p: k for k, p in enumerate(self.patterns)}

    def best(self, weights: np.ndarray) -> tuple[tuple, HypothesisDesc, int]:
        scores = self.matrix @ (np.asarray(weights, dtype=np.int64) * self.labels)
        k = int(np.argmax(scores))
        return self.patterns[k], self.restrictions[k][1], int(scores[k])

    def full(self, state: EdgeGraphState) -> tuple[tuple, HypothesisDesc]:
        pat, desc, _ = self.best(np.array(state.degrees, dtype=np.int64))
        return pat, desc

    def sampled(self, indices: np.ndarray) -> tuple[tuple, HypothesisDesc]:
        counts = np.bincount(indices, minlength=len(self.sample))
        pat, desc, _ = self.best(counts)
        return pat, desc


class ExternalLearner:
    """Weak learner run as a child process, once per round.

    Full-ERM rounds send ``index,weight,x_1..x_d,label`` rows with the weight
    as ``p/q``; sampled rounds send ``x_1..x_d,label`` rows of the draw.  Both
    carry a header.  The child prints one hypothesis JSON object on stdout.
    """

    def __init__(self, command: Sequence[str], timeout: float = 60.0):
        if not command:
            raise ContractError("external learner command is empty")
        self.command = list(command)
        self.timeout = timeout
        self.class_patterns: set | None = None  # filled in by fit

    def query(self, text: str) -> HypothesisDesc:
        try:
            proc = subprocess.run(
                self.command, input=text, capture_output=True, text=True, timeout=self.timeout, check=False
            )
        except subprocess.TimeoutExpired as exc:
            raise BoostError(f"external learner timed out after {self.timeout}s") from exc
        except OSError as exc:
            raise BoostError(f"cannot run external learner: {exc}") from exc
        if proc.returncode != 0:
            raise BoostError(f"external learner exited with {proc.returncode}: {proc.stderr.strip()}")
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        if len(lines) != 1:
            raise ContractError(f"external learner must print one JSON line, got {len(lines)}")
        try:
            return HypothesisDesc.from_json(json.loads(lines[0]))
        except (json.JSONDecodeError, ContractError) as exc:
            raise ContractError(f"external learner returned a malformed hypothesis: {exc}") from exc

    def weighted_csv(self, sample: LabeledSample, weights: Sequence[Fraction]) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "weight"] + [f"x_{k + 1}" for k in range(sample.dim)] + ["label"])
        for i, (p, y) in enumerate(zip(sample.points, sample.labels)):
            w.writerow([i, fmt_fraction(weights[i])] + [fmt_fraction(c) for c in p] + [y])
        return buf.getvalue()

    def sampled_csv(self, sample: LabeledSample, indices) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x_{k + 1}" for k in range(sample.dim)] + ["label"])
        for i in indices:
            w.writerow([fmt_fraction(c) for c in sample.points[i]] + [sample.labels[i]])
        return buf.getvalue()


# --- model -------------------------------------------------------------------


@dataclass(frozen=True)
class BoostModel:
    hypotheses: tuple
    cell_table: dict  # signature string -> +1/-1
    mode: str
    m0: int | None = None
    unseen_rule: str = UNSEEN_NEGATIVE
    edge_history: tuple = ()  # remaining edges before round 1, after round 1, ...

    @property
    def rounds(self) -> int:
        return len(self.hypotheses)

    def to_json(self) -> dict:
        return {
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "cell_table": {k: self.cell_table[k] for k in sorted(self.cell_table)},
            "rounds": self.rounds,
            "mode": self.mode,
            "m0": self.m0,
            "unseen_rule": self.unseen_rule,
            "edge_history": list(self.edge_history),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: dict) -> "BoostModel":
        try:
            hyps = tuple(HypothesisDesc.from_json(h) for h in d["hypotheses"])
            table = {str(k): int(v) for k, v in d["cell_table"].items()}
        except (KeyError, TypeError, AttributeError) as exc:
            raise ContractError(f"malformed model: {exc}") from exc
        for k, v in table.items():
            parse_pattern_str(k)
            if len(k) != len(hyps) or v not in (1, -1):
                raise ContractError(f"bad cell table entry {k!r}: {v!r}")
        if d.get("rounds", len(hyps)) != len(hyps):
            raise ContractError("model rounds disagree with the hypothesis list")
        rule = d.get("unseen_rule", UNSEEN_NEGATIVE)
        if rule not in (UNSEEN_NEGATIVE, UNSEEN_NEAREST):
            raise ContractError(f"unknown unseen-signature rule {rule!r}")
        return cls(hyps, table, d.get("mode", FULL_ERM), d.get("m0"), rule, tuple(d.get("edge_history", ())))


def build_cell_table(labels: Sequence[int], patterns: Sequence[Sequence[int]]) -> dict:
    """+1 for a signature iff some positive example carries it, else -1."""
    table: dict = {}
    for i, y in enumerate(labels):
        key = pattern_str(tuple(p[i] for p in patterns))
        if y > 0:
            table[key] = 1
        else:
            table.setdefault(key, -1)
    return table


def model_signature(model: BoostModel, x) -> str:
    return pattern_str(tuple(evaluate(h, x) for h in model.hypotheses))


def predict(model: BoostModel, x, rule: str | None = None) -> int:
    """Label of ``x``'s signature; unseen signatures go through ``rule``.

    ``negative`` answers -1.  ``nearest`` takes the label of the known
    signature at least Hamming distance and answers -1 on a label tie.
    """
    sig = model_signature(model, x)
    if sig in model.cell_table:
        return model.cell_table[sig]
    rule = rule or model.unseen_rule
    if rule == UNSEEN_NEGATIVE or not model.cell_table:
        return -1
    if rule != UNSEEN_NEAREST:
        raise ContractError(f"unknown unseen-signature rule {rule!r}")
    best, votes = None, set()
    for known, label in model.cell_table.items():
        dist = sum(a != b for a, b in zip(known, sig))
        if best is None or dist < best:
            best, votes = dist, {label}
        elif dist == best:
            votes.add(label)
    return 1 if votes == {1} else -1


def predict_many(model: BoostModel, points, rule: str | None = None) -> list:
    return [predict(model, x, rule) for x in points]


# --- fitting -----------------------------------------------------------------


def default_m0(vc: float, gamma) -> int:
    """ceil(32 (v + 1) / gamma^2); pass gamma/2 to follow the expected-edge convention."""
    gamma = Fraction(gamma)
    if gamma <= 0:
        raise ContractError("gamma must be positive")
    return math.ceil(Fraction(32) * Fraction(vc + 1) / (gamma * gamma))


def default_max_rounds(m: int, gamma=None) -> int:
    if gamma is None:
        return 10 * max(m, 1)
    return max(1, math.ceil(64 * 2 * math.log(max(m, 2)) / float(gamma)))


def round_bound_exact(m: int, gamma_star) -> float:
    """Rounds guaranteed when each round removes at least a gamma_star fraction."""
    pairs = m * (m - 1) // 2
    if pairs <= 1:
        return 1.0
    g = Fraction(gamma_star)
    if g >= 1:
        return 1.0
    return 1.0 + math.log(pairs) / -math.log1p(-float(g))


def round_bound_simple(m: int, gamma_star) -> float:
    return 2 * math.log(m) / float(gamma_star)


@dataclass
class RoundRecord:
    pattern: tuple
    correlation: Fraction | None
    edges_before: int
    edges_after: int


@dataclass
class FitTrace:
    records: list = field(default_factory=list)

    @property
    def edge_counts(self) -> list:
        if not self.records:
            return []
        return [self.records[0].edges_before] + [r.edges_after for r in self.records]


def boost_round(
    state: EdgeGraphState,
    sample: LabeledSample,
    weak,
    mode: str = FULL_ERM,
    rng=None,
    m0: int | None = None,
) -> tuple[HypothesisDesc, EdgeGraphState, RoundRecord]:
    """One round: reweight by degree, query the weak learner, drop cut edges."""
    if state.remaining_edges == 0:
        raise ContractError("boost_round called with no remaining edges")
    corr = None
    if mode == FULL_ERM:
        if isinstance(weak, ErmLearner):
            pattern, desc = weak.full(state)
        else:
            desc = weak.query(weak.weighted_csv(sample, degree_distribution(state)))
            pattern = None
        p = degree_distribution(state)
    elif mode == SAMPLED:
        if rng is None or not m0:
            raise ContractError("sampled mode needs an rng and a positive m0")
        cum = np.cumsum(np.array(state.degrees, dtype=np.int64))
        total = int(cum[-1])
        draws = np.floor(rng.random_array(m0) * total).astype(np.int64)
        indices = np.searchsorted(cum, draws, side="right")
        if isinstance(weak, ErmLearner):
            pattern, desc = weak.sampled(indices)
        else:
            desc = weak.query(weak.sampled_csv(sample, indices))
            pattern = None
        p = None
    else:
        raise ContractError(f"unknown mode {mode!r}")

    if pattern is None:
        try:
            pattern = tuple(evaluate(desc, x) for x in sample.points)
        except ContractError as exc:
            raise ContractError(f"weak learner returned an unusable hypothesis: {exc}") from exc
        learner_index = getattr(weak, "class_patterns", None)
        if learner_index is not None and pattern not in learner_index:
            raise ContractError("weak learner returned a hypothesis outside the class")
    if p is not None:
        corr = sum((pi * y * b for pi, y, b in zip(p, sample.labels, pattern)), Fraction(0))
    new_state = refine(state, pattern)
    return desc, new_state, RoundRecord(pattern, corr, state.remaining_edges, new_state.remaining_edges)


def _check_round(rec: RoundRecord, gamma_star) -> None:
    removed = rec.edges_before - rec.edges_after
    # removed fraction >= corr_P(b): each cut edge adds at most 2/(2E) to corr
    if rec.correlation is not None and Fraction(removed, rec.edges_before) < rec.correlation:
        raise InvariantViolation(
            f"removed {removed}/{rec.edges_before} edges but correlation was {rec.correlation}"
        )
    if gamma_star is not None and rec.correlation is not None and rec.correlation < gamma_star:
        raise InvariantViolation(f"ERM correlation {rec.correlation} below gamma* {gamma_star}")


def fit(
    sample: LabeledSample,
    cls: BaseClass,
    weak=None,
    mode: str = FULL_ERM,
    rng=None,
    max_rounds: int | None = None,
    m0: int | None = None,
    gamma=None,
    gamma_star=None,
    unseen_rule: str = UNSEEN_NEGATIVE,
    trace: FitTrace | None = None,
) -> BoostModel:
    """Run rounds until the hypotheses separate the sample.

    ``gamma`` is the user's edge parameter (sets the sampled-mode m0 and the
    default round budget).  ``gamma_star``, when known, turns on the
    per-round edge-decay assertions and the final round-count bound in
    full-ERM mode.
    """
    if unseen_rule not in (UNSEEN_NEGATIVE, UNSEEN_NEAREST):
        raise ContractError(f"unknown unseen-signature rule {unseen_rule!r}")
    m = len(sample)
    if weak is None:
        weak = ErmLearner(cls, sample)
    elif isinstance(weak, ExternalLearner):
        weak.class_patterns = {p for p, _ in cls.enumerate_restrictions(sample)}
    if max_rounds is None:
        max_rounds = default_max_rounds(m, gamma)
    if max_rounds < 1:
        raise ContractError("max_rounds must be at least 1")
    if mode == SAMPLED and m0 is None:
        if gamma is None:
            raise ContractError("sampled mode needs m0 or gamma")
        m0 = default_m0(cls.vc_estimate, gamma)
    gamma_star = None if gamma_star is None else Fraction(gamma_star)

    state = initial_state(sample.labels)
    hyps: list = []
    history = [state.remaining_edges]
    while state.remaining_edges > 0:
        if len(hyps) >= max_rounds:
            raise BoostError(
                f"{max_rounds} rounds used with {state.remaining_edges} edges left; "
                "the sample is not realizable with a useful edge or the weak learner is failing"
            )
        desc, new_state, rec = boost_round(state, sample, weak, mode, rng, m0)
        if mode == FULL_ERM:
            _check_round(rec, gamma_star)
            if rec.edges_after == rec.edges_before:
                raise BoostError(
                    f"round {len(hyps) + 1} removed no edge (best correlation {rec.correlation}); "
                    "the sample has zero edge against this class"
                )
        if trace is not None:
            trace.records.append(rec)
        hyps.append(desc)
        state = new_state
        history.append(state.remaining_edges)

    if mode == FULL_ERM and gamma_star is not None and gamma_star > 0 and hyps:
        T = len(hyps)
        if T > round_bound_exact(m, gamma_star) + 1e-9 or (m > 1 and T > round_bound_simple(m, gamma_star) + 1e-9):
            raise InvariantViolation(f"{T} rounds exceed the edge-decay bound for m={m}, gamma*={gamma_star}")

    table = build_cell_table(sample.labels, state.patterns)
    model = BoostModel(tuple(hyps), table, mode, m0 if mode == SAMPLED else None, unseen_rule, tuple(history))
    for x, y in zip(sample.points, sample.labels):
        if model.cell_table[model_signature(model, x)] != y:  # pragma: no cover - separation guarantees this
            raise InvariantViolation("fitted model misclassifies a training point")
    return model


def cell_count_check(model: BoostModel, sample: LabeledSample, cls: BaseClass) -> tuple[int, int]:
    """(distinct training signatures, sum_{i<=d*} C(T, i)) with d* the dual VC dimension."""
    dstar = dual_vc_dimension([p for p, _ in cls.enumerate_restrictions(sample)])
    return len(model.cell_table), sauer_bound(model.rounds, dstar)


def training_error(model: BoostModel, sample: LabeledSample) -> Fraction:
    wrong = sum(predict(model, x) != y for x, y in zip(sample.points, sample.labels))
    return Fraction(wrong, len(sample))
