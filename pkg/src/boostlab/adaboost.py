"""AdaBoost with a weighted-majority vote, used as the oracle-complexity baseline.

The weak learner is the same exact ERM used by graph separation boosting, so
round counts of the two algorithms are directly comparable.  Weights are
64-bit floats; alpha involves a logarithm and nothing downstream needs it
exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .base_classes import BaseClass, HypothesisDesc, evaluate
from .core import ContractError, LabeledSample

# alpha for a hypothesis with correlation 1; any value this large already
# makes that hypothesis outvote every other hypothesis in practice
ALPHA_CAP = 0.5 * math.log((1 + (1 - 1e-12)) / 1e-12)
EXCEEDED = "exceeded"
TIE_TOL = 1e-12


@dataclass(frozen=True)
class MajorityModel:
    hypotheses: tuple
    alphas: tuple
    reached_zero_error: bool = False
    budget_exhausted: bool = False
    correlations: tuple = ()
    rounds_used: int = 0  # weak-learner calls, including any dropped by the perfect-hypothesis shortcut

    def __post_init__(self):
        if len(self.hypotheses) != len(self.alphas):
            raise ContractError("hypotheses and alphas differ in length")

    @property
    def rounds(self) -> int:
        return len(self.hypotheses)

    def score(self, x) -> float:
        return float(sum(a * evaluate(h, x) for h, a in zip(self.hypotheses, self.alphas)))

    def predict(self, x) -> int:
        return 1 if self.score(x) >= 0 else -1

    def to_json(self) -> dict:
        return {
            "hypotheses": [h.to_json() for h in self.hypotheses],
            "alphas": [repr(a) for a in self.alphas],
            "reached_zero_error": self.reached_zero_error,
            "budget_exhausted": self.budget_exhausted,
            "rounds_used": self.rounds_used,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, d: dict) -> "MajorityModel":
        try:
            return cls(
                tuple(HypothesisDesc.from_json(h) for h in d["hypotheses"]),
                tuple(float(a) for a in d["alphas"]),
                bool(d.get("reached_zero_error", False)),
                bool(d.get("budget_exhausted", False)),
                rounds_used=int(d.get("rounds_used", len(d["hypotheses"]))),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ContractError(f"malformed majority model: {exc}") from exc


def _alpha(r: float) -> float:
    if r >= 1.0 - 1e-12:
        return ALPHA_CAP
    return 0.5 * math.log((1.0 + r) / (1.0 - r))


def adaboost_fit(sample: LabeledSample, cls: BaseClass, rounds: int) -> MajorityModel:
    """Run at most ``rounds`` rounds, stopping once training error reaches 0.

    Each round picks the restriction with the largest weighted correlation r
    (ties within TIE_TOL go to the lexicographically smallest pattern), sets
    alpha = 0.5 ln((1+r)/(1-r)) and multiplies w_i by exp(-alpha y_i b_i).
    Training error after every round is checked against prod sqrt(1-r^2).
    """
    if rounds < 0:
        raise ContractError("rounds must be nonnegative")
    rs = cls.enumerate_restrictions(sample)
    B = np.array([p for p, _ in rs], dtype=np.float64)
    y = np.array(sample.labels, dtype=np.float64)
    m = len(y)
    w = np.full(m, 1.0 / m)
    margins = B * y  # row k: y_i b_k(x_i)
    votes = np.zeros(m)
    hyps, alphas, corrs = [], [], []
    bound = 1.0
    done = False
    used = 0
    for _ in range(rounds):
        used += 1
        scores = margins @ w
        # near-ties within TIE_TOL count as ties so float noise cannot pick the winner
        k = int(np.flatnonzero(scores >= scores.max() - TIE_TOL)[0])
        r = float(scores[k])
        if r <= 0:
            raise ContractError(f"weak learner edge {r} is not positive; the sample has no edge")
        a = _alpha(r)
        hyps.append(rs[k][1])
        alphas.append(a)
        corrs.append(r)
        votes += a * B[k]
        if a == ALPHA_CAP:
            # a perfect hypothesis: return it alone so the vote is exactly it
            hyps, alphas, corrs = [rs[k][1]], [a], [r]
            votes = a * B[k]
            done = True
            break
        w = w * np.exp(-a * margins[k])
        w /= w.sum()
        if abs(w.sum() - 1.0) > 1e-12 or np.any(w < 0):  # pragma: no cover - normalization just happened
            raise AssertionError("AdaBoost weights left the simplex")
        bound *= math.sqrt(max(0.0, 1.0 - r * r))
        err = float(np.mean(np.where(votes >= 0, 1.0, -1.0) != y))
        if err > bound + 1e-9:
            raise AssertionError(f"training error {err} exceeds the product bound {bound}")
        if err == 0.0:
            done = True
            break
    return MajorityModel(tuple(hyps), tuple(alphas), done, not done, tuple(corrs), used)


def rounds_to_zero_error(sample: LabeledSample, cls: BaseClass, budget: int):
    """First round count with zero training error, or ``"exceeded"``."""
    if budget <= 0:
        return EXCEEDED
    model = adaboost_fit(sample, cls, budget)
    return model.rounds_used if model.reached_zero_error else EXCEEDED


def majority_training_error(model: MajorityModel, sample: LabeledSample) -> float:
    wrong = sum(model.predict(x) != y for x, y in zip(sample.points, sample.labels))
    return wrong / len(sample)
