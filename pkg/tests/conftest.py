import itertools
from fractions import Fraction

import pytest

from boostlab.core import LabeledSample

_ACCEPTANCE_LINES: list = []


@pytest.fixture
def report():
    """Collects one summary line per acceptance criterion."""
    return _ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def alternating(m: int) -> LabeledSample:
    return LabeledSample(list(range(m)), [1 if i % 2 == 0 else -1 for i in range(m)])


def all_labelings(n: int):
    return itertools.product((1, -1), repeat=n)


def frac_list(*xs):
    return [Fraction(x) for x in xs]
