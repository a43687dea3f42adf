from datetime import datetime

import pytest

from kmodel.history import LearningHistory, LearningRecord
from kmodel.tree import load_tree

_acceptance_results = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        _acceptance_results.append((name, status))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _acceptance_results:
        terminalreporter.write_line(f"[{status}] {name}")

# The worked five-record history used across the suite: durations in
# seconds, proportions as fractions, stops at minute precision.
TABLE_ROWS = [
    (1, datetime(2016, 2, 27, 18, 41), 1171, 0.0122),
    (2, datetime(2016, 2, 27, 18, 47), 220, 0.0212),
    (3, datetime(2016, 2, 29, 16, 8), 2523, 0.0117),
    (4, datetime(2016, 2, 29, 16, 55), 330, 0.0066),
    (5, datetime(2016, 3, 3, 16, 21), 1710, 0.0117),
]
EVAL_AT = datetime(2016, 3, 29, 19, 24, 0)

TREE_TEXT = """\
science
    formal sciences
        mathematics
            bayes rule
            conditional entropy
            posterior distribution
            lagrange multiplier
        computer science
            expectation maximization algorithm
            inverse document frequency
"""


@pytest.fixture
def table2_records():
    return [
        LearningRecord(sequence_id=s, stop_time=t, duration_seconds=d, proportion=p)
        for s, t, d, p in TABLE_ROWS
    ]


@pytest.fixture
def table2_history(table2_records):
    return LearningHistory("bayes-rule", tuple(table2_records))


@pytest.fixture
def science_tree(tmp_path):
    path = tmp_path / "tree.txt"
    path.write_text(TREE_TEXT, encoding="utf-8")
    return load_tree(path)
