import numpy as np
import pytest

from jsrnorm.extremal import EXAMPLE_SMP_WORD, SmpCandidate, build_invariant_polytope, example_pair


@pytest.fixture(scope="session")
def pair():
    return example_pair()


@pytest.fixture(scope="session")
def example_ball(pair):
    return build_invariant_polytope(pair, SmpCandidate.from_word(pair, EXAMPLE_SMP_WORD)).ball


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# one line per acceptance criterion, filled in by test_acceptance.py
ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
