import hypothesis
import numpy as np
import pytest

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")

from gwbowv import taxonomy as tx


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def chain_tree():
    """a -> b -> c plus the shorter path a -> b."""
    return tx.build([["a", "b", "c"], ["a", "b"]])


@pytest.fixture
def toy_tree():
    """2 depth-1 nodes, 3 leaves at depth 2."""
    return tx.build([["r0", "x"], ["r0", "y"], ["r1", "x"]])


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n, passed, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
