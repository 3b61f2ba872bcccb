import random

import hypothesis
import pytest

from pnsynth import production_line
from pnsynth.random_nets import random_net

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("dev", max_examples=30, deadline=None)
hypothesis.settings.load_profile("dev")

ACCEPTANCE_LINES = []


@pytest.fixture
def net():
    return production_line()


@pytest.fixture
def s(net):
    """Production-line helper: state from name, e.g. s("P1P4P7")."""
    return net.parse_state


def corpus(n, seed=0):
    """``n`` random nets from a fixed seed sequence."""
    return [random_net(random.Random(seed * 100_003 + i)) for i in range(n)]


@pytest.fixture
def record():
    def _record(label, ok, detail=""):
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f": {detail}" if detail else ""))
        return ok
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
