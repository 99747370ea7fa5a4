import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qloss.bcs import GapModel  # noqa: E402
from qloss.materials import get_material  # noqa: E402

# acceptance lines collected by tests/test_acceptance.py, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def tin_entry():
    return get_material("TiN")


@pytest.fixture(scope="session")
def al_entry():
    return get_material("Al")


@pytest.fixture(scope="session")
def tin_gm(tin_entry):
    return GapModel(tin_entry.material)


@pytest.fixture(scope="session")
def al_gm(al_entry):
    return GapModel(al_entry.material)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
