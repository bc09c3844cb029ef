from pathlib import Path

import pytest

from resistive_sift.pgm import read_pgm

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def camera64():
    return read_pgm(DATA / "camera64.pgm")


@pytest.fixture(scope="session")
def camera256():
    return read_pgm(DATA / "camera256.pgm")


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
