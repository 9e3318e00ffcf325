import numpy as np
import pytest

from rakeroom.acoustics import Medium, MicArray
from rakeroom.geometry import Room


@pytest.fixture
def room():
    return Room.shoebox(4.0, 6.0, 0.9)


@pytest.fixture
def medium():
    return Medium()


@pytest.fixture
def circ12():
    return MicArray.circular((2.0, 1.5), 12, 0.15)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hpd(rng, M, cond=10.0):
    X = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    Q, _ = np.linalg.qr(X)
    ev = np.geomspace(1.0, cond, M)
    return (Q * ev) @ Q.conj().T


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
