import pytest

from dotchains.algebra import parse_structure
from dotchains.pointsets import PointSet, whole_space

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def F3():
    return parse_structure("Fp:3")


@pytest.fixture(scope="session")
def F5():
    return parse_structure("Fp:5")


@pytest.fixture(scope="session")
def F7():
    return parse_structure("Fp:7")


@pytest.fixture(scope="session")
def F9():
    return parse_structure("F:3^2")


@pytest.fixture(scope="session")
def Z9():
    return parse_structure("Z:3^2")


@pytest.fixture(scope="session")
def full_F3_2(F3):
    return whole_space(F3, 2)


@pytest.fixture(scope="session")
def three_points(F3):
    return PointSet.build(F3, 2, [(1, 0), (0, 1), (1, 1)])


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
