import pytest

from instances import symmetric, two_point, one_class_pair, SYMMETRIC_HP
from csslm import KernelSpec, HyperParams, train

_ACCEPTANCE = []


@pytest.fixture
def criterion():
    """Record one acceptance line; lines are echoed in the terminal summary."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(line)
        _ACCEPTANCE.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sym_data():
    return symmetric()


@pytest.fixture(scope="session")
def sym_model(sym_data):
    return train(sym_data, KernelSpec.linear(), SYMMETRIC_HP)


@pytest.fixture(scope="session")
def deg_model():
    return train(two_point(), KernelSpec.linear(), HyperParams(0.25, 0.25, 1.0))


@pytest.fixture(scope="session")
def pair_model():
    return train(one_class_pair(), KernelSpec.linear(), HyperParams(0.5, 0.0, 1.0))
