import pytest

from sstar.valmodel import make_model

PRIMES = {1: (2,), 2: (2, 3), 3: (2, 3, 5), 4: (2, 3, 5, 7)}


def model(k):
    return make_model(PRIMES[k])


@pytest.fixture
def m1():
    return model(1)


@pytest.fixture
def m2():
    return model(2)


@pytest.fixture
def m3():
    return model(3)


@pytest.fixture
def m4():
    return model(4)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        status, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2} {status}: {title}")
