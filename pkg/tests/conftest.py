import pytest

from symsquare.spaces import build_space, make_rp


@pytest.fixture(scope="session")
def torus():
    return build_space("torus")


@pytest.fixture(scope="session")
def rp():
    cache = {}

    def get(m):
        if m not in cache:
            cache[m] = make_rp(m)
        return cache[m]

    return get


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
