import pytest

from kmc.graph import build_state_graph
from kmc.scenario import build_usv_model


@pytest.fixture(scope="session")
def usv_model():
    return build_usv_model()


@pytest.fixture(scope="session")
def usv_graph(usv_model):
    return build_state_graph(usv_model)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
