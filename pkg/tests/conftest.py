import pytest

from netsr.meanfield import SystemParams
from netsr.netmodel import make_degree_model

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line per acceptance check for the terminal summary."""

    def _record(label, ok, detail=""):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {label}" + (f"  ({detail})" if detail else ""))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def random_net():
    return make_degree_model(4.0, 2.0, 300)


@pytest.fixture(scope="session")
def detuned_params():
    return SystemParams(omega0=792.0, delta=9.0, n_nodes=300)


@pytest.fixture(scope="session")
def resonant_params():
    return SystemParams(omega0=792.0, delta=0.0, n_nodes=300)
