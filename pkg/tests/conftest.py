import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from uhlmann_thermal import Creutz, build_open_chain, eigh

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# filled by tests/test_acceptance.py, printed after the run
ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def creutz_chains():
    """Open Creutz chains of 500 cells with their eigensystems, diagonalized once per session."""
    out = {}
    for M in (0.1, 1.0001, 1.5):
        chain = build_open_chain(Creutz(M=M), 500)
        out[M] = (chain, eigh(chain))
    return out
