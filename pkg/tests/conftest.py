import functools

import pytest

from mmwave_densify import default_params
from mmwave_densify.mc import McConfig, simulate_load


@pytest.fixture
def params():
    return default_params()


@functools.lru_cache(maxsize=None)
def simulated_load(psi, k, trials=100_000, seed=2024):
    """Shared between the load tests and the acceptance suite (the runs are slow)."""
    return simulate_load(default_params(psi=psi, k=k), McConfig(trials=trials, seed=seed))


ACCEPTANCE = {}


def record(n, ok, detail):
    """Remember one acceptance verdict; printed again in the session summary."""
    line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
    ACCEPTANCE[n] = line
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[n])
