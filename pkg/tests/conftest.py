import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qdsred.laurent import DEFAULT_LAMBDA, DEFAULT_Q

SEED = 20240611

settings.register_profile(
    "repo",
    derandomize=True,
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

# acceptance outcomes collected for the terminal summary: (number, title, passed, detail)
ACCEPTANCE_LINES: list[tuple[int, str, bool, str]] = []


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def q() -> complex:
    return DEFAULT_Q


@pytest.fixture
def lam() -> complex:
    return DEFAULT_LAMBDA


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num:2d} {title}: {detail}")
