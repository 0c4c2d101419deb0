import numpy as np
import pytest

from inertial_kuramoto import ModelParams, PhaseState

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    print(ACCEPTANCE_LINES[-1])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def triad():
    """A smooth three-oscillator instance."""
    params = ModelParams(m=0.5, K=1.0, omega=[0.3, -0.1, -0.2])
    state = PhaseState(0.0, [0.0, 1.0, 2.5], [0.5, -0.4, 0.2])
    return params, state
