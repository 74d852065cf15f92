import numpy as np
import pytest

from bathphase import InitialState, PhysicalParams

ACCEPTANCE_LINES = []


def record(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def fig1_params():
    return PhysicalParams.from_ratios(g2_over_omega=0.01, temp_over_omega=1.0)


@pytest.fixture
def x_state():
    return InitialState(np.pi / 2)


def random_density(rng, purity_max=1.0):
    """Valid 2x2 density matrix with a uniformly random Bloch direction."""
    v = rng.normal(size=3)
    v *= rng.uniform(0.0, purity_max) / np.linalg.norm(v)
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
    sz = np.diag([1.0, -1.0]).astype(complex)
    return 0.5 * (np.eye(2) + v[0] * sx + v[1] * sy + v[2] * sz)
