import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from wwlump.spectral import GridSpec, Parity, RealField, project_parity

settings.register_profile(
    "wwlump", deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.function_scoped_fixture, HealthCheck.too_slow])
settings.load_profile("wwlump")


@pytest.fixture
def pi_grid():
    """Lx = Ly = pi, so the integer ladder m = 1, 2, ... is resolved exactly."""
    return GridSpec(Lx=np.pi, Ly=np.pi, Nx=32, Ny=32, eps=0.1, sigma=1.0)


@pytest.fixture
def small_grid():
    return GridSpec(Lx=20.0, Ly=20.0, Nx=64, Ny=64, eps=0.1, sigma=1.0)


def bumps(grid, seed, parity=Parity.NONE, n=3, width=None):
    """Sum of random Gaussians, optionally projected onto a parity class."""
    rng = np.random.default_rng(seed)
    width = grid.Lx / 6 if width is None else width
    X, Y = grid.mesh
    v = np.zeros(grid.shape)
    for _ in range(n):
        x0 = rng.uniform(-0.3, 0.3) * grid.Lx
        y0 = rng.uniform(-0.3, 0.3) * grid.Ly
        v += rng.normal() * np.exp(-((X - x0) ** 2 + (Y - y0) ** 2) / (2 * width ** 2))
    f = RealField(grid, v)
    return project_parity(f, parity) if parity is not Parity.NONE else f


def rel_max(a, b):
    a = getattr(a, "values", a)
    b = getattr(b, "values", b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


# One line per acceptance criterion, filled in by test_acceptance.py.
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
