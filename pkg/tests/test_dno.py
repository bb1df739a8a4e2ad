"""Dirichlet-Neumann operator: flat symbol, series terms and the Laplace oracle."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bumps, rel_max
from wwlump import dno, spectral
from wwlump.dno import OracleConfig, SurfaceState, g0_apply, g1_apply, g2_apply, g_oracle
from wwlump.errors import ConfigurationError, OracleFailure, PreconditionError
from wwlump.spectral import GridSpec, Parity, RealField

CFG = OracleConfig()


@pytest.fixture(scope="module")
def grid():
    return GridSpec(Lx=30.0, Ly=30.0, Nx=128, Ny=128, eps=0.1, sigma=1.0)


@pytest.fixture(scope="module")
def xi(grid):
    return bumps(grid, 11, Parity.HOX, width=3.0)


@pytest.fixture(scope="module")
def eta(grid):
    e = bumps(grid, 12, Parity.HE, width=3.0)
    return e * (0.05 / e.max_abs())


def strip(grid, eta0):
    return dno.strip_symbol(grid, 1.0 + eta0)


def const(grid, v):
    return RealField(grid, np.full(grid.shape, v), Parity.HE)


class TestSurfaceState:
    def test_bottom_contact(self, grid, xi):
        with pytest.raises(PreconditionError):
            SurfaceState(grid, const(grid, -1.0), xi)

    def test_nonfinite(self, grid, xi):
        bad = xi.with_values(np.where(xi.values > 0, np.nan, 0.0))
        with pytest.raises(PreconditionError):
            SurfaceState(grid, const(grid, 0.0), bad)

    def test_from_scaled(self, grid, xi):
        st_ = SurfaceState.from_scaled(const(grid, 2.0), xi)
        assert np.allclose(st_.eta.values, 0.02) and rel_max(st_.xi, xi * 0.1) == 0.0

    def test_config(self):
        with pytest.raises(ConfigurationError):
            OracleConfig(nz=6)
        with pytest.raises(ConfigurationError):
            OracleConfig(tol=0.0)


class TestG0:
    def test_constant(self, grid):
        assert g0_apply(const(grid, 3.0)).max_abs() <= 1e-14

    def test_unit_mode(self):
        g = GridSpec(Lx=0.1 * np.pi, Ly=1.0, Nx=16, Ny=16, eps=0.1)
        f = RealField.from_function(g, lambda x, y: np.cos(10.0 * x))
        assert rel_max(g0_apply(f), f * np.tanh(1.0)) <= 1e-13

    def test_bounded_by_second_derivative(self, grid, xi):
        M1, M2 = grid.wavenumbers
        k2 = (grid.eps * M1) ** 2 + (grid.eps ** 2 * M2) ** 2
        assert np.all(dno.strip_symbol(grid) <= k2 + 1e-300)
        lap = spectral.apply_symbol(xi, k2)
        assert spectral.l2_norm(g0_apply(xi)) <= spectral.l2_norm(lap)


class TestSeries:
    def test_zero_eta(self, grid, xi):
        z = const(grid, 0.0)
        assert g1_apply(z, xi).max_abs() == 0.0 and g2_apply(z, xi).max_abs() == 0.0

    @pytest.mark.parametrize("eta0", [0.01, 0.05])
    def test_constant_eta_symbols(self, grid, xi, eta0):
        M1, M2 = grid.wavenumbers
        k = np.hypot(grid.eps * M1, grid.eps ** 2 * M2)
        sech2 = 1 / np.cosh(k) ** 2
        g1 = spectral.apply_symbol(xi, eta0 * k ** 2 * sech2)
        g2 = spectral.apply_symbol(xi, -eta0 ** 2 * k ** 3 * np.tanh(k) * sech2)
        assert rel_max(g1_apply(const(grid, eta0), xi), g1) <= 1e-9
        assert rel_max(g2_apply(const(grid, eta0), xi), g2) <= 1e-9

    @given(st.floats(-3, 3).filter(lambda a: abs(a) > 1e-3))
    def test_homogeneity(self, a):
        g = GridSpec(Lx=20.0, Ly=20.0, Nx=32, Ny=32, eps=0.1)
        e, x = bumps(g, 1, Parity.HE) * 0.01, bumps(g, 2, Parity.HOX)
        assert rel_max(g1_apply(e * a, x), g1_apply(e, x) * a) <= 1e-12
        assert rel_max(g2_apply(e * a, x), g2_apply(e, x) * a ** 2) <= 1e-12

    def test_g1_self_adjoint(self, grid, eta):
        u, v = bumps(grid, 21), bumps(grid, 22)
        a = spectral.inner(g1_apply(eta, u), v)
        b = spectral.inner(u, g1_apply(eta, v))
        assert abs(a - b) <= 1e-9 * max(abs(a), abs(b))

    def test_strip_chain(self, grid, xi):
        # (G0 + G1 + G2) misses the strip symbol by O(eta0^3).
        Cs = []
        for eta0 in (0.01, 0.02, 0.04):
            e = const(grid, eta0)
            series = g0_apply(xi) + g1_apply(e, xi) + g2_apply(e, xi)
            exact = spectral.apply_symbol(xi, strip(grid, eta0))
            Cs.append(spectral.l2_norm(series - exact) / (eta0 ** 3 * spectral.l2_norm(xi)))
        assert max(Cs) / min(Cs) < 1.1


class TestChebyshev:
    def test_differentiates_polynomials(self):
        s, D = dno.chebyshev_nodes(12)
        assert s[0] == 1.0 and abs(s[-1]) < 1e-15
        for p in range(1, 12):
            assert np.allclose(D @ s ** p, p * s ** (p - 1), atol=1e-11)


class TestOracle:
    def test_flat(self, grid, xi):
        out = g_oracle(SurfaceState(grid, const(grid, 0.0), xi), CFG)
        assert rel_max(out, g0_apply(xi)) <= 1e-10

    @pytest.mark.parametrize("eta0", [0.01, 0.05, -0.1])
    def test_constant_eta(self, grid, xi, eta0):
        out = g_oracle(SurfaceState(grid, const(grid, eta0), xi), CFG)
        assert rel_max(out, spectral.apply_symbol(xi, strip(grid, eta0))) <= 1e-8

    def test_constant_potential(self, grid, eta):
        out = g_oracle(SurfaceState(grid, eta, const(grid, 1.7)), CFG)
        assert out.max_abs() <= 1e-12

    def test_nz_refinement(self, grid, eta, xi):
        st_ = SurfaceState(grid, eta, xi)
        a = g_oracle(st_, OracleConfig(nz=16))
        b = g_oracle(st_, OracleConfig(nz=32))
        assert rel_max(a, b) <= 1e-8

    def test_iterations_reported(self, grid, eta, xi):
        _, its = g_oracle(SurfaceState(grid, eta, xi), CFG, return_iterations=True)
        assert 1 <= its <= 10

    def test_failure(self, grid, eta, xi):
        with pytest.raises(OracleFailure) as err:
            g_oracle(SurfaceState(grid, eta, xi), OracleConfig(maxiter=1, tol=1e-14))
        assert len(err.value.history) == 1

    def test_matches_series_to_third_order(self, grid, eta, xi):
        st_ = SurfaceState(grid, eta, xi)
        full = g_oracle(st_, CFG)
        series = g0_apply(xi) + g1_apply(eta, xi) + g2_apply(eta, xi)
        assert rel_max(full, series) <= 1e-3


class TestRemainders:
    def test_flat(self, grid, xi):
        r = dno.remainders(SurfaceState(grid, const(grid, 0.0), xi), CFG)
        for f in (r.r1, r.r2, r.r3):
            assert f.max_abs() <= 1e-14 * xi.max_abs()

    def test_decomposition(self, grid, eta, xi):
        st_ = SurfaceState(grid, eta, xi)
        r = dno.remainders(st_, CFG)
        assert rel_max(r.r1 + g0_apply(xi), g_oracle(st_, CFG)) <= 1e-13
        assert rel_max(r.r1 - r.r2, g1_apply(eta, xi)) <= 1e-12
        assert rel_max(r.r2 - r.r3, g2_apply(eta, xi)) <= 1e-10

    def test_series_mode(self, grid, eta, xi):
        r = dno.remainders(SurfaceState(grid, eta, xi), mode="series")
        assert r.r3.max_abs() == 0.0 and r.iterations == 0
        assert rel_max(r.r2, g2_apply(eta, xi)) == 0.0

    def test_bad_mode(self, grid, eta, xi):
        with pytest.raises(ConfigurationError):
            dno.remainders(SurfaceState(grid, eta, xi), mode="fast")

    def test_halving_orders(self, grid, eta, xi):
        norms = []
        for a in (1.6, 0.8, 0.4):
            r = dno.remainders(SurfaceState(grid, eta * a, xi), CFG)
            norms.append((spectral.l2_norm(r.r2), spectral.l2_norm(r.r3)))
        for (r2a, r3a), (r2b, r3b) in zip(norms, norms[1:]):
            assert 3.2 <= r2a / r2b <= 4.8
            assert 6.0 <= r3a / r3b <= 10.0
