"""Grid, transform, derivative, parity and product checks."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import bumps, rel_max
from wwlump import spectral
from wwlump.errors import ConfigurationError, NumericError, PreconditionError
from wwlump.spectral import (GridSpec, Parity, RealField, SpectralField, antiderivative_x,
                             apply_multiplier, apply_symbol, derivative, inverse, product,
                             project_parity, transform)

seeds = st.integers(min_value=0, max_value=2 ** 31)


class TestGridSpec:
    def test_ladder(self):
        g = GridSpec(Lx=10.0, Ly=5.0, Nx=16, Ny=32)
        assert np.allclose(np.sort(g.m1), (np.pi / 10.0) * np.arange(-8, 8))
        assert np.allclose(np.sort(g.m2), (np.pi / 5.0) * np.arange(-16, 16))
        assert g.x[0] == -10.0 and np.isclose(g.x[-1] + g.dx, 10.0)

    @pytest.mark.parametrize("kw, field", [
        ({"Nx": 15}, "Nx"), ({"Ny": 8}, "Ny"), ({"Lx": 0.0}, "Lx"),
        ({"eps": 0.0}, "eps"), ({"eps": 1.0}, "eps"), ({"sigma": 1.0 / 3.0}, "sigma"),
    ])
    def test_rejects(self, kw, field):
        with pytest.raises(ConfigurationError) as err:
            GridSpec(**{**dict(Lx=1.0, Ly=1.0, Nx=16, Ny=16), **kw})
        assert err.value.field == field

    def test_immutable(self):
        g = GridSpec()
        with pytest.raises(Exception):
            g.Nx = 32


class TestTransform:
    def test_zero(self, pi_grid):
        assert np.all(transform(RealField.zeros(pi_grid)).coeffs == 0)

    def test_single_cosine(self):
        g = GridSpec(Lx=3.0, Ly=2.0, Nx=16, Ny=16)
        f = RealField.from_function(g, lambda x, y: np.cos(np.pi * x / 3.0))
        c = transform(f).coeffs
        big = np.argwhere(np.abs(c) > 1e-12)
        assert {tuple(i) for i in big} == {(1, 0), (15, 0)}
        assert np.allclose(c[1, 0], 0.5) and np.allclose(c[15, 0], 0.5)

    @given(seeds)
    def test_roundtrip(self, seed):
        g = GridSpec(Nx=64, Ny=48)
        f = RealField(g, np.random.default_rng(seed).standard_normal(g.shape))
        assert rel_max(inverse(transform(f)), f) <= 1e-13

    @given(seeds)
    def test_parseval(self, seed):
        g = GridSpec(Lx=4.0, Ly=7.0, Nx=32, Ny=64)
        f = RealField(g, np.random.default_rng(seed).standard_normal(g.shape))
        lhs = np.sum(f.values ** 2) * g.cell_area
        rhs = np.sum(np.abs(transform(f).coeffs) ** 2) * g.area
        assert abs(lhs - rhs) <= 1e-12 * lhs

    def test_hermitian(self, small_grid):
        f = bumps(small_grid, 1)
        assert transform(f).hermitian_defect() <= 1e-15

    def test_size_mismatch(self, pi_grid):
        with pytest.raises(ConfigurationError):
            RealField(pi_grid, np.zeros((4, 4)))
        with pytest.raises(ConfigurationError):
            SpectralField(pi_grid, np.zeros((4, 4)))


class TestMultiplier:
    def test_identity(self, small_grid):
        f = bumps(small_grid, 2)
        out = inverse(apply_multiplier(transform(f), np.ones(small_grid.shape)))
        assert rel_max(out, f) <= 1e-14

    def test_eigenfunction(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: np.cos(x))
        M1, _ = pi_grid.wavenumbers
        out = inverse(apply_multiplier(transform(f), M1 ** 2))
        assert rel_max(out, f) <= 1e-13

    def test_linearity(self, small_grid):
        f = bumps(small_grid, 3)
        M1, M2 = small_grid.wavenumbers
        both = apply_symbol(f, M1 ** 2 + M2 ** 2)
        split = apply_symbol(f, M1 ** 2) + apply_symbol(f, M2 ** 2)
        assert rel_max(both, split) <= 1e-12

    def test_real_output(self, small_grid):
        f = bumps(small_grid, 4)
        M1, M2 = small_grid.wavenumbers
        spec = apply_multiplier(transform(f), np.cos(M1) + M2 ** 4)
        vals = np.fft.ifft2(spec.coeffs * small_grid._phase) * small_grid.Nx * small_grid.Ny
        assert np.max(np.abs(vals.imag)) <= 1e-12 * f.max_abs()

    def test_nan_symbol(self, pi_grid):
        sym = np.ones(pi_grid.shape)
        sym[0, 0] = np.nan
        with pytest.raises(NumericError):
            apply_multiplier(transform(RealField.zeros(pi_grid)), sym)

    def test_odd_symbol(self, pi_grid):
        M1, _ = pi_grid.wavenumbers
        with pytest.raises(PreconditionError):
            apply_multiplier(transform(RealField.zeros(pi_grid)), M1)


class TestDerivative:
    def test_sine(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: np.sin(x), Parity.HOX)
        d = derivative(f, "x")
        assert np.max(np.abs(d.values - np.cos(pi_grid.mesh[0]))) <= 1e-12
        assert d.parity is Parity.HE

    def test_y_constant(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: np.sin(2 * x) + 0 * y)
        assert derivative(f, "y", 2).max_abs() <= 1e-12

    @given(seeds)
    def test_product_rule(self, seed):
        g = GridSpec(Lx=20.0, Ly=20.0, Nx=64, Ny=64)
        a, b = bumps(g, seed), bumps(g, seed + 1)
        lhs = derivative(product(a, b), "x")
        rhs = product(a, derivative(b, "x")) + product(derivative(a, "x"), b)
        assert rel_max(lhs, rhs) <= 1e-10

    @pytest.mark.parametrize("p, axis, order, want", [
        (Parity.HOX, "x", 1, Parity.HE), (Parity.HE, "x", 1, Parity.HOX),
        (Parity.HOX, "y", 1, Parity.HOO), (Parity.HE, "y", 2, Parity.HE),
        (Parity.HOY, "x", 1, Parity.HOO),
    ])
    def test_parity_transition(self, small_grid, p, axis, order, want):
        f = bumps(small_grid, 5, p)
        d = derivative(f, axis, order)
        assert d.parity is want
        assert spectral.parity_defect(d, want) <= 1e-12

    def test_bad_order(self, pi_grid):
        with pytest.raises(PreconditionError):
            derivative(RealField.zeros(pi_grid), "x", 0)
        with pytest.raises(ConfigurationError):
            derivative(RealField.zeros(pi_grid), "z")


class TestParity:
    def test_orthogonal(self, small_grid):
        even = bumps(small_grid, 6, Parity.HE)
        assert project_parity(even, Parity.HOX).max_abs() <= 1e-15

    def test_conforming_field_unchanged(self, small_grid):
        X, Y = small_grid.mesh
        L = small_grid.Lx
        q = RealField(small_grid, np.sin(np.pi * X / L) / (Y ** 2 + X ** 2 + 2.0))
        assert rel_max(project_parity(q, Parity.HOX), q) <= 1e-15

    def test_self_mirrored_column_zeroed(self, small_grid):
        X, Y = small_grid.mesh
        q = project_parity(RealField(small_grid, -X / (Y ** 2 + X ** 2 + 2.0)), Parity.HOX)
        assert np.all(q.values[0, :] == 0.0)

    @given(seeds)
    def test_direct_sum(self, seed):
        g = GridSpec(Lx=5.0, Ly=5.0, Nx=32, Ny=16)
        f = RealField(g, np.random.default_rng(seed).standard_normal(g.shape))
        total = sum(project_parity(f, p).values for p in
                    (Parity.HOX, Parity.HE, Parity.HOY, Parity.HOO))
        assert np.max(np.abs(total - f.values)) <= 1e-14

    @given(seeds, st.sampled_from([Parity.HOX, Parity.HE, Parity.HOY, Parity.HOO]))
    def test_idempotent(self, seed, p):
        g = GridSpec(Lx=5.0, Ly=5.0, Nx=16, Ny=16)
        f = RealField(g, np.random.default_rng(seed).standard_normal(g.shape))
        once = project_parity(f, p)
        assert np.max(np.abs(project_parity(once, p).values - once.values)) <= 1e-15

    @pytest.mark.parametrize("a, b, want", [
        (Parity.HOX, Parity.HOX, Parity.HE), (Parity.HOX, Parity.HE, Parity.HOX),
        (Parity.HOX, Parity.HOO, Parity.HOY), (Parity.HOY, Parity.HOO, Parity.HOX),
    ])
    def test_product_algebra(self, small_grid, a, b, want):
        out = product(bumps(small_grid, 7, a), bumps(small_grid, 8, b))
        assert out.parity is want
        assert spectral.parity_defect(out, want) <= 1e-12

    def test_sum_of_unlike_loses_parity(self, small_grid):
        s = bumps(small_grid, 1, Parity.HOX) + bumps(small_grid, 2, Parity.HE)
        assert s.parity is Parity.NONE


class TestAntiderivative:
    def test_cosine(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: np.cos(x), Parity.HE)
        out = antiderivative_x(f)
        assert np.max(np.abs(out.values - np.sin(pi_grid.mesh[0]))) <= 1e-13
        assert out.parity is Parity.HOX

    def test_roundtrip(self, small_grid):
        f = bumps(small_grid, 9, Parity.HOX)
        assert rel_max(derivative(antiderivative_x(f), "x"), f) <= 1e-12

    def test_m2_over_m1_symbol(self, pi_grid):
        # (-m2^2) / (i m1)^2 = m2^2 / m1^2 = 1 at m = (1, 1).
        f = RealField.from_function(pi_grid, lambda x, y: np.sin(x) * np.cos(y), Parity.HOX)
        out = antiderivative_x(derivative(f, "y", 2), 2)
        assert rel_max(out, f) <= 1e-12

    def test_rejects_mean(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: 1.0 + np.cos(y))
        with pytest.raises(PreconditionError):
            antiderivative_x(f)


class TestQuadrature:
    def test_l2_and_inner(self, pi_grid):
        f = RealField.from_function(pi_grid, lambda x, y: np.sin(x))
        assert np.isclose(spectral.l2_norm(f), np.pi * np.sqrt(2.0))
        assert np.isclose(spectral.inner(f, f), 2 * np.pi ** 2)
        assert np.isclose(spectral.lp_norm(f, np.inf), spectral.max_norm(f))


class TestWorkers:
    def test_env(self, monkeypatch):
        monkeypatch.setenv("WWLUMP_THREADS", "3")
        assert spectral.workers_from_env() == 3
        monkeypatch.delenv("WWLUMP_THREADS")
        assert spectral.workers_from_env() is None

    @pytest.mark.parametrize("raw", ["0", "-2", "two"])
    def test_env_invalid(self, monkeypatch, raw):
        monkeypatch.setenv("WWLUMP_THREADS", raw)
        with pytest.raises(ConfigurationError):
            spectral.workers_from_env()

    def test_set_workers_same_result(self, small_grid):
        f = bumps(small_grid, 10)
        before = derivative(f, "x").values
        old = spectral.get_workers()
        try:
            spectral.set_workers(1)
            assert np.array_equal(derivative(f, "x").values, before)
        finally:
            spectral.set_workers(old)
