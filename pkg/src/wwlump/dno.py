"""Dirichlet-Neumann operator of a fluid layer of unit depth.

For a surface ``x3 = eta(x')`` over a flat bottom at ``x3 = -1`` the operator
maps the surface potential ``xi`` to ``Phi_x3 - grad(eta).grad(Phi)`` at the
surface, where ``Phi`` is harmonic, equals ``xi`` on the surface and has zero
normal derivative on the bottom.

Fields are sampled on the scaled grid but all operators here act in the
unscaled horizontal variables, whose wavevector is ``k = (eps m1, eps^2 m2)``.

``g_oracle`` is independent of the expansion ``G0 + G1 + G2 + ...``: it maps
the fluid layer onto the slab ``0 <= s <= 1`` through
``x3 = -1 + s (1 + eta)`` and solves the transformed Laplace equation with a
Fourier-Chebyshev collocation method, iterating on the metric terms with the
flat-strip solver as preconditioner.
"""

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import spectral
from .errors import ConfigurationError, OracleFailure, PreconditionError
from .spectral import RealField, product_values

__all__ = [
    "SurfaceState", "OracleConfig", "Remainders", "g0_apply", "g1_apply", "g2_apply",
    "g_oracle", "remainders", "strip_symbol", "chebyshev_nodes", "DNO_MODES",
]

DNO_MODES = ("exact", "series")


@dataclass(frozen=True, eq=False)
class SurfaceState:
    """Unscaled surface elevation and potential on a common grid."""

    grid: spectral.GridSpec
    eta: RealField
    xi: RealField

    def __post_init__(self):
        for name in ("eta", "xi"):
            f = getattr(self, name)
            if f.grid != self.grid:
                raise ConfigurationError(f"{name} lives on a different grid", field=name)
            if not np.all(np.isfinite(f.values)):
                raise PreconditionError(f"{name} contains non-finite values")
        if self.eta.max_abs() >= 1.0:
            raise PreconditionError(
                f"surface touches the bottom: max|eta| = {self.eta.max_abs():.3g} >= 1")

    @classmethod
    def from_scaled(cls, h, f):
        """Build the state ``eta = eps^2 h``, ``xi = eps f`` from scaled fields."""
        eps = h.grid.eps
        return cls(h.grid, eps ** 2 * h, eps * f)


@dataclass(frozen=True)
class OracleConfig:
    nz: int = 16
    tol: float = 1e-11
    maxiter: int = 100

    def __post_init__(self):
        if int(self.nz) != self.nz or self.nz < 8:
            raise ConfigurationError(f"nz must be an integer >= 8, got {self.nz}", field="nz")
        if not self.tol > 0:
            raise ConfigurationError("oracle tol must be positive", field="oracle_tol")
        if self.maxiter < 1:
            raise ConfigurationError("oracle maxiter must be >= 1", field="oracle_maxiter")


@dataclass(frozen=True, eq=False)
class Remainders:
    r1: RealField
    r2: RealField
    r3: RealField
    iterations: int = 0


def _unscaled(grid):
    """rfft-layout gradient multipliers and |k| in unscaled variables."""
    eps = grid.eps
    gx = eps * grid.rdiff(1, 0)
    gy = eps ** 2 * grid.rdiff(0, 1)
    k2 = (eps * grid.rm1) ** 2 + (eps ** 2 * grid.rm2) ** 2
    kmag = np.sqrt(k2)
    return gx, gy, np.broadcast_to(k2, grid.rshape), np.broadcast_to(kmag, grid.rshape)


def strip_symbol(grid, depth=1.0):
    """Full-layout symbol ``|k| tanh(depth |k|)`` of a flat strip."""
    M1, M2 = grid.wavenumbers
    kmag = np.sqrt((grid.eps * M1) ** 2 + (grid.eps ** 2 * M2) ** 2)
    return kmag * np.tanh(depth * kmag)


def _g0_values(grid, values):
    _, _, _, kmag = _unscaled(grid)
    return grid.irfft(grid.rfft(values) * (kmag * np.tanh(kmag)))


def _grad(grid, values):
    gx, gy, _, _ = _unscaled(grid)
    c = grid.rfft(values)
    return grid.irfft(c * gx), grid.irfft(c * gy)


def _div(grid, vx, vy):
    gx, gy, _, _ = _unscaled(grid)
    return grid.irfft(grid.rfft(vx) * gx + grid.rfft(vy) * gy)


def _neg_lap(grid, values):
    _, _, k2, _ = _unscaled(grid)
    return grid.irfft(grid.rfft(values) * k2)


def _result(xi, values, parity=None):
    return RealField(xi.grid, values, xi.parity if parity is None else parity)


def g0_apply(xi):
    """Flat-bottom operator ``|k| tanh|k|``."""
    return _result(xi, _g0_values(xi.grid, xi.values))


def _g1_values(grid, eta, xi):
    g0xi = _g0_values(grid, xi)
    gx, gy = _grad(grid, xi)
    a = _g0_values(grid, product_values(grid, eta, g0xi))
    b = _div(grid, product_values(grid, eta, gx), product_values(grid, eta, gy))
    return -a - b


def g1_apply(eta, xi):
    """First-order term ``-G0(eta G0 xi) - div(eta grad xi)``."""
    if eta.grid != xi.grid:
        raise ConfigurationError("eta and xi live on different grids", field="grid")
    return _result(xi, _g1_values(xi.grid, eta.values, xi.values))


def _g2_values(grid, eta, xi):
    eta2 = product_values(grid, eta, eta)
    g0xi = _g0_values(grid, xi)
    t1 = -0.5 * _neg_lap(grid, product_values(grid, eta2, g0xi))
    t2 = -0.5 * _g0_values(grid, product_values(grid, eta2, _neg_lap(grid, xi)))
    inner = _g0_values(grid, product_values(grid, eta, g0xi))
    t3 = _g0_values(grid, product_values(grid, eta, inner))
    return t1 + t2 + t3


def g2_apply(eta, xi):
    """Second-order term ``-|D|^2 eta^2 G0 / 2 - G0 eta^2 |D|^2 / 2 + G0 eta G0 eta G0``."""
    if eta.grid != xi.grid:
        raise ConfigurationError("eta and xi live on different grids", field="grid")
    return _result(xi, _g2_values(xi.grid, eta.values, xi.values))


def chebyshev_nodes(nz):
    """Nodes ``s_j`` on [0, 1] (``s_0 = 1`` is the surface) and the d/ds matrix."""
    j = np.arange(nz + 1)
    x = np.cos(np.pi * j / nz)
    c = np.where((j == 0) | (j == nz), 2.0, 1.0) * (-1.0) ** j
    dxm = x[:, None] - x[None, :]
    D = np.outer(c, 1.0 / c) / (dxm + np.eye(nz + 1))
    D -= np.diag(D.sum(axis=1))
    return 0.5 * (1.0 + x), 2.0 * D


class _FlatSolver:
    """Per-mode solve of ``phi_ss - |k|^2 phi = F`` with phi(1) = xi, phi_s(0) = 0."""

    def __init__(self, grid, nz):
        s, Ds = chebyshev_nodes(nz)
        D2 = Ds @ Ds
        top, bot = 0, nz
        inner = np.arange(1, nz)
        self.s, self.Ds = s, Ds
        self.inner = inner
        # Eliminate the Neumann row at the bottom.
        nb = Ds[bot, inner] / Ds[bot, bot]
        n0 = Ds[bot, top] / Ds[bot, bot]
        self.nb, self.n0 = nb, n0
        A = D2[np.ix_(inner, inner)] - np.outer(D2[inner, bot], nb)
        self.b0 = D2[inner, top] - D2[inner, bot] * n0
        lam, V = np.linalg.eig(A)
        if np.max(np.abs(lam.imag)) > 1e-8 * np.max(np.abs(lam)):
            raise OracleFailure("Chebyshev operator has complex spectrum; increase nz")
        order = np.argsort(lam.real)
        self.lam = lam.real[order]
        self.V = V.real[:, order]
        self.Vinv = np.linalg.inv(self.V)
        _, _, k2, _ = _unscaled(grid)
        self.k2 = k2
        self.denom = 1.0 / (self.lam[:, None, None] - k2[None, :, :])

    def solve(self, F, xi_hat):
        """``F`` is (nz+1, Nx, Nyh) spectral; returns phi_hat on all levels."""
        rhs = F[self.inner] - self.b0[:, None, None] * xi_hat[None]
        w = np.tensordot(self.Vinv, rhs, axes=(1, 0)) * self.denom
        phi_in = np.tensordot(self.V, w, axes=(1, 0))
        phi_bot = -(self.n0 * xi_hat + np.tensordot(self.nb, phi_in, axes=(0, 0)))
        return np.concatenate([xi_hat[None], phi_in, phi_bot[None]], axis=0)


_SOLVERS = {}


def _flat_solver(grid, nz):
    key = (grid, nz)
    if key not in _SOLVERS:
        if len(_SOLVERS) > 8:
            _SOLVERS.clear()
        _SOLVERS[key] = _FlatSolver(grid, nz)
    return _SOLVERS[key]


def _batch_irfft(grid, coeffs):
    return sfft.irfft2(coeffs, s=grid.shape, axes=(-2, -1), workers=spectral.get_workers())


def _batch_rfft(grid, values):
    return sfft.rfft2(values, axes=(-2, -1), workers=spectral.get_workers())


def _flat_profile(grid, xi_hat, s):
    """Analytic flat-strip potential and its s-derivative at the nodes ``s``.

    ``phi0 = xi_hat cosh(|k| s) / cosh|k|`` written with decaying exponentials.
    """
    _, _, _, kmag = _unscaled(grid)
    k = kmag[None]
    den = 1.0 + np.exp(-2.0 * k)
    up = np.exp(k * (s - 1.0))
    down = np.exp(-2.0 * k * s)
    phi0 = xi_hat[None] * up * (1.0 + down) / den
    phi0_s = xi_hat[None] * k * up * (1.0 - down) / den
    return phi0, phi0_s


def _oracle_values(grid, eta, xi, cfg):
    """Return ``(G xi - G0 xi, sweeps)``.

    The potential is split into the analytic flat-strip solution and a
    correction that vanishes at the surface.  Only the correction is
    discretised in ``s``, so the flat part is exact and ``G - G0`` is formed
    without cancellation.
    """
    solver = _flat_solver(grid, cfg.nz)
    mask = grid.rmask
    gx, gy, k2, kmag = _unscaled(grid)
    s = solver.s[:, None, None]
    Ds = solver.Ds

    def trunc(v):
        return grid.irfft(grid.rfft(v) * mask)

    eta_t = trunc(eta)
    ex, ey = _grad(grid, eta_t)
    ex, ey = trunc(ex), trunc(ey)
    lap_eta = -_neg_lap(grid, eta_t)
    b = 1.0 + eta_t
    grad2 = product_values(grid, ex, ex) + product_values(grid, ey, ey)
    c1 = trunc(-(2.0 * eta_t + product_values(grid, eta_t, eta_t)))
    c2x = trunc(ex + product_values(grid, eta_t, ex))
    c2y = trunc(ey + product_values(grid, eta_t, ey))
    c3 = trunc(2.0 * grad2 - lap_eta - product_values(grid, eta_t, lap_eta))
    c4 = trunc(grad2)

    xi_hat = grid.rfft(xi)
    phi0, phi0_s = _flat_profile(grid, xi_hat, s)
    phi0_ss = k2[None] * phi0
    zero_top = np.zeros_like(xi_hat)
    phi1 = np.zeros((cfg.nz + 1,) + grid.rshape, dtype=complex)
    history = []
    scale = max(float(np.max(np.abs(xi))), np.finfo(float).tiny)
    for it in range(1, cfg.maxiter + 1):
        phi = phi0 + phi1
        phis = phi0_s + np.tensordot(Ds, phi1, axes=(1, 0))
        phiss = phi0_ss + np.tensordot(Ds, np.tensordot(Ds, phi1, axes=(1, 0)), axes=(1, 0))
        lap = _batch_irfft(grid, -k2 * phi * mask)
        sx = _batch_irfft(grid, gx * phis * mask)
        sy = _batch_irfft(grid, gy * phis * mask)
        ps = _batch_irfft(grid, phis * mask)
        pss = _batch_irfft(grid, phiss * mask)
        F = (c1 * lap + 2.0 * s * (c2x * sx + c2y * sy) - s * c3 * ps - s ** 2 * c4 * pss)
        F_hat = _batch_rfft(grid, F) * mask
        new = solver.solve(F_hat, zero_top)
        change = float(np.max(np.abs(_batch_irfft(grid, new - phi1)))) / scale
        history.append(change)
        phi1 = new
        if not np.isfinite(change) or (it > 3 and change > 10.0 * history[0]):
            raise OracleFailure(
                "Laplace oracle diverged; reduce max|eta| or increase nz", history)
        if change <= cfg.tol:
            break
    else:
        raise OracleFailure(
            f"Laplace oracle did not reach tol={cfg.tol:g} in {cfg.maxiter} sweeps "
            f"(last update {history[-1]:.3e}); reduce max|eta| or increase nz", history)
    d_top = grid.irfft(np.tensordot(Ds[0], phi1, axes=(0, 0)))
    g0xi = grid.irfft(xi_hat * kmag * np.tanh(kmag))
    ps_top = g0xi + d_top
    corr = trunc((grad2 - eta_t) / b)
    xx, xy = _grad(grid, xi)
    R1 = d_top + product_values(grid, corr, ps_top) - (
        product_values(grid, ex, xx) + product_values(grid, ey, xy))
    return R1, len(history)


def g_oracle(state, cfg=None, return_iterations=False):
    """Full Dirichlet-Neumann operator from the transformed Laplace problem."""
    cfg = OracleConfig() if cfg is None else cfg
    R1, its = _oracle_values(state.grid, state.eta.values, state.xi.values, cfg)
    out = _result(state.xi, _g0_values(state.grid, state.xi.values) + R1)
    return (out, its) if return_iterations else out


def remainders(state, cfg=None, mode="exact"):
    """``R1 = G - G0``, ``R2 = R1 - G1``, ``R3 = R2 - G2`` applied to ``xi``.

    In ``series`` mode the oracle is skipped and ``R3 = 0``.
    """
    if mode not in DNO_MODES:
        raise ConfigurationError(f"dno mode must be one of {DNO_MODES}, got {mode!r}", field="dno")
    grid = state.grid
    eta, xi = state.eta.values, state.xi.values
    g1 = _g1_values(grid, eta, xi)
    g2 = _g2_values(grid, eta, xi)
    if mode == "series":
        r3 = np.zeros(grid.shape)
        r2 = g2
        r1 = g1 + g2
        its = 0
    else:
        cfg = OracleConfig() if cfg is None else cfg
        r1, its = _oracle_values(grid, eta, xi, cfg)
        r2 = r1 - g1
        r3 = r2 - g2
    return Remainders(_result(state.xi, r1), _result(state.xi, r2), _result(state.xi, r3), its)
