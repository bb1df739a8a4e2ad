"""The linearised operator about the lump and its spectral properties.

``L_eps phi = (L1 + L2) phi - (3/c) d1(q1 d1 phi)`` with ``q1 = d1 q``.  The
operator is symmetric on the Hox class but not positive: one direction,
the antiderivative of the ground state of the reduced operator below, has
negative energy.  Inversion therefore uses GMRES preconditioned by the
exact inverse of the (positive) multiplier part.

The reduced operator acting on ``u = d1 phi`` is

    L u = A u_xx - u - (3/c) q1 u - (1 + eps^2) d1^{-2} d2^2 u,

whose negation ``-L = M + (3/c) q1`` (with ``M`` of symbol
``A m1^2 + 1 + (1+eps^2) m2^2/m1^2``) has spectrum bounded below by 1 when
``q1 = 0`` and a single eigenvalue below zero in the even class for the lump.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, eigsh, gmres, lobpcg

from .errors import ConfigurationError, IterationError, PreconditionError, SolverFailure
from .norms import norm
from .spectral import (
    Parity, RealField, apply_symbol, derivative, inner, parity_defect, product_values,
    project_parity,
)
from .symbols import build_symbols

__all__ = [
    "LinearContext", "build_context", "apply_Leps", "solve_Leps", "EigenReport", "eig_L",
    "dense_eig_oracle", "apriori_witness", "apriori_constant", "WitnessReport",
    "coupling_spectral_radius",
]

_PARITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class LinearContext:
    """Symbols, coupling coefficient and Krylov settings for one grid."""

    symbols: object
    q1: RealField
    tol: float = 1e-12
    maxiter: int = 400
    restart: int = 80

    def __post_init__(self):
        if self.q1.grid != self.symbols.grid:
            raise ConfigurationError("q1 and symbols must share one grid", field="grid")
        if parity_defect(self.q1, Parity.HE) > _PARITY_TOL and self.q1.max_abs() > 0:
            raise PreconditionError("q1 must lie in the He class")
        if not self.tol > 0:
            raise ConfigurationError("linear tol must be positive", field="tol_linear")

    @property
    def grid(self):
        return self.symbols.grid


def build_context(grid, q1=None, tol=1e-12, maxiter=400, restart=80):
    """Context for ``grid``; ``q1 = None`` gives the free operator."""
    sym = build_symbols(grid)
    if q1 is None:
        q1 = RealField.zeros(grid, Parity.HE)
    else:
        q1 = project_parity(q1, Parity.HE)
    return LinearContext(sym, q1, tol=tol, maxiter=maxiter, restart=restart)


def _apply_values(ctx, v):
    grid = ctx.grid
    coef = 3.0 * np.sqrt(1.0 + grid.eps ** 2)
    d1 = grid.rdiff(1, 0)
    vh = grid.rfft(v)
    out_h = ctx.symbols.half("l1") * vh + ctx.symbols.half("l2") * vh
    if ctx.q1.max_abs() > 0:
        px = grid.irfft(d1 * vh)
        out_h = out_h - coef * d1 * grid.rfft(product_values(grid, ctx.q1.values, px))
    return grid.irfft(out_h)


def _check_hox(phi, name):
    if phi.max_abs() > 0 and parity_defect(phi, Parity.HOX) > _PARITY_TOL:
        raise PreconditionError(f"{name} must lie in the Hox class")


def apply_Leps(ctx, phi):
    """Apply ``L_eps`` to a Hox field."""
    _check_hox(phi, "phi")
    return project_parity(RealField(ctx.grid, _apply_values(ctx, phi.values)), Parity.HOX)


def _hox(grid, v):
    return project_parity(RealField(grid, v), Parity.HOX).values


def solve_Leps(ctx, rhs, history=None, x0=None):
    """Solve ``L_eps phi = rhs`` in the Hox class.

    Right-preconditioned GMRES with the exact multiplier inverse, so the
    monitored residual is the true one.  Appends relative residuals to
    ``history`` when a list is given.
    """
    _check_hox(rhs, "rhs")
    grid = ctx.grid
    b = project_parity(rhs, Parity.HOX).values
    bnorm = float(np.linalg.norm(b))
    if bnorm == 0.0:
        return RealField.zeros(grid, Parity.HOX)
    lsum = ctx.symbols.half("l1") + ctx.symbols.half("l2")
    pinv = np.zeros_like(lsum)
    pinv[lsum > 0] = 1.0 / lsum[lsum > 0]
    shape = grid.shape

    def precond(v):
        return _hox(grid, grid.irfft(grid.rfft(v.reshape(shape)) * pinv))

    def matvec(y):
        return _hox(grid, _apply_values(ctx, precond(y))).ravel()

    op = LinearOperator((b.size, b.size), matvec=matvec, dtype=float)
    hist = history if history is not None else []
    y0 = None
    if x0 is not None:
        # Invert the preconditioner on the initial guess.
        y0 = _hox(grid, grid.irfft(grid.rfft(project_parity(x0, Parity.HOX).values)
                                   * lsum)).ravel()

    def cb(res):
        hist.append(float(res))

    y, info = gmres(op, b.ravel(), x0=y0, rtol=ctx.tol, atol=0.0, restart=ctx.restart,
                    maxiter=max(1, ctx.maxiter // ctx.restart), callback=cb,
                    callback_type="pr_norm")
    phi = precond(y)
    res = float(np.linalg.norm(_hox(grid, _apply_values(ctx, phi)) - b)) / bnorm
    hist.append(res)
    if res > 10.0 * ctx.tol:
        raise SolverFailure(
            f"GMRES stopped at relative residual {res:.3e} > tol {ctx.tol:g} (info={info})", hist)
    return RealField(grid, phi, Parity.HOX)


@dataclass
class EigenReport:
    """Lowest eigenpairs of ``-L = M + (3/c) q1`` in the even class."""

    lambda1: float
    phi0: RealField
    n_negative: int
    residual: float
    eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(0))
    bound_state: bool = True
    slice_integral: float = 0.0


def _cos_basis(n, L):
    """Orthonormal even cosine vectors on the periodic grid (columns j = 1..n/2)."""
    x = -L + (2.0 * L / n) * np.arange(n)
    j = np.arange(0, n // 2 + 1)
    B = np.cos(np.outer(x, j * np.pi / L))
    B /= np.linalg.norm(B, axis=0)
    return B, j * np.pi / L


def _reduced_symbol(grid, m1, m2):
    A = grid.sigma * (1.0 + grid.eps ** 2) - 1.0 / 3.0
    beta = 1.0 + grid.eps ** 2
    M1, M2 = np.meshgrid(m1, m2, indexing="ij")
    return A * M1 ** 2 + 1.0 + beta * M2 ** 2 / M1 ** 2


def eig_L(ctx, n_eigs=10, tol=1e-9, maxiter=500, seed=0):
    """Most negative eigenvalue of ``-L`` and the count of negatives among the lowest ``n_eigs``.

    The even-even class without ``m1 = 0`` modes is spanned by products of
    cosines, in which ``M`` is diagonal; LOBPCG with the ``1/M`` preconditioner
    finds the lowest eigenpairs.
    """
    grid = ctx.grid
    Bx, m1 = _cos_basis(grid.Nx, grid.Lx)
    By, m2 = _cos_basis(grid.Ny, grid.Ly)
    Bx, m1 = Bx[:, 1:], m1[1:]
    msym = _reduced_symbol(grid, m1, m2)
    V = 3.0 * np.sqrt(1.0 + grid.eps ** 2) * ctx.q1.values
    shape = msym.shape

    def apply(X):
        X = np.asarray(X)
        cols = X.reshape(shape + (-1,))
        out = np.empty_like(cols)
        for k in range(cols.shape[-1]):
            a = cols[..., k]
            out[..., k] = msym * a + Bx.T @ (V * (Bx @ a @ By.T)) @ By
        return out.reshape(X.shape)

    n = msym.size
    op = LinearOperator((n, n), matvec=apply, matmat=apply, dtype=float)
    prec = LinearOperator((n, n), matvec=lambda X: X / msym.reshape(-1, *([1] * (np.ndim(X) - 1))),
                          matmat=lambda X: X / msym.reshape(-1, 1), dtype=float)
    rng = np.random.default_rng(seed)
    X0 = rng.standard_normal((n, n_eigs)) / msym.reshape(-1, 1)
    # Seed one vector with the coupling potential to catch the bound state fast.
    seed_vec = (Bx.T @ (V @ By)).ravel() / msym.ravel()
    if np.any(seed_vec):
        X0[:, 0] = seed_vec
    vals, vecs, hist = lobpcg(op, X0, M=prec, tol=tol, maxiter=maxiter, largest=False,
                              retResidualNormsHistory=True)
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    res_norms = np.linalg.norm(op.matmat(vecs) - vecs * vals, axis=0)
    if not np.all(res_norms <= 1e3 * tol * np.maximum(1.0, np.abs(vals))):
        raise IterationError(
            f"LOBPCG residuals {res_norms.max():.3e} exceed tolerance", list(res_norms))
    a0 = vecs[:, 0].reshape(shape)
    phi0 = Bx @ a0 @ By.T
    phi0 /= np.sqrt(np.sum(phi0 ** 2) * grid.cell_area)
    if phi0[grid.Nx // 2, grid.Ny // 2] < 0:
        phi0 = -phi0
    phi0_field = RealField(grid, phi0, Parity.HE)
    slice_int = float(np.max(np.abs(phi0.sum(axis=0)))) * grid.dx
    n_neg = int(np.sum(vals < 0))
    return EigenReport(lambda1=float(vals[0]), phi0=phi0_field, n_negative=n_neg,
                       residual=float(res_norms[0]), eigenvalues=vals,
                       bound_state=bool(vals[0] < 1.0), slice_integral=slice_int)


def dense_eig_oracle(grid, q1_values, k=3):
    """Brute-force lowest eigenvalues of ``-L`` by a dense eigensolve.

    The matrix is assembled column by column, applying ``M`` through the
    full complex FFT to each even-even cosine basis vector, and diagonalised
    by LAPACK.  Intended for grids of about 64 x 64.
    """
    Bx, _ = _cos_basis(grid.Nx, grid.Lx)
    By, _ = _cos_basis(grid.Ny, grid.Ly)
    Bx = Bx[:, 1:]
    A = grid.sigma * (1.0 + grid.eps ** 2) - 1.0 / 3.0
    beta = 1.0 + grid.eps ** 2
    M1, M2 = grid.wavenumbers
    msym = np.zeros(grid.shape)
    nz = M1 != 0
    msym[nz] = A * M1[nz] ** 2 + 1.0 + beta * M2[nz] ** 2 / M1[nz] ** 2
    B = np.kron(Bx, By)
    n = B.shape[1]
    cols = B.T.reshape(n, grid.Nx, grid.Ny)
    applied = np.ascontiguousarray(
        np.fft.ifft2(msym * np.fft.fft2(cols, axes=(1, 2)), axes=(1, 2)).real)
    H = applied.reshape(n, -1) @ B
    V = 3.0 * np.sqrt(beta) * np.asarray(q1_values).ravel()
    H = 0.5 * (H + H.T) + B.T @ (V[:, None] * B)
    return sla.eigvalsh(H, subset_by_index=[0, k - 1])


def apriori_witness(ctx, h1, h2):
    """Solve ``L_eps phi = d1 h1 + d2 h2`` and return ``(C, phi)``.

    ``C = |phi|_a / (|h1|_b + |h2|_c)``, the constant realised by this rhs.
    ``h1`` must be in He and ``h2`` in Hoo so that the rhs is in Hox.
    """
    h1 = project_parity(h1, Parity.HE)
    h2 = project_parity(h2, Parity.HOO)
    rhs = derivative(h1, "x") + derivative(h2, "y")
    phi = solve_Leps(ctx, project_parity(rhs, Parity.HOX))
    denom = norm(h1, "b") + norm(h2, "c")
    return norm(phi, "a") / denom, phi


@dataclass
class WitnessReport:
    """Worst-case a-priori ratio found by power iteration."""

    C: float
    history: list
    h1: RealField
    h2: RealField
    phi: RealField


def _smoothed_noise(grid, rng, parity):
    M1, M2 = grid.wavenumbers
    v = np.fft.ifft2(np.fft.fft2(rng.standard_normal(grid.shape))
                     * np.exp(-0.5 * (M1 ** 2 + M2 ** 2))).real
    return project_parity(RealField(grid, v), parity)


def apriori_constant(ctx, seed=0, maxiter=30, rtol=1e-6):
    """Largest ``|phi|_a / (|h1|_b + |h2|_c)`` over right-hand sides ``d1 h1 + d2 h2``.

    Power iteration on ``T* T`` for ``T: (h1, h2) -> phi`` with Hilbert
    surrogates of the norms (``a`` is already quadratic; ``b`` and ``c`` are
    replaced by ``sqrt(|h|^2 + |d h|^2)``), started from smoothed noise drawn
    with ``seed``.  The exact norm ratio is evaluated at every iterate and the
    loop stops once it changes by less than ``rtol``.
    """
    grid = ctx.grid
    eps = grid.eps
    M1, M2 = grid.wavenumbers
    sP = M1 ** 2 + eps ** 2 * M2 ** 2
    lap = M1 ** 2 + M2 ** 2
    wa = eps ** 2 * sP ** 5 + sP ** 4 + sP ** 3 + lap ** 2 + lap
    w1, w2 = 1.0 + M1 ** 2, 1.0 + M2 ** 2
    rng = np.random.default_rng(seed)
    h1 = _smoothed_noise(grid, rng, Parity.HE)
    h2 = _smoothed_noise(grid, rng, Parity.HOO)
    history = []
    for _ in range(maxiter):
        scale = np.sqrt(inner(h1, apply_symbol(h1, w1)) + inner(h2, apply_symbol(h2, w2)))
        h1, h2 = h1 / scale, h2 / scale
        phi = solve_Leps(ctx, project_parity(derivative(h1, "x") + derivative(h2, "y"), Parity.HOX))
        history.append(norm(phi, "a") / (norm(h1, "b") + norm(h2, "c")))
        if len(history) > 1 and abs(history[-1] - history[-2]) <= rtol * history[-1]:
            break
        z = solve_Leps(ctx, project_parity(apply_symbol(phi, wa), Parity.HOX))
        h1 = project_parity(apply_symbol(-1.0 * derivative(z, "x"), 1.0 / w1), Parity.HE)
        h2 = project_parity(apply_symbol(-1.0 * derivative(z, "y"), 1.0 / w2), Parity.HOO)
    return WitnessReport(C=history[-1], history=history, h1=h1, h2=h2, phi=phi)


def coupling_spectral_radius(ctx, k=1):
    """Largest |eigenvalue| of ``(L1 + L2)^{-1} (3/c) d1(q1 d1 .)`` on Hox.

    Computed on the symmetric form ``D^{-1/2} C D^{-1/2}``.  A value above
    one is forced whenever ``L_eps`` has a negative direction.
    """
    grid = ctx.grid
    if not np.any(ctx.q1.values):
        return 0.0
    lsum = ctx.symbols.half("l1") + ctx.symbols.half("l2")
    dm = np.zeros_like(lsum)
    dm[lsum > 0] = 1.0 / np.sqrt(lsum[lsum > 0])
    coef = 3.0 * np.sqrt(1.0 + grid.eps ** 2)
    d1 = grid.rdiff(1, 0)
    shape = grid.shape

    def matvec(v):
        vh = grid.rfft(_hox(grid, v.reshape(shape))) * dm
        px = grid.irfft(d1 * vh)
        ch = -coef * d1 * grid.rfft(product_values(grid, ctx.q1.values, px))
        return _hox(grid, grid.irfft(ch * dm)).ravel()

    n = grid.Nx * grid.Ny
    op = LinearOperator((n, n), matvec=matvec, dtype=float)
    vals = eigsh(op, k=k, which="LM", return_eigenvectors=False, tol=1e-8)
    return float(np.max(np.abs(vals)))
