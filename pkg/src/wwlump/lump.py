"""KP-I lump profiles on the periodic box.

The scaled lump equation is

    A q_xxxx - q_xx - (1 + eps^2) q_yy - (3 / 2c) (q_x^2)_x = 0,

with ``A = sigma (1 + eps^2) - 1/3`` and ``c = 1 / sqrt(1 + eps^2)``.  Its
rational solution decays like ``1/r``, so three torus representations are
provided:

``pointwise``
    the closed form sampled at the grid points (exact on the plane, with a
    jump across the periodic boundary);
``periodic``
    the lattice sum of translates, sampled through the continuum Fourier
    transform (smooth and periodic, exact only up to image interactions);
``petviashvili``
    the fixed point of the discrete equation itself, found by Petviashvili
    iteration on ``u = q_x``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import k1

from .errors import ConfigurationError, IterationError
from .spectral import Parity, RealField, antiderivative_x, derivative, product, project_parity

__all__ = [
    "LumpParams", "lump_eps", "lump_derivatives", "kpi_residual", "lump_periodic",
    "lump_petviashvili", "PetviashviliResult", "torus_lump", "interior_max",
    "LUMP_SOURCES",
]

LUMP_SOURCES = ("petviashvili", "periodic", "pointwise")


@dataclass(frozen=True)
class LumpParams:
    """Coefficients of the scaled lump equation for given (eps, sigma)."""

    eps: float
    sigma: float

    def __post_init__(self):
        if not (0.0 <= self.eps < 1.0):
            raise ConfigurationError(f"eps must lie in [0, 1), got {self.eps}", field="eps")
        if not self.sigma > 1.0 / 3.0:
            raise ConfigurationError(f"sigma must exceed 1/3, got {self.sigma}", field="sigma")

    @classmethod
    def from_grid(cls, grid):
        return cls(grid.eps, grid.sigma)

    @property
    def beta(self):
        return 1.0 + self.eps ** 2

    @property
    def A(self):
        return self.sigma * self.beta - 1.0 / 3.0

    @property
    def c(self):
        return 1.0 / math.sqrt(self.beta)

    @property
    def amplitude(self):
        """``-8 sqrt(1 + eps^2) A``, the numerator constant of the closed form."""
        return -8.0 * math.sqrt(self.beta) * self.A

    def closed_form(self, x, y):
        x, y = np.asarray(x, float), np.asarray(y, float)
        return self.amplitude * x / (y ** 2 + self.beta * (x ** 2 + 3.0 * self.A))


def lump_eps(params, grid):
    """Closed-form lump sampled on the grid, in the Hox class.

    The column at ``x = -Lx`` is its own mirror image and is set to zero by
    the projection.
    """
    X, Y = grid.mesh
    return project_parity(RealField(grid, params.closed_form(X, Y)), Parity.HOX)


def lump_derivatives(params, grid, order=2):
    """Analytic partial derivatives of the closed form up to ``order``.

    Returns a dict with keys ``q``, ``qx``, ``qy`` and, for order 2,
    ``qxx``, ``qxy``, ``qyy``; each entry is projected onto its parity class.
    """
    if order not in (0, 1, 2):
        raise ConfigurationError("lump derivatives are available up to order 2", field="order")
    X, Y = grid.mesh
    K, b, A = params.amplitude, params.beta, params.A
    D = Y ** 2 + b * (X ** 2 + 3.0 * A)
    N = Y ** 2 + b * (3.0 * A - X ** 2)
    raw = {"q": (K * X / D, Parity.HOX)}
    if order >= 1:
        raw["qx"] = (K * N / D ** 2, Parity.HE)
        raw["qy"] = (-2.0 * K * X * Y / D ** 2, Parity.HOO)
    if order >= 2:
        raw["qxx"] = (-2.0 * K * b * X * (D + 2.0 * N) / D ** 3, Parity.HOX)
        raw["qxy"] = (2.0 * K * Y * (D - 2.0 * N) / D ** 3, Parity.HOY)
        raw["qyy"] = (-2.0 * K * X * (D - 4.0 * Y ** 2) / D ** 3, Parity.HOX)
    return {k: project_parity(RealField(grid, v), p) for k, (v, p) in raw.items()}


def kpi_residual(q, params):
    """Left-hand side of the scaled lump equation, dealiased quadratic term."""
    qx = derivative(q, "x")
    res = (params.A * derivative(q, "x", 4) - derivative(q, "x", 2)
           - params.beta * derivative(q, "y", 2)
           - (1.5 / params.c) * derivative(product(qx, qx), "x"))
    return project_parity(res, Parity.HOX) if q.parity is Parity.HOX else res


def interior_max(f, fraction=0.5):
    """Max of |f| over the central ``fraction`` of the box in each direction."""
    g = f.grid
    X, Y = g.mesh
    mask = (np.abs(X) <= fraction * g.Lx) & (np.abs(Y) <= fraction * g.Ly)
    return float(np.max(np.abs(f.values[mask])))


def _continuum_u_hat(params, grid):
    """Plane Fourier transform of ``u = q_x`` at the grid wavenumbers."""
    M1, M2 = grid.wavenumbers
    d = 3.0 * params.A
    kappa = np.sqrt(M1 ** 2 + params.beta * M2 ** 2)
    out = np.zeros(grid.shape)
    nz = kappa > 0
    sd = math.sqrt(d)
    out[nz] = -16.0 * math.pi * params.A * sd * M1[nz] ** 2 * k1(sd * kappa[nz]) / kappa[nz]
    return out


def lump_periodic(params, grid):
    """Lattice sum of the closed form over all periodic images.

    By Poisson summation its Fourier coefficients are the plane transform
    divided by the box area, so no slowly convergent image sum is needed.
    Returns ``(q, u)`` with ``u = q_x``.
    """
    from .spectral import SpectralField, inverse

    uh = _continuum_u_hat(params, grid) / grid.area
    uh[grid.Nx // 2, :] = 0.0
    uh[:, grid.Ny // 2] = 0.0
    u = inverse(SpectralField(grid, uh.astype(complex)), Parity.HE)
    u = project_parity(u, Parity.HE)
    q = project_parity(antiderivative_x(u), Parity.HOX)
    return q, u


@dataclass
class PetviashviliResult:
    """Converged Petviashvili iterate and its diagnostics."""

    q: RealField
    u: RealField
    iterations: int
    factor: float
    residual: float
    history: list = field(default_factory=list)


def _petviashvili_symbol(params, grid):
    M1, M2 = grid.wavenumbers
    sym = np.zeros(grid.shape)
    nz = M1 != 0
    sym[nz] = params.A * M1[nz] ** 2 + 1.0 + params.beta * M2[nz] ** 2 / M1[nz] ** 2
    return grid.half(sym)


def lump_petviashvili(params, grid, tol=1e-12, maxiter=500, seed=None, full_output=False):
    """Solve ``M u = -(3/2c) u^2`` for ``u = q_x`` by Petviashvili iteration.

    ``M`` has symbol ``A m1^2 + 1 + (1 + eps^2) m2^2 / m1^2`` with the
    ``m1 = 0`` modes removed; the stabilising exponent is 2.  The seed
    defaults to the derivative of the periodised closed form.  Returns
    ``q`` (Hox), or a :class:`PetviashviliResult` when ``full_output``.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive", field="tol")
    msym = _petviashvili_symbol(params, grid)
    inv = np.zeros_like(msym)
    inv[msym > 0] = 1.0 / msym[msym > 0]
    coef = -1.5 / params.c
    if seed is None:
        u = lump_periodic(params, grid)[1].values
    else:
        u = project_parity(seed, Parity.HE).values
    mask = grid.rmask
    history = []
    factor = float("nan")
    for it in range(1, maxiter + 1):
        uh = grid.rfft(u) * mask
        u = grid.irfft(uh)
        # The m1 = 0 modes of u^2 are not constrained by the reduced equation.
        nh = coef * grid.rfft(u * u) * mask * (msym > 0)
        muh = msym * uh
        num = np.vdot(muh, uh).real
        den = np.vdot(nh, uh).real
        if den == 0.0:
            raise IterationError("Petviashvili iteration hit a degenerate iterate", history)
        factor = num / den
        res = np.sqrt(np.sum(np.abs(muh - nh) ** 2) / max(np.sum(np.abs(uh) ** 2), 1e-300))
        history.append(float(res))
        if res <= tol:
            break
        u = project_parity(RealField(grid, grid.irfft(factor ** 2 * inv * nh)), Parity.HE).values
    else:
        raise IterationError(
            f"Petviashvili iteration did not reach tol={tol:g} in {maxiter} steps "
            f"(last residual {history[-1]:.3e})", history)
    uf = RealField(grid, u, Parity.HE)
    q = project_parity(antiderivative_x(uf), Parity.HOX)
    if not full_output:
        return q
    return PetviashviliResult(q=q, u=uf, iterations=it, factor=float(factor),
                              residual=history[-1], history=history)


def torus_lump(params, grid, source="petviashvili", tol=1e-13, maxiter=500):
    """Lump representation used as the solver's ansatz on the torus."""
    if source == "petviashvili":
        return lump_petviashvili(params, grid, tol=tol, maxiter=maxiter)
    if source == "periodic":
        return lump_periodic(params, grid)[0]
    if source == "pointwise":
        return lump_eps(params, grid)
    raise ConfigurationError(f"unknown lump source {source!r}; choose from {LUMP_SOURCES}",
                             field="lump_source")
