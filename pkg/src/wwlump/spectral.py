"""Periodic pseudospectral core: grids, transforms, derivatives and products.

Fields live on the periodic box [-Lx, Lx) x [-Ly, Ly) in scaled
coordinates, sampled at ``x_i = -Lx + i*dx``.  The sample at ``-Lx`` is its
own mirror image, so reflections about the origin map the grid onto itself
and parity classes can be enforced exactly at the collocation points.

Public coefficients follow the convention

    f(x, y) = sum_m c(m) exp(i (m1 x + m2 y)),

so ``c`` is the unitary-normalised DFT with the phase shift produced by the
grid offset removed.  Internal kernels use the real FFT directly because
every multiplier in the package is real and even.
"""

import enum
import functools
import os
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, NumericError, PreconditionError

__all__ = [
    "GridSpec", "Parity", "RealField", "SpectralField",
    "transform", "inverse", "apply_multiplier", "apply_symbol", "derivative",
    "product", "project_parity", "antiderivative_x", "integrate", "inner",
    "l2_norm", "lp_norm", "max_norm", "set_workers", "get_workers", "workers_from_env",
]


def workers_from_env():
    """Worker cap from ``WWLUMP_THREADS`` (``None`` when unset)."""
    raw = os.environ.get("WWLUMP_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigurationError(
            f"WWLUMP_THREADS must be a positive integer, got {raw!r}",
            field="WWLUMP_THREADS") from None
    if n < 1:
        raise ConfigurationError("WWLUMP_THREADS must be >= 1", field="WWLUMP_THREADS")
    return n


try:
    _WORKERS = workers_from_env()
except ConfigurationError:
    # Reported by the command line, which validates the variable itself.
    _WORKERS = None


def set_workers(n):
    """Cap the number of FFT worker threads (``None`` lets scipy decide)."""
    global _WORKERS
    if n is not None and int(n) < 1:
        raise ConfigurationError("worker count must be >= 1", field="threads")
    _WORKERS = None if n is None else int(n)


def get_workers():
    return _WORKERS


class Parity(enum.Enum):
    """Reflection symmetry class of a field.

    Each class is the pair of characters ``(sx, sy)`` under ``x -> -x`` and
    ``y -> -y``; ``NONE`` carries no symmetry information.
    """

    HOX = ("Hox", -1, 1, 1)
    HE = ("He", 1, 1, 2)
    HOY = ("Hoy", 1, -1, 3)
    HOO = ("Hoo", -1, -1, 4)
    NONE = ("none", 0, 0, 0)

    def __init__(self, label, sx, sy, tag):
        self.label = label
        self.sx = sx
        self.sy = sy
        self.tag = tag

    @classmethod
    def from_signs(cls, sx, sy):
        for p in cls:
            if p.sx == sx and p.sy == sy:
                return p
        return cls.NONE

    @classmethod
    def from_tag(cls, tag):
        for p in cls:
            if p.tag == tag:
                return p
        raise ConfigurationError(f"unknown parity tag {tag}", field="parity")

    @classmethod
    def parse(cls, value):
        if isinstance(value, Parity):
            return value
        for p in cls:
            if p.label.lower() == str(value).lower() or p.name.lower() == str(value).lower():
                return p
        raise ConfigurationError(f"unknown parity class {value!r}", field="parity")

    def after_derivative(self, axis, order):
        if self is Parity.NONE or order % 2 == 0:
            return self
        if axis == "x":
            return Parity.from_signs(-self.sx, self.sy)
        return Parity.from_signs(self.sx, -self.sy)

    def __mul__(self, other):
        if not isinstance(other, Parity):
            return NotImplemented
        if self is Parity.NONE or other is Parity.NONE:
            return Parity.NONE
        return Parity.from_signs(self.sx * other.sx, self.sy * other.sy)

    def __add__(self, other):
        if not isinstance(other, Parity):
            return NotImplemented
        return self if self is other else Parity.NONE


@dataclass(frozen=True)
class GridSpec:
    """Periodic box in scaled coordinates together with (eps, sigma).

    Derived arrays (coordinates, wavenumbers, masks) are computed lazily and
    cached on the instance; the grid itself is immutable.
    """

    Lx: float = 30.0
    Ly: float = 30.0
    Nx: int = 256
    Ny: int = 256
    eps: float = 0.1
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("Nx", "Ny"):
            n = getattr(self, name)
            if int(n) != n or n < 16 or n % 2:
                raise ConfigurationError(f"{name} must be an even integer >= 16, got {n}", field=name)
        for name in ("Lx", "Ly"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ConfigurationError(f"{name} must be positive, got {v}", field=name)
        if not (0.0 < self.eps < 1.0):
            raise ConfigurationError(f"eps must lie in (0, 1), got {self.eps}", field="eps")
        if not self.sigma > 1.0 / 3.0:
            raise ConfigurationError(f"sigma must exceed 1/3, got {self.sigma}", field="sigma")

    def with_(self, **changes):
        return replace(self, **changes)

    @property
    def shape(self):
        return (self.Nx, self.Ny)

    @property
    def dx(self):
        return 2.0 * self.Lx / self.Nx

    @property
    def dy(self):
        return 2.0 * self.Ly / self.Ny

    @property
    def cell_area(self):
        return self.dx * self.dy

    @property
    def area(self):
        return 4.0 * self.Lx * self.Ly

    @functools.cached_property
    def x(self):
        return -self.Lx + self.dx * np.arange(self.Nx)

    @functools.cached_property
    def y(self):
        return -self.Ly + self.dy * np.arange(self.Ny)

    @functools.cached_property
    def mesh(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @functools.cached_property
    def kx_index(self):
        return np.fft.fftfreq(self.Nx, d=1.0 / self.Nx)

    @functools.cached_property
    def ky_index(self):
        return np.fft.fftfreq(self.Ny, d=1.0 / self.Ny)

    @functools.cached_property
    def m1(self):
        return (np.pi / self.Lx) * self.kx_index

    @functools.cached_property
    def m2(self):
        return (np.pi / self.Ly) * self.ky_index

    @functools.cached_property
    def wavenumbers(self):
        """Full ``(M1, M2)`` arrays in FFT ordering."""
        return np.meshgrid(self.m1, self.m2, indexing="ij")

    @functools.cached_property
    def _phase(self):
        kx = self.kx_index.astype(int)[:, None]
        ky = self.ky_index.astype(int)[None, :]
        return np.where((kx + ky) % 2 == 0, 1.0, -1.0)

    @functools.cached_property
    def dealias_mask(self):
        """Full-layout 2/3-rule mask: keep ``|index| < N/3`` on each axis."""
        kx = np.abs(self.kx_index)[:, None] < self.Nx / 3.0
        ky = np.abs(self.ky_index)[None, :] < self.Ny / 3.0
        return kx & ky

    # --- real-FFT layout used by the internal kernels ---------------------
    @property
    def rshape(self):
        return (self.Nx, self.Ny // 2 + 1)

    @functools.cached_property
    def rm1(self):
        return self.m1[:, None]

    @functools.cached_property
    def rm2(self):
        # Last rfft column is the Nyquist mode; its sign is immaterial for
        # even symbols and it is zeroed for odd derivatives.
        return np.abs(self.m2[: self.Ny // 2 + 1])[None, :]

    @functools.cached_property
    def rmask(self):
        kx = np.abs(self.kx_index)[:, None] < self.Nx / 3.0
        ky = np.arange(self.Ny // 2 + 1)[None, :] < self.Ny / 3.0
        return kx & ky

    def rfft(self, values):
        return sfft.rfft2(values, workers=_WORKERS)

    def irfft(self, coeffs):
        return sfft.irfft2(coeffs, s=self.shape, workers=_WORKERS)

    def half(self, symbol):
        """Restrict a full-layout even symbol to the rfft layout."""
        return symbol[:, : self.Ny // 2 + 1]

    @functools.lru_cache(maxsize=64)
    def rdiff(self, nx, ny):
        """rfft-layout multiplier of d^nx/dx^nx d^ny/dy^ny (Nyquist-safe)."""
        sym = (1j * self.rm1) ** nx * (1j * self.rm2) ** ny
        sym = np.broadcast_to(sym, self.rshape).copy()
        if nx % 2:
            sym[self.Nx // 2, :] = 0.0
        if ny % 2:
            sym[:, self.Ny // 2] = 0.0
        if (nx + ny) % 2 == 0:
            sym = sym.real.copy()
        sym.flags.writeable = False
        return sym


def _check_values(grid, values):
    values = np.asarray(values, dtype=float)
    if values.shape != grid.shape:
        raise ConfigurationError(
            f"field shape {values.shape} does not match grid {grid.shape}", field="shape")
    return values


@dataclass(frozen=True, eq=False)
class RealField:
    """Real samples on a grid plus parity metadata.

    Arithmetic with scalars and other fields is supported; parity is
    propagated by the class algebra (sums of unlike classes lose it).
    Pointwise products of fields go through :func:`product`.
    """

    grid: GridSpec
    values: np.ndarray
    parity: Parity = Parity.NONE

    def __post_init__(self):
        object.__setattr__(self, "values", _check_values(self.grid, self.values))
        object.__setattr__(self, "parity", Parity.parse(self.parity))

    @classmethod
    def zeros(cls, grid, parity=Parity.NONE):
        return cls(grid, np.zeros(grid.shape), parity)

    @classmethod
    def from_function(cls, grid, func, parity=Parity.NONE):
        X, Y = grid.mesh
        return cls(grid, np.broadcast_to(func(X, Y), grid.shape).astype(float), parity)

    def with_values(self, values, parity=None):
        return RealField(self.grid, values, self.parity if parity is None else parity)

    def _other(self, other):
        if isinstance(other, RealField):
            if other.grid != self.grid:
                raise ConfigurationError("fields live on different grids", field="grid")
            return other.values, other.parity
        if np.ndim(other) == 0:
            # A constant is even in both directions.
            return float(other), (self.parity if other == 0 else Parity.HE)
        return np.asarray(other, dtype=float), Parity.NONE

    def __add__(self, other):
        v, p = self._other(other)
        return RealField(self.grid, self.values + v, self.parity + p)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return RealField(self.grid, -self.values, self.parity)

    def __mul__(self, other):
        if isinstance(other, RealField):
            raise TypeError("use spectral.product for field-field products")
        return RealField(self.grid, self.values * float(other), self.parity)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return RealField(self.grid, self.values / float(other), self.parity)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients ``c(m)`` of a real field, FFT-ordered."""

    grid: GridSpec
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != self.grid.shape:
            raise ConfigurationError(
                f"coefficient shape {coeffs.shape} does not match grid {self.grid.shape}",
                field="shape")
        object.__setattr__(self, "coeffs", coeffs)

    def hermitian_defect(self):
        """Max |c(-m) - conj(c(m))|, zero for the transform of a real field."""
        c = self.coeffs
        mirrored = np.roll(np.roll(c[::-1, ::-1], 1, axis=0), 1, axis=1)
        return float(np.max(np.abs(mirrored - np.conj(c))))


def transform(field):
    """Fourier coefficients of a real field."""
    grid = field.grid
    values = _check_values(grid, field.values)
    coeffs = sfft.fft2(values, workers=_WORKERS) / (grid.Nx * grid.Ny)
    return SpectralField(grid, coeffs * grid._phase)


def inverse(spec, parity=Parity.NONE):
    """Real field with the given coefficients (imaginary round-off dropped)."""
    grid = spec.grid
    vals = sfft.ifft2(spec.coeffs * grid._phase, workers=_WORKERS) * (grid.Nx * grid.Ny)
    return RealField(grid, vals.real, parity)


def _validate_symbol(grid, symbol):
    symbol = np.asarray(symbol)
    if symbol.shape != grid.shape:
        raise ConfigurationError(
            f"symbol shape {symbol.shape} does not match grid {grid.shape}", field="symbol")
    if np.iscomplexobj(symbol):
        if np.max(np.abs(symbol.imag)) > 0:
            raise PreconditionError("multiplier symbols must be real")
        symbol = symbol.real
    if np.isnan(symbol).any():
        raise NumericError("multiplier symbol contains NaN entries")
    scale = max(float(np.max(np.abs(symbol))), 1.0)
    rx = np.roll(symbol[::-1, :], 1, axis=0)
    ry = np.roll(symbol[:, ::-1], 1, axis=1)
    # Nyquist rows pair with themselves; compare only the symmetric interior.
    gap = max(np.max(np.abs((rx - symbol)[1:, :])), np.max(np.abs((ry - symbol)[:, 1:])))
    if gap > 1e-12 * scale and np.isfinite(gap):
        raise PreconditionError("multiplier symbols must be even in each wavenumber axis")
    return symbol


def apply_multiplier(spec, symbol):
    """Multiply coefficients by a real, even symbol given on the full grid."""
    symbol = _validate_symbol(spec.grid, symbol)
    return SpectralField(spec.grid, spec.coeffs * symbol)


def apply_symbol(field, symbol, parity=None):
    """Apply a real even full-layout symbol to a real field (fast path)."""
    grid = field.grid
    sym = np.asarray(symbol)
    if sym.shape == grid.shape:
        sym = grid.half(sym)
    out = grid.irfft(grid.rfft(field.values) * sym)
    return RealField(grid, out, field.parity if parity is None else parity)


def derivative(field, axis, order=1):
    """Spectral derivative of ``order`` along ``axis`` ('x' or 'y')."""
    if order < 1:
        raise PreconditionError("derivative order must be >= 1")
    if axis not in ("x", "y"):
        raise ConfigurationError(f"axis must be 'x' or 'y', got {axis!r}", field="axis")
    grid = field.grid
    nx, ny = (order, 0) if axis == "x" else (0, order)
    out = grid.irfft(grid.rfft(field.values) * grid.rdiff(nx, ny))
    return RealField(grid, out, field.parity.after_derivative(axis, order))


def mixed_derivative(field, nx, ny):
    """d^nx/dx^nx d^ny/dy^ny in one spectral pass."""
    grid = field.grid
    if nx == 0 and ny == 0:
        return field
    out = grid.irfft(grid.rfft(field.values) * grid.rdiff(nx, ny))
    parity = field.parity.after_derivative("x", nx).after_derivative("y", ny)
    return RealField(grid, out, parity)


def truncate(field):
    """Zero the top third of each wavenumber axis."""
    grid = field.grid
    out = grid.irfft(grid.rfft(field.values) * grid.rmask)
    return RealField(grid, out, field.parity)


def product_values(grid, a, b):
    """Dealiased product of two sample arrays: P(P a * P b)."""
    mask = grid.rmask
    pa = grid.irfft(grid.rfft(a) * mask)
    pb = pa if b is a else grid.irfft(grid.rfft(b) * mask)
    return grid.irfft(grid.rfft(pa * pb) * mask)


def product(f, g):
    """Dealiased pointwise product of two fields (2/3 rule)."""
    if f.grid != g.grid:
        raise ConfigurationError("fields live on different grids", field="grid")
    return RealField(f.grid, product_values(f.grid, f.values, g.values), f.parity * g.parity)


def _reflect(values, axis):
    return np.roll(np.flip(values, axis=axis), 1, axis=axis)


def project_parity(field, parity):
    """Exact projection onto a reflection class at the grid points."""
    parity = Parity.parse(parity)
    if parity is Parity.NONE:
        return RealField(field.grid, field.values, Parity.NONE)
    v = field.values
    rx = _reflect(v, 0)
    ry = _reflect(v, 1)
    rxy = _reflect(rx, 1)
    out = 0.25 * (v + parity.sx * rx + parity.sy * ry + parity.sx * parity.sy * rxy)
    return RealField(field.grid, out, parity)


def parity_defect(field, parity):
    """Relative max-norm distance between a field and its projection."""
    scale = max(field.max_abs(), np.finfo(float).tiny)
    return float(np.max(np.abs(field.values - project_parity(field, parity).values))) / scale


def antiderivative_x(field, order=1):
    """Divide by (i m1)^order with the m1 = 0 modes pinned to zero."""
    if order not in (1, 2):
        raise PreconditionError("antiderivative order must be 1 or 2")
    grid = field.grid
    c = grid.rfft(field.values)
    norm = max(float(np.sqrt(np.sum(np.abs(c) ** 2))), np.finfo(float).tiny)
    zero_mode = float(np.sqrt(np.sum(np.abs(c[0, :]) ** 2)))
    if zero_mode > 1e-10 * norm:
        raise PreconditionError(
            f"field has m1 = 0 content {zero_mode / norm:.3e} (relative); "
            "project onto an x-odd class first")
    sym = (1j * grid.rm1) ** order * np.ones(grid.rshape)
    inv = np.zeros(grid.rshape, dtype=complex)
    nz = np.abs(sym) > 0
    inv[nz] = 1.0 / sym[nz]
    if order % 2:
        inv[grid.Nx // 2, :] = 0.0
    out = grid.irfft(c * inv)
    return RealField(grid, out, field.parity.after_derivative("x", order))


def integrate(field):
    """Rectangle-rule integral over the periodic box."""
    return float(np.sum(field.values) * field.grid.cell_area)


def inner(f, g):
    """L2 inner product by quadrature."""
    return float(np.sum(f.values * g.values) * f.grid.cell_area)


def l2_norm(field):
    return float(np.sqrt(np.sum(field.values ** 2) * field.grid.cell_area))


def lp_norm(field, p):
    if np.isinf(p):
        return max_norm(field)
    return float((np.sum(np.abs(field.values) ** p) * field.grid.cell_area) ** (1.0 / p))


def max_norm(field):
    return field.max_abs()
