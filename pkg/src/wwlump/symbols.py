"""Fourier multipliers of the scaled water-wave problem and their checks.

All symbols are evaluated on the full FFT-ordered wavenumber grid of a
:class:`~wwlump.spectral.GridSpec`.  The physical wavevector is
``k = (eps m1, eps^2 m2)`` so that ``|k|^2 = eps^2 (m1^2 + eps^2 m2^2)``.

The dispersive symbol of ``L2`` involves ``(1 + z^2/3) z tanh z - z^2`` with
``z = |k|``, which is ``O(z^6)`` and suffers heavy cancellation for small
``z``.  Below ``Z_SWITCH`` it is evaluated from an exact-coefficient Taylor
series instead.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, InvariantFailure, PreconditionError
from .spectral import GridSpec

__all__ = [
    "SymbolTable", "build_symbols", "l2_smallk", "l2_inner_direct", "l2_inner_series",
    "tanh_lower", "tanh_upper", "tanh_bounds_check", "TanhBoundsReport",
    "l2_envelope_check", "EnvelopeReport", "Z_SWITCH",
]

# Both branches of l2_smallk are accurate to ~2e-13 relative here.
Z_SWITCH = 0.2
_SERIES_TERMS = 14
# Below this the tanh-bound slacks come from their Taylor series.
_X_SERIES = 0.5


def _bernoulli(n):
    """Bernoulli numbers B_0..B_n (Akiyama-Tanigawa, exact)."""
    a = [Fraction(0)] * (n + 1)
    out = []
    for m in range(n + 1):
        a[m] = Fraction(1, m + 1)
        for j in range(m, 0, -1):
            a[j - 1] = j * (a[j - 1] - a[j])
        out.append(a[0])
    return out


def _tanh_series(order):
    bern = _bernoulli(order + 1)
    coeffs = [Fraction(0)] * (order + 1)
    for n in range(1, order // 2 + 2):
        k = 2 * n - 1
        if k > order:
            break
        coeffs[k] = Fraction(4 ** n * (4 ** n - 1)) * bern[2 * n] / math.factorial(2 * n)
    return coeffs


def _ratio_series(num, den, order):
    """Power series of num(x)/den(x) up to x^order."""
    num = [Fraction(v) for v in num] + [Fraction(0)] * (order + 1)
    den = [Fraction(v) for v in den]
    out = [Fraction(0)] * (order + 1)
    for k in range(order + 1):
        acc = num[k]
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / den[0]
    return out


def _odd_tail(coeffs, start, count):
    """Float coefficients of x^start, x^(start+2), ... for Horner in x^2."""
    return np.array([float(coeffs[start + 2 * i]) for i in range(count)])


_ORDER = 61
_TANH = _tanh_series(_ORDER)
_T_COEFFS = [a - b for a, b in zip(_TANH, _ratio_series([0, 1], [1, 0, Fraction(1, 3)], _ORDER))]
_T_TAIL = _odd_tail(_T_COEFFS, 5, _SERIES_TERMS)
_UPPER = _ratio_series([0, 15, 0, 1], [15, 0, 6], _ORDER)
_LOWER = _ratio_series([0, 105, 0, 10], [105, 0, 45, 0, 1], _ORDER)
_UPPER_SLACK = _odd_tail([u - t for u, t in zip(_UPPER, _TANH)], 7, 27)
_LOWER_SLACK = _odd_tail([t - l for t, l in zip(_TANH, _LOWER)], 9, 26)


def _horner_even(coeffs, z2):
    acc = np.zeros_like(z2)
    for c in coeffs[::-1]:
        acc = acc * z2 + c
    return acc


def l2_inner_direct(z):
    """``(1 + z^2/3) z tanh z - z^2`` evaluated literally."""
    z = np.asarray(z, dtype=float)
    return (1.0 + z * z / 3.0) * z * np.tanh(z) - z * z


def l2_inner_series(z):
    """Cancellation-free series form ``(1 + z^2/3) z (tanh z - z/(1 + z^2/3))``."""
    z = np.asarray(z, dtype=float)
    z2 = z * z
    tail = z2 * z2 * z * _horner_even(_T_TAIL, z2)
    return (1.0 + z2 / 3.0) * z * tail


def l2_smallk(z):
    """Inner factor ``sigma_Q sigma_G0 - eps^2 sigma_P`` as a function of ``z = |k|``.

    Uses the series branch for ``z < Z_SWITCH`` and the direct formula above.
    Accepts scalars or arrays; raises for negative input.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise PreconditionError("l2_smallk requires z >= 0")
    small = z < Z_SWITCH
    out = np.where(small, l2_inner_series(np.where(small, z, 0.0)),
                   l2_inner_direct(np.where(small, Z_SWITCH, z)))
    return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """Real multiplier arrays on the full wavenumber grid."""

    grid: GridSpec
    sigmaP: np.ndarray
    sigmaQ: np.ndarray
    kmag: np.ndarray
    g0: np.ndarray
    l1: np.ndarray
    l2: np.ndarray
    helm: np.ndarray
    A: float
    c: float

    @property
    def lsum(self):
        return self.l1 + self.l2

    def half(self, name):
        """rfft-layout view of a stored symbol."""
        return self.grid.half(getattr(self, name))


def build_symbols(grid):
    """Evaluate every multiplier of the problem on ``grid``."""
    eps, sigma = grid.eps, grid.sigma
    if not sigma > 1.0 / 3.0:
        raise ConfigurationError(f"sigma must exceed 1/3, got {sigma}", field="sigma")
    A = sigma * (1.0 + eps ** 2) - 1.0 / 3.0
    c = 1.0 / math.sqrt(1.0 + eps ** 2)
    M1, M2 = grid.wavenumbers
    m1s, m2s = M1 ** 2, M2 ** 2
    sigmaP = m1s + eps ** 2 * m2s
    sigmaQ = 1.0 + (eps ** 2 / 3.0) * sigmaP
    kmag = eps * np.sqrt(sigmaP)
    g0 = kmag * np.tanh(kmag)
    l1 = (A * m1s ** 2 + m1s + (1.0 + eps ** 2) * m2s
          + (2.0 * A + 1.0 / 3.0) * eps ** 2 * m1s * m2s
          + sigma * (1.0 + eps ** 2) * eps ** 4 * m2s ** 2)
    l2 = eps ** -4 * (1.0 + eps ** 2) * (1.0 + sigma * kmag ** 2) * l2_smallk(kmag)
    helm = 1.0 + sigma * eps ** 2 * sigmaP
    arrays = dict(sigmaP=sigmaP, sigmaQ=sigmaQ, kmag=kmag, g0=g0, l1=l1, l2=l2, helm=helm)
    for name, arr in arrays.items():
        arr.flags.writeable = False
    return SymbolTable(grid=grid, A=A, c=c, **arrays)


def tanh_lower(x):
    x = np.asarray(x, dtype=float)
    return (10 * x ** 3 + 105 * x) / (x ** 4 + 45 * x ** 2 + 105)


def tanh_upper(x):
    x = np.asarray(x, dtype=float)
    return x * (15 + x ** 2) / (15 + 6 * x ** 2)


@dataclass(frozen=True)
class TanhBoundsReport:
    n_samples: int
    min_lower_slack: float
    min_upper_slack: float
    argmin_lower: float
    argmin_upper: float
    min_relative_slack: float

    @property
    def min_slack(self):
        return min(self.min_lower_slack, self.min_upper_slack)


def _slacks(x):
    x = np.asarray(x, dtype=float)
    small = x < _X_SERIES
    xs = np.where(small, x, 0.0)
    x2 = xs * xs
    up_series = x2 ** 3 * xs * _horner_even(_UPPER_SLACK, x2)
    lo_series = x2 ** 4 * xs * _horner_even(_LOWER_SLACK, x2)
    th = np.tanh(x)
    up = np.where(small, up_series, tanh_upper(x) - th)
    lo = np.where(small, lo_series, th - tanh_lower(x))
    return lo, up


def tanh_bounds_check(samples):
    """Verify the rational bracket ``lower(x) < tanh x < upper(x)``.

    Slacks are measured without cancellation: for ``x < 0.5`` from their
    exact-coefficient Taylor series, above that directly.  Raises
    :class:`InvariantFailure` naming the first violating sample.
    """
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0 or np.any(~(x > 0)):
        raise PreconditionError("tanh bounds need strictly positive samples")
    lo, up = _slacks(x)
    bad = np.flatnonzero((lo <= 0) | (up <= 0))
    if bad.size:
        i = bad[0]
        raise InvariantFailure(
            f"tanh bracket violated at x = {x[i]!r} (lower slack {lo[i]:.3e}, upper slack {up[i]:.3e})",
            report={"x": float(x[i]), "lower_slack": float(lo[i]), "upper_slack": float(up[i])})
    rel = np.minimum(lo, up) / np.tanh(x)
    return TanhBoundsReport(
        n_samples=int(x.size),
        min_lower_slack=float(lo.min()), min_upper_slack=float(up.min()),
        argmin_lower=float(x[np.argmin(lo)]), argmin_upper=float(x[np.argmin(up)]),
        min_relative_slack=float(rel.min()))


@dataclass(frozen=True)
class EnvelopeReport:
    """Witnesses for ``l2 <= C eps^2 sigmaP^3`` and ``l2 >= c0 eps^-4 |k|^5`` (|k| >= 1)."""

    C: float
    c0: float
    C_at: tuple
    c0_at: tuple
    n_large_k: int
    positive_off_origin: bool
    zero_at_origin: bool

    @property
    def ok(self):
        # With no |k| >= 1 on the grid the lower envelope holds vacuously.
        lower = self.n_large_k == 0 or (np.isfinite(self.c0) and self.c0 > 0)
        return bool(np.isfinite(self.C) and lower and self.positive_off_origin
                    and self.zero_at_origin)


def l2_envelope_check(table):
    """Exhibit the envelope constants of ``sigma_L2`` on the table's grid."""
    eps = table.grid.eps
    M1, M2 = table.grid.wavenumbers
    nonzero = table.sigmaP > 0
    l2 = table.l2
    positive = bool(np.all(l2[nonzero] > 0))
    zero_origin = bool(l2[0, 0] == 0.0)
    ratio_up = np.full(l2.shape, -np.inf)
    ratio_up[nonzero] = l2[nonzero] / (eps ** 2 * table.sigmaP[nonzero] ** 3)
    iu = np.unravel_index(np.argmax(ratio_up), l2.shape)
    C = float(ratio_up[iu])
    big = table.kmag >= 1.0
    if big.any():
        ratio_lo = np.full(l2.shape, np.inf)
        ratio_lo[big] = l2[big] / (eps ** -4 * table.kmag[big] ** 5)
        il = np.unravel_index(np.argmin(ratio_lo), l2.shape)
        c0, c0_at = float(ratio_lo[il]), (float(M1[il]), float(M2[il]))
    else:
        c0, c0_at = None, None
    report = EnvelopeReport(C=C, c0=c0, C_at=(float(M1[iu]), float(M2[iu])), c0_at=c0_at,
                            n_large_k=int(big.sum()), positive_off_origin=positive,
                            zero_at_origin=zero_origin)
    if not report.ok:
        raise InvariantFailure("sigma_L2 envelope check failed", report=report.__dict__)
    return report
