"""Weighted Sobolev-type norms used to monitor the solver.

``grad_eps = (d1, eps d2)``.  ``L2`` norms of derivative ladders are taken
spectrally, ``|grad_eps^m f|_{L2}^2 = area * sum sigma_P^m |f_hat|^2``; the
pointwise magnitude of ``grad_eps^m f`` is the Frobenius norm of the
symmetric derivative tensor, ``sqrt(sum_j C(m, j) (eps^j d1^{m-j} d2^j f)^2)``,
which makes the two consistent.
"""

from math import comb

import numpy as np

from .errors import ConfigurationError

__all__ = ["norm", "NORM_TAGS", "ladder_l2", "ladder_max", "plain_ladder_l2", "lp", "P_GRAD"]

NORM_TAGS = ("a", "b", "c", "star", "starstar", "starstarstar", "h", "F5")
# Exponent of the gradient term in the star norm.
P_GRAD = 4


def _values(field):
    return np.asarray(field.values, dtype=float)


def _power_spectrum(field):
    g = field.grid
    c = np.fft.fft2(_values(field)) / (g.Nx * g.Ny)
    return np.abs(c) ** 2


def ladder_l2(field, m):
    """``|grad_eps^m f|_{L2}``."""
    g = field.grid
    M1, M2 = g.wavenumbers
    w = (M1 ** 2 + g.eps ** 2 * M2 ** 2) ** m
    return float(np.sqrt(g.area * np.sum(w * _power_spectrum(field))))


def plain_ladder_l2(field, m):
    """``|grad^m f|_{L2}`` with the unweighted gradient."""
    g = field.grid
    M1, M2 = g.wavenumbers
    w = (M1 ** 2 + M2 ** 2) ** m
    return float(np.sqrt(g.area * np.sum(w * _power_spectrum(field))))


def _partial(field, nx, ny):
    g = field.grid
    return g.irfft(g.rdiff(nx, ny) * g.rfft(_values(field)))


def ladder_max(field, m):
    """``sup |grad_eps^m f|`` at the grid points."""
    if m == 0:
        return float(np.max(np.abs(_values(field))))
    eps = field.grid.eps
    acc = sum(comb(m, j) * (eps ** j * _partial(field, m - j, j)) ** 2 for j in range(m + 1))
    return float(np.sqrt(np.max(acc)))


def lp(field, p):
    g = field.grid
    return float((np.sum(np.abs(_values(field)) ** p) * g.cell_area) ** (1.0 / p))


def _l2(field):
    return lp(field, 2)


def _grad_lp(field, p):
    g = field.grid
    mag = np.sqrt(_partial(field, 1, 0) ** 2 + _partial(field, 0, 1) ** 2)
    return float((np.sum(mag ** p) * g.cell_area) ** (1.0 / p))


def _norm_a(f):
    eps = f.grid.eps
    sq = (eps ** 2 * ladder_l2(f, 5) ** 2 + ladder_l2(f, 4) ** 2 + ladder_l2(f, 3) ** 2
          + plain_ladder_l2(f, 2) ** 2 + plain_ladder_l2(f, 1) ** 2)
    return float(np.sqrt(sq))


def _norm_b(f):
    g = f.grid
    return _l2(f) + float(np.sqrt(np.sum(_partial(f, 1, 0) ** 2) * g.cell_area))


def _norm_c(f):
    g = f.grid
    return _l2(f) + float(np.sqrt(np.sum(_partial(f, 0, 1) ** 2) * g.cell_area))


def _norm_star(f):
    eps = f.grid.eps
    return (_norm_a(f) + lp(f, 4) + ladder_max(f, 0) + _grad_lp(f, P_GRAD)
            + eps ** 0.5 * ladder_max(f, 1) + eps ** 0.5 * ladder_max(f, 2)
            + eps ** 1.5 * ladder_max(f, 3))


def _norm_h(f):
    eps = f.grid.eps
    l2_part = (sum(ladder_l2(f, m) for m in range(4)) + eps * ladder_l2(f, 4)
               + eps ** 2 * ladder_l2(f, 5) + eps ** 3 * ladder_l2(f, 6))
    sup_part = (ladder_max(f, 0) + eps ** 0.5 * ladder_max(f, 1) + eps ** 1.5 * ladder_max(f, 2)
                + eps ** 2.5 * ladder_max(f, 3) + eps ** 3.5 * ladder_max(f, 4))
    return l2_part + sup_part


def _norm_f5(f):
    eps = f.grid.eps
    return ladder_max(f, 0) + sum(ladder_l2(f, m) for m in range(4)) + eps * ladder_l2(f, 4)


_NORMS = {
    "a": _norm_a,
    "b": _norm_b,
    "c": _norm_c,
    "star": _norm_star,
    "starstar": lambda f: _norm_b(f) + lp(f, 4.0 / 3.0),
    "starstarstar": lambda f: _norm_c(f) + lp(f, 4.0 / 3.0),
    "h": _norm_h,
    "F5": _norm_f5,
}


def norm(field, which):
    """Evaluate the norm named ``which`` (one of :data:`NORM_TAGS`)."""
    try:
        fn = _NORMS[which]
    except (KeyError, TypeError):
        raise ConfigurationError(f"unknown norm tag {which!r}; choose from {NORM_TAGS}",
                                 field="which") from None
    return float(fn(field))
