"""Reader and writer for the WWL1 binary field format.

Layout (little-endian): the magic bytes ``WWL1``, ``u32 Nx``, ``u32 Ny``,
``f64 Lx``, ``f64 Ly``, ``f64 eps``, ``f64 sigma``, ``u8`` parity tag, then
``Nx*Ny`` float64 samples in row-major order (x index slowest).
"""

import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .spectral import GridSpec, Parity, RealField

MAGIC = b"WWL1"
_HEADER = struct.Struct("<4sIIddddB")


def encode(field):
    g = field.grid
    header = _HEADER.pack(MAGIC, g.Nx, g.Ny, g.Lx, g.Ly, g.eps, g.sigma, field.parity.tag)
    return header + np.ascontiguousarray(field.values, dtype="<f8").tobytes(order="C")


def decode(blob):
    if len(blob) < _HEADER.size:
        raise ConfigurationError("truncated WWL1 header", field="wwl1")
    magic, nx, ny, lx, ly, eps, sigma, tag = _HEADER.unpack_from(blob, 0)
    if magic != MAGIC:
        raise ConfigurationError(f"bad WWL1 magic {magic!r}", field="wwl1")
    expected = _HEADER.size + 8 * nx * ny
    if len(blob) != expected:
        raise ConfigurationError(
            f"WWL1 payload has {len(blob)} bytes, expected {expected}", field="wwl1")
    grid = GridSpec(Lx=lx, Ly=ly, Nx=nx, Ny=ny, eps=eps, sigma=sigma)
    values = np.frombuffer(blob, dtype="<f8", offset=_HEADER.size).reshape(nx, ny)
    return RealField(grid, values.astype(float), Parity.from_tag(tag))


def write_field(path, field):
    Path(path).write_bytes(encode(field))


def read_field(path):
    return decode(Path(path).read_bytes())
