"""Binary checkpoints of real phase-space fields.

Layout (little-endian): magic ``b"WVL1"``, ``uint32 nx``, ``uint32 nv``,
``float64 Lx``, ``float64 Lv``, ``float64 eps``, ``float64 t``, then
``nx * nv`` float64 samples in row-major (x-major) order. ``eps = 0``
marks a classical run. The x-origin is not stored.
"""

import struct

import numpy as np

from .errors import ParameterError
from .spectral import PhaseField, PhaseGrid

MAGIC = b"WVL1"
HEADER = struct.Struct("<4sIIdddd")


def to_bytes(f, eps, t):
    f = f.physical()
    if not f.real:
        raise ParameterError("checkpoints store real fields only")
    g = f.grid
    head = HEADER.pack(MAGIC, g.gx.n, g.gv.n, g.gx.length, g.gv.length, float(eps or 0.0), float(t))
    return head + np.ascontiguousarray(f.data.real, dtype="<f8").tobytes()


def from_bytes(buf, x_origin=0.0):
    magic, nx, nv, lx, lv, eps, t = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise ParameterError(f"bad checkpoint magic {magic!r}")
    expected = HEADER.size + 8 * nx * nv
    if len(buf) != expected:
        raise ParameterError(f"checkpoint has {len(buf)} bytes, expected {expected}")
    data = np.frombuffer(buf, dtype="<f8", offset=HEADER.size).reshape(nx, nv)
    grid = PhaseGrid.make(nx, lx, nv, lv, x_origin)
    return PhaseField(grid, data, "physical", True), (eps if eps != 0.0 else None), t


def write(path, f, eps, t):
    with open(path, "wb") as fh:
        fh.write(to_bytes(f, eps, t))


def read(path, x_origin=0.0):
    with open(path, "rb") as fh:
        return from_bytes(fh.read(), x_origin)
