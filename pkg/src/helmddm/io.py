"""Field dumps, residual histories and PPM images.

Field dump layout (little endian)::

    b"HDMF"  u32 version=1  u32 nx  u32 ny  f64 x0  f64 y0  f64 h
    nx*ny complex values as (re f64, im f64), x index fastest
"""
from __future__ import annotations

import csv
import struct

import numpy as np

from .errors import ContractError
from .grid import FieldGrid, Window

MAGIC = b"HDMF"
VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


class DumpFormatError(ContractError):
    pass


def write_field(path, field: FieldGrid):
    ny, nx = field.values.shape
    x0, y0 = field.origin
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, nx, ny, x0, y0, field.h))
        fh.write(np.ascontiguousarray(field.values, dtype="<c16").tobytes())


def read_field(path) -> FieldGrid:
    """Read a dump; the window is placed at lattice origin ``(0, 0)`` with ``anchor = (x0, y0)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise DumpFormatError(f"{path}: file too short for a field header")
    magic, version, nx, ny, x0, y0, h = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise DumpFormatError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise DumpFormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 16 * nx * ny
    if len(raw) != expected:
        raise DumpFormatError(f"{path}: expected {expected} bytes, found {len(raw)}")
    values = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size).reshape(ny, nx).astype(complex)
    return FieldGrid(Window(0, 0, nx, ny), values, h, (x0, y0))


def write_history(path, rows):
    """Residual history as CSV with header ``step,relres,wall_ms``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "relres", "wall_ms"])
        for step, res, ms in rows:
            w.writerow([int(step), f"{res:.6e}", f"{ms:.3f}"])


def colormap(v):
    """Blue (-1) to white (0) to red (+1); ``v`` already clipped to [-1, 1]."""
    v = np.asarray(v, dtype=float)
    rgb = np.empty(v.shape + (3,), dtype=float)
    pos = v >= 0
    rgb[..., 0] = np.where(pos, 1.0, 1.0 + v)
    rgb[..., 1] = 1.0 - np.abs(v)
    rgb[..., 2] = np.where(pos, 1.0 - v, 1.0)
    return np.rint(255.0 * rgb).astype(np.uint8)


def render_ppm(field: FieldGrid, path, vmax=None):
    """Real part as a binary PPM, one pixel per node, y increasing downward."""
    re = np.real(field.values)
    if re.size == 0:
        raise ContractError("empty field")
    if vmax is None:
        vmax = float(np.max(np.abs(re)))
    v = np.zeros_like(re) if vmax == 0 else np.clip(re / vmax, -1.0, 1.0)
    img = colormap(v)
    ny, nx = re.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{nx} {ny}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def read_ppm(path):
    """Minimal P6 reader (used by tests and the demos)."""
    with open(path, "rb") as fh:
        data = fh.read()
    # header is four whitespace separated tokens, then exactly one whitespace byte
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        if end == pos:
            raise DumpFormatError(f"{path}: truncated PPM header")
        tokens.append(data[pos:end])
        pos = end
    if tokens[0] != b"P6":
        raise DumpFormatError(f"{path}: not a binary PPM")
    nx, ny, maxval = (int(t) for t in tokens[1:])
    if maxval != 255:
        raise DumpFormatError(f"{path}: unsupported maxval {maxval}")
    pix = np.frombuffer(data[pos + 1: pos + 1 + 3 * nx * ny], dtype=np.uint8)
    if pix.size != 3 * nx * ny:
        raise DumpFormatError(f"{path}: truncated pixel data")
    return pix.reshape(ny, nx, 3)
