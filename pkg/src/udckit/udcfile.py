"""Binary UDC container.

Layout, all little-endian::

    b"UDC1"
    uint32 X, uint32 Y, uint32 Z
    x-edge flags   bit-packed, x fastest, LSB first, padded to a whole byte
    y-edge flags   same
    z-edge flags   same
    float32 vertex part: every cube's x component (x fastest), then y, then z
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import GridSpec, UdcField
from .errors import CorruptUdcError

MAGIC = b"UDC1"
_HEADER = struct.Struct("<4sIII")


def _packed_len(n: int) -> int:
    return (n + 7) // 8


def encoded_size(grid: GridSpec) -> int:
    flags = sum(_packed_len(int(np.prod(s))) for s in grid.face_shapes)
    return _HEADER.size + flags + 4 * 3 * grid.cube_count


def write_udc(udc: UdcField) -> bytes:
    X, Y, Z = udc.grid.dims
    out = [_HEADER.pack(MAGIC, X, Y, Z)]
    for f in udc.face_part:
        out.append(np.packbits(f.ravel(order="F"), bitorder="little").tobytes())
    out.append(udc.vertex_part.reshape(3, -1, order="F").astype("<f4").tobytes())
    return b"".join(out)


def read_udc(data: bytes) -> UdcField:
    if len(data) < _HEADER.size:
        raise CorruptUdcError("corrupt UDC file: truncated header")
    magic, X, Y, Z = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptUdcError(f"corrupt UDC file: bad magic {magic!r}")
    try:
        grid = GridSpec((X, Y, Z))
    except ValueError as exc:
        raise CorruptUdcError(f"corrupt UDC file: {exc}") from None
    if len(data) != encoded_size(grid):
        raise CorruptUdcError(
            f"corrupt UDC file: expected {encoded_size(grid)} bytes, got {len(data)}")
    pos = _HEADER.size
    flags = []
    for shape in grid.face_shapes:
        n = int(np.prod(shape))
        nb = _packed_len(n)
        bits = np.unpackbits(np.frombuffer(data, np.uint8, nb, pos), count=n, bitorder="little")
        flags.append(bits.astype(bool).reshape(shape, order="F"))
        pos += nb
    v = np.frombuffer(data, "<f4", 3 * grid.cube_count, pos)
    v = v.reshape(3, -1).reshape((3,) + grid.dims, order="F")
    try:
        return UdcField(grid, v, tuple(flags))
    except ValueError as exc:
        raise CorruptUdcError(f"corrupt UDC file: {exc}") from None


def save_udc(udc: UdcField, path) -> None:
    Path(path).write_bytes(write_udc(udc))


def load_udc(path) -> UdcField:
    return read_udc(Path(path).read_bytes())
