"""MSHD binary array files.

Layout, all little-endian:

    4 bytes   magic "MSHD"
    u8        element kind: 0=int, 1=char, 2=real, 3=complex
    u8        number of dimensions (0 for a scalar)
    u64 * d   extents
    payload   elements in row-major order:
              int as i64, char as u8, real as f64,
              complex as an (re, im) pair of f64

Reading and writing round-trip bit-exactly.
"""

import struct

from .errors import FormatError, IoError

MAGIC = b"MSHD"

KIND_CODES = {"int": 0, "char": 1, "real": 2, "complex": 3}
KIND_NAMES = {v: k for k, v in KIND_CODES.items()}


def write_mshd(path, elem: str, shape: tuple, values) -> None:
    """Write values (row-major order) as an MSHD file."""
    count = 1
    for d in shape:
        count *= d
    values = list(values)
    if len(values) != count:
        raise FormatError(f"{len(values)} values for shape {shape}")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<BB", KIND_CODES[elem], len(shape))
    for d in shape:
        out += struct.pack("<Q", d)
    if elem == "complex":
        for v in values:
            v = complex(v)
            out += struct.pack("<dd", v.real, v.imag)
    elif elem == "real":
        for v in values:
            out += struct.pack("<d", float(v))
    elif elem == "int":
        for v in values:
            out += struct.pack("<q", int(v))
    else:  # char
        for v in values:
            out += struct.pack("<B", int(v) & 0xFF)
    try:
        with open(path, "wb") as fh:
            fh.write(out)
    except OSError as exc:
        raise IoError(str(exc)) from exc


def read_mshd(path):
    """Read an MSHD file; returns (elem, shape, values in row-major order)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise IoError(str(exc)) from exc
    if len(data) < 6 or data[:4] != MAGIC:
        raise FormatError(f"{path}: not an MSHD file")
    code, ndim = struct.unpack_from("<BB", data, 4)
    if code not in KIND_NAMES:
        raise FormatError(f"{path}: unknown element kind {code}")
    elem = KIND_NAMES[code]
    pos = 6
    shape = []
    for _ in range(ndim):
        if pos + 8 > len(data):
            raise FormatError(f"{path}: truncated header")
        (d,) = struct.unpack_from("<Q", data, pos)
        shape.append(d)
        pos += 8
    count = 1
    for d in shape:
        count *= d
    values = []
    if elem == "complex":
        need = pos + 16 * count
        if len(data) != need:
            raise FormatError(f"{path}: payload size mismatch")
        for i in range(count):
            re, im = struct.unpack_from("<dd", data, pos + 16 * i)
            values.append(complex(re, im))
    elif elem == "real":
        need = pos + 8 * count
        if len(data) != need:
            raise FormatError(f"{path}: payload size mismatch")
        for i in range(count):
            (v,) = struct.unpack_from("<d", data, pos + 8 * i)
            values.append(v)
    elif elem == "int":
        need = pos + 8 * count
        if len(data) != need:
            raise FormatError(f"{path}: payload size mismatch")
        for i in range(count):
            (v,) = struct.unpack_from("<q", data, pos + 8 * i)
            values.append(v)
    else:
        need = pos + count
        if len(data) != need:
            raise FormatError(f"{path}: payload size mismatch")
        values = list(data[pos:need])
    return elem, tuple(shape), values
