"""Binary model container.

Layout, all integers little-endian:

    magic  4 bytes  "SPGD"
    version  u32
    then zero or more sections until end of file:
        name_len  u32
        name      name_len bytes, UTF-8
        dtype     u8 (1 = float64)
        ndim      u8
        dims      ndim * u32
        payload   row-major little-endian float64 values

Round trips are bit-identical: payloads are written and read as raw
float64 bytes in canonical little-endian order.
"""

import struct

import numpy as np

__all__ = ["write_container", "read_container", "MAGIC", "VERSION"]

MAGIC = b"SPGD"
VERSION = 1
_DTYPE_FLOAT64 = 1
_MAX_NAME = 4096
_MAX_NDIM = 8


def write_container(path, sections, version: int = VERSION):
    """Write named float64 arrays in the order given.

    sections maps name -> array-like; scalars are stored as 0-d arrays.
    """
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", version))
        for name, value in sections.items():
            # tobytes(order="C") linearizes any layout; avoid helpers that
            # would promote 0-d scalars to 1-d here
            arr = np.asarray(value, dtype="<f8")
            encoded = name.encode("utf-8")
            if not encoded or len(encoded) > _MAX_NAME:
                raise ValueError(f"bad section name {name!r}")
            if arr.ndim > _MAX_NDIM:
                raise ValueError(f"section {name!r} has too many dimensions")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<BB", _DTYPE_FLOAT64, arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes(order="C"))


def _read_exact(fh, n, path, what):
    buf = fh.read(n)
    if len(buf) != n:
        raise ValueError(f"truncated container {path}: while reading {what}")
    return buf


def read_container(path, allowed=None):
    """Read all sections into a dict of float64 arrays.

    When allowed is given, any section name outside it is rejected and
    reported. Malformed or truncated files raise ValueError.
    """
    out = {}
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a model container: {path}")
        version = struct.unpack("<I", _read_exact(fh, 4, path, "version"))[0]
        if version > VERSION:
            raise ValueError(
                f"container version {version} newer than supported "
                f"{VERSION}: {path}")
        while True:
            head = fh.read(4)
            if not head:
                break
            if len(head) != 4:
                raise ValueError(
                    f"truncated container {path}: section header")
            (name_len,) = struct.unpack("<I", head)
            if name_len == 0 or name_len > _MAX_NAME:
                raise ValueError(
                    f"corrupt container {path}: section name length "
                    f"{name_len}")
            name = _read_exact(fh, name_len, path, "section name").decode(
                "utf-8")
            if allowed is not None and name not in allowed:
                raise ValueError(
                    f"unknown section {name!r} in {path}")
            if name in out:
                raise ValueError(f"duplicate section {name!r} in {path}")
            dtype_tag, ndim = struct.unpack(
                "<BB", _read_exact(fh, 2, path, f"{name} dtype"))
            if dtype_tag != _DTYPE_FLOAT64:
                raise ValueError(
                    f"unsupported dtype tag {dtype_tag} for section "
                    f"{name!r} in {path}")
            if ndim > _MAX_NDIM:
                raise ValueError(
                    f"corrupt container {path}: section {name!r} has "
                    f"{ndim} dimensions")
            dims = struct.unpack(
                f"<{ndim}I", _read_exact(fh, 4 * ndim, path, f"{name} dims"))
            count = 1
            for dim in dims:
                count *= dim
            payload = _read_exact(fh, 8 * count, path, f"{name} payload")
            out[name] = np.frombuffer(payload, dtype="<f8").reshape(dims).copy()
    return out
