"""Flat binary container for complex grid and tent fields.

Layout (all integers little-endian)::

    b"TLAB1" | uint32 header_len | header JSON (sorted keys, compact) | payload | uint32 crc32

The header is ``{"dims": [...], "dtype": "complex64" | "complex128"}``; the payload is
the row-major little-endian array; the CRC covers every byte before the trailer.
"""
from __future__ import annotations

import json
import struct
import zlib
from pathlib import Path

import numpy as np

from .errors import FieldFileError

MAGIC = b"TLAB1"
DTYPES = {"complex64": "<c8", "complex128": "<c16"}


def encode_field(values, dtype: str = "complex128") -> bytes:
    if dtype not in DTYPES:
        raise FieldFileError(f"unsupported dtype {dtype!r}")
    arr = np.ascontiguousarray(np.asarray(values), dtype=DTYPES[dtype])
    header = json.dumps({"dims": list(arr.shape), "dtype": dtype},
                        sort_keys=True, separators=(",", ":")).encode()
    body = MAGIC + struct.pack("<I", len(header)) + header + arr.tobytes(order="C")
    return body + struct.pack("<I", zlib.crc32(body) & 0xFFFFFFFF)


def decode_field(blob: bytes) -> np.ndarray:
    if len(blob) < len(MAGIC) + 8 or not blob.startswith(MAGIC):
        raise FieldFileError("not a field file (bad magic)")
    body, trailer = blob[:-4], blob[-4:]
    if struct.unpack("<I", trailer)[0] != (zlib.crc32(body) & 0xFFFFFFFF):
        raise FieldFileError("checksum mismatch")
    (hlen,) = struct.unpack_from("<I", body, len(MAGIC))
    start = len(MAGIC) + 4
    try:
        header = json.loads(body[start:start + hlen].decode())
        dims = [int(d) for d in header["dims"]]
        code = DTYPES[header["dtype"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise FieldFileError(f"malformed header: {exc}") from exc
    payload = body[start + hlen:]
    want = int(np.prod(dims)) * np.dtype(code).itemsize
    if len(payload) != want:
        raise FieldFileError(f"payload has {len(payload)} bytes, header implies {want}")
    return np.frombuffer(payload, dtype=code).reshape(dims).copy()


def write_field(path, values, dtype: str = "complex128") -> None:
    try:
        Path(path).write_bytes(encode_field(values, dtype))
    except OSError as exc:
        if isinstance(exc, FieldFileError):
            raise
        raise FieldFileError(str(exc)) from exc


def read_field(path) -> np.ndarray:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise FieldFileError(str(exc)) from exc
    return decode_field(blob)
