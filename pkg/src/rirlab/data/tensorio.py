"""Binary tensor-file format used for embeddings and model weights.

Layout (little-endian):

    magic    4 bytes  b"MRT1"
    dtype    u8       0 = 32-bit float
    ndim     u8
    reserved 2 bytes  zero
    dims     ndim x u32
    payload  row-major float32 values
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import RirlabError

MAGIC = b"MRT1"
DTYPE_F32 = 0
_HEADER = struct.Struct("<4sBBH")


def write_tensor(path, array) -> None:
    """Write an array as a float32 tensor file."""
    arr = np.ascontiguousarray(array, dtype=np.float32)
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, DTYPE_F32, arr.ndim, 0))
        fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
        fh.write(arr.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a tensor file back as a float32 array."""
    path = Path(path)
    if not path.is_file():
        raise RirlabError(f"no such file: {path}")
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise RirlabError(f"{path}: not a tensor file (truncated header)")
    magic, dtype, ndim, reserved = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise RirlabError(f"{path}: not a tensor file (bad magic {magic!r})")
    if dtype != DTYPE_F32:
        raise RirlabError(f"{path}: unsupported tensor dtype code {dtype}")
    if reserved != 0:
        raise RirlabError(f"{path}: reserved header bytes must be zero")
    dims_end = _HEADER.size + 4 * ndim
    if len(raw) < dims_end:
        raise RirlabError(f"{path}: truncated tensor dims")
    dims = struct.unpack_from(f"<{ndim}I", raw, _HEADER.size)
    count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
    payload = raw[dims_end:]
    if len(payload) != 4 * count:
        raise RirlabError(
            f"{path}: payload is {len(payload)} bytes, expected {4 * count}"
        )
    return np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
