"""Flat binary container for named float64 arrays.

Layout (little-endian throughout):
    magic  4 bytes  b"CMZ1"
    count  uint32
    per entry:
        name_len  uint16
        name      UTF-8 bytes
        ndim      uint8
        dims      ndim * uint32
        payload   float64 array, C order
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .optim import ParamSet
from .tensor import UsageError

MAGIC = b"CMZ1"


def save_arrays(path, arrays: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays.items():
            # asarray keeps 0-d shapes, unlike ascontiguousarray
            arr = np.asarray(arr, dtype="<f8", order="C")
            encoded = name.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            for dim in arr.shape:
                fh.write(struct.pack("<I", dim))
            fh.write(arr.tobytes())


def load_arrays(path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise UsageError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    off = 4
    (count,) = struct.unpack_from("<I", data, off)
    off += 4
    out: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", data, off)
        off += 2
        name = data[off : off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = struct.unpack_from("<B", data, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", data, off) if ndim else ()
        off += 4 * ndim
        n = int(np.prod(shape)) if ndim else 1
        arr = np.frombuffer(data, dtype="<f8", count=n, offset=off).reshape(shape)
        off += 8 * n
        out[name] = arr.astype(np.float64)
    return out


def save_params(path, params: ParamSet) -> None:
    save_arrays(path, {name: t.data for name, t in params.items()})


def load_params(path, params: ParamSet) -> None:
    params.load_state_dict(load_arrays(path))
