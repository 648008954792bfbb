"""Versioned binary container for parameter checkpoints.

Layout: magic (4 bytes), format version (u32 LE), header length (u64 LE),
header JSON (utf-8), then for each array: name length (u32), name bytes,
ndim (u32), extents (u64 each), raw float64 little-endian payload.
"""

from __future__ import annotations

import json
import struct
from typing import Dict, List, Tuple

import numpy as np

from .errors import CheckpointError

FORMAT_VERSION = 1


def write_container(path, magic: bytes, header: dict,
                    arrays: List[Tuple[str, np.ndarray]]) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be 4 bytes")
    header_bytes = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays:
            arr = np.ascontiguousarray(arr, dtype="<f8")
            name_bytes = name.encode()
            fh.write(struct.pack("<I", len(name_bytes)))
            fh.write(name_bytes)
            fh.write(struct.pack("<I", arr.ndim))
            for extent in arr.shape:
                fh.write(struct.pack("<Q", extent))
            fh.write(arr.tobytes())


def read_container(path, magic: bytes) -> Tuple[dict, Dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        found = fh.read(4)
        if found != magic:
            raise CheckpointError(f"bad magic: expected {magic!r}, found {found!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        (header_len,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(header_len).decode())
        (n_arrays,) = struct.unpack("<I", fh.read(4))
        arrays: Dict[str, np.ndarray] = {}
        for _ in range(n_arrays):
            (name_len,) = struct.unpack("<I", fh.read(4))
            name = fh.read(name_len).decode()
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = tuple(struct.unpack("<Q", fh.read(8))[0] for _ in range(ndim))
            count = int(np.prod(shape)) if shape else 1
            payload = fh.read(count * 8)
            if len(payload) != count * 8:
                raise CheckpointError(f"truncated payload for array {name!r}")
            arrays[name] = np.frombuffer(payload, dtype="<f8").reshape(shape).copy()
    return header, arrays
