"""Binary parameter checkpoint format.

Little-endian layout:

    magic   4 bytes  b"PCKP"
    version u32      currently 1
    count   u32      number of tensors
    then per tensor:
    name_len u32, name utf-8, rank u32, shape u32 * rank, float64 payload

Readers reject unknown magic/version rather than guessing.
"""

from __future__ import annotations

import struct

import numpy as np

CHECKPOINT_MAGIC = b"PCKP"
CHECKPOINT_VERSION = 1


def save_tensors(path, named_arrays):
    """Write an ordered {name: ndarray} mapping to ``path``."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(named_arrays)))
        for name, arr in named_arrays.items():
            arr = np.asarray(arr, dtype=np.float64)
            raw_name = name.encode("utf-8")
            f.write(struct.pack("<I", len(raw_name)))
            f.write(raw_name)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(arr.astype("<f8").tobytes())


def load_tensors(path):
    """Read a checkpoint back into an ordered {name: ndarray} mapping."""
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != CHECKPOINT_MAGIC:
            raise ValueError(f"not a parameter checkpoint: bad magic {magic!r}")
        version, count = struct.unpack("<II", f.read(8))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        out = {}
        for _ in range(count):
            (name_len,) = struct.unpack("<I", f.read(4))
            name = f.read(name_len).decode("utf-8")
            (rank,) = struct.unpack("<I", f.read(4))
            shape = struct.unpack(f"<{rank}I", f.read(4 * rank)) if rank else ()
            n = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(f.read(8 * n), dtype="<f8").reshape(shape)
            out[name] = data.copy()
        return out
