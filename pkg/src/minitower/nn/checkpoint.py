"""Flat binary parameter container (magic "TLCK").

Byte layout (all integers little-endian):

    magic        4 bytes  b"TLCK"
    version      u32      currently 1
    tensor count u32
    per tensor:
      name length  u16
      name         UTF-8 bytes
      rank         u8
      extents      rank x u32
      data         prod(extents) x float32, little-endian, C order

Data is always stored as 32-bit floats regardless of in-memory dtype.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError

MAGIC = b"TLCK"
VERSION = 1


def save_tensors(path: str | Path, tensors: dict[str, np.ndarray]) -> None:
    """Write named arrays to a TLCK container."""
    parts = [MAGIC, struct.pack("<II", VERSION, len(tensors))]
    for name, arr in tensors.items():
        raw = name.encode("utf-8")
        arr = np.ascontiguousarray(arr)
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
        parts.append(arr.astype("<f4").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_tensors(path: str | Path) -> dict[str, np.ndarray]:
    """Read a TLCK container into name -> float32 array."""
    blob = Path(path).read_bytes()
    if blob[:4] != MAGIC:
        raise ConfigurationError(f"{path}: not a TLCK checkpoint (bad magic)")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != VERSION:
        raise ConfigurationError(f"{path}: unsupported TLCK version {version}")
    offset = 12
    out: dict[str, np.ndarray] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, offset)
            offset += 2
            name = blob[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<B", blob, offset)
            offset += 1
            extents = struct.unpack_from(f"<{rank}I", blob, offset)
            offset += 4 * rank
            n = int(np.prod(extents)) if rank else 1
            data = np.frombuffer(blob, dtype="<f4", count=n, offset=offset)
            offset += 4 * n
            out[name] = data.reshape(extents).copy()
    except (struct.error, ValueError) as exc:
        raise ConfigurationError(f"{path}: truncated TLCK container ({exc})") from exc
    if offset != len(blob):
        raise ConfigurationError(f"{path}: {len(blob) - offset} trailing bytes")
    return out
