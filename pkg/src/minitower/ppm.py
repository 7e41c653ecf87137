"""Binary PPM (P6) read/write; the package's baseline image format."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import UsageError


def write_ppm(path: str | Path, image: np.ndarray) -> None:
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise UsageError(f"expected (H, W, 3) uint8 image, got {image.shape} "
                         f"{image.dtype}")
    h, w = image.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + np.ascontiguousarray(image).tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    blob = Path(path).read_bytes()
    if not blob.startswith(b"P6"):
        raise UsageError(f"{path}: not a binary PPM file")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    pos += 1  # single whitespace after maxval
    w, h, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise UsageError(f"{path}: unsupported maxval {maxval}")
    data = np.frombuffer(blob, dtype=np.uint8, count=w * h * 3, offset=pos)
    return data.reshape(h, w, 3).copy()
