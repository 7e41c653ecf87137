"""Episode recording files (magic "TREC"), one file per episode.

Byte layout (little-endian):

    magic         4 bytes  b"TREC"
    version       u32      currently 1
    seed          u64
    theme index   u8
    config digest 16 bytes
    record count  u32
    records       count x 19 bytes

Each record is ``<HHHBBBBdB``: floor, row, col, heading, move, jump,
rotate, reward (f64), done.  The first record is the reset snapshot; a
floor transition contributes an exit record on the finished floor followed
by a zero-reward entry record on the next one, so record rewards always sum
to the episode return.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

from ..errors import RecordingError
from .themes import THEME_NAMES

MAGIC = b"TREC"
VERSION = 1
RECORD_STRUCT = struct.Struct("<HHHBBBBdB")
HEADER_STRUCT = struct.Struct("<4sIQB16sI")


@dataclass(frozen=True)
class TickRecord:
    floor: int
    row: int
    col: int
    heading: int
    move: int
    jump: int
    rotate: int
    reward: float
    done: bool


@dataclass(frozen=True)
class Recording:
    seed: int
    theme: str
    config_digest: bytes
    records: tuple[TickRecord, ...]

    @property
    def episode_return(self) -> float:
        return sum(r.reward for r in self.records)


class EpisodeRecorder:
    """Collects tick records and writes one recording file on close."""

    def __init__(self, path: str | Path, seed: int, theme: str,
                 config_digest: bytes):
        self.path = Path(path)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.theme = theme
        self.config_digest = config_digest
        self._records: list[bytes] = []

    def record(self, floor: int, row: int, col: int, heading: int, move: int,
               jump: int, rotate: int, reward: float, done: bool) -> None:
        self._records.append(RECORD_STRUCT.pack(
            floor, row, col, heading, move, jump, rotate, reward, int(done)))

    def close(self) -> Path:
        header = HEADER_STRUCT.pack(
            MAGIC, VERSION, self.seed, THEME_NAMES.index(self.theme),
            self.config_digest, len(self._records))
        self.path.write_bytes(header + b"".join(self._records))
        return self.path

    def __enter__(self) -> "EpisodeRecorder":
        return self

    def __exit__(self, *exc) -> None:
        if exc[0] is None:
            self.close()


def read_recording(path: str | Path) -> Recording:
    """Parse a recording; malformed input raises with the failing byte offset."""
    blob = Path(path).read_bytes()
    if len(blob) < HEADER_STRUCT.size:
        raise RecordingError(f"{path}: truncated header", offset=len(blob))
    magic, version, seed, theme_id, digest, count = HEADER_STRUCT.unpack_from(blob, 0)
    if magic != MAGIC:
        raise RecordingError(f"{path}: bad magic {magic!r}", offset=0)
    if version != VERSION:
        raise RecordingError(f"{path}: unsupported version {version}", offset=4)
    if theme_id >= len(THEME_NAMES):
        raise RecordingError(f"{path}: unknown theme index {theme_id}", offset=16)

    records = []
    offset = HEADER_STRUCT.size
    for i in range(count):
        if offset + RECORD_STRUCT.size > len(blob):
            raise RecordingError(f"{path}: truncated record {i}", offset=offset)
        floor, row, col, heading, move, jump, rotate, reward, done = \
            RECORD_STRUCT.unpack_from(blob, offset)
        if heading > 3 or move > 1 or jump > 1 or rotate > 2 or done > 1:
            raise RecordingError(f"{path}: invalid fields in record {i}",
                                 offset=offset)
        records.append(TickRecord(floor, row, col, heading, move, jump, rotate,
                                  reward, bool(done)))
        offset += RECORD_STRUCT.size
    if offset != len(blob):
        raise RecordingError(f"{path}: {len(blob) - offset} trailing bytes",
                             offset=offset)
    return Recording(seed=seed, theme=THEME_NAMES[theme_id],
                     config_digest=digest, records=tuple(records))
