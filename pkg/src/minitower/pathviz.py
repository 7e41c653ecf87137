"""Top-down agent path renders from episode recordings.

Per floor: the themed grid, the visited cells colored by a red-to-blue
gradient over the episode's record index, then key/door/exit glyphs drawn
on top.  Path squares are inset by a quarter cell; later visits overwrite
earlier ones.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .env import layout as L
from .env.layout import generate_floor
from .env.recording import Recording
from .env.render import build_tiles
from .env.themes import get_theme
from .errors import ConfigurationError, RecordingError
from .ppm import write_ppm

PATH_CELL_PX = 8

KEY_GLYPH_COLOR = (255, 215, 0)
DOOR_GLYPH_COLOR = (150, 75, 25)
EXIT_GLYPH_COLOR = (245, 245, 245)
GLYPH_EDGE_COLOR = (15, 15, 15)


def path_color(index: int, total: int) -> tuple[int, int, int]:
    """Red at the first record, blue at the last, linear in between."""
    t = index / (total - 1) if total > 1 else 0.0
    return (int(round(255 * (1 - t))), 0, int(round(255 * t)))


def trace_points(recording: Recording) -> dict[int, list[tuple[int, int, int]]]:
    """Per-floor ordered (row, col, record index); validates cell adjacency."""
    per_floor: dict[int, list[tuple[int, int, int]]] = {}
    prev: tuple[int, int, int] | None = None  # (floor, row, col)
    for idx, rec in enumerate(recording.records):
        if prev is not None and prev[0] == rec.floor:
            if abs(prev[1] - rec.row) + abs(prev[2] - rec.col) > 1:
                raise RecordingError(
                    f"non-adjacent trace positions at record {idx}",
                    offset=37 + 19 * idx)
        per_floor.setdefault(rec.floor, []).append((rec.row, rec.col, idx))
        prev = (rec.floor, rec.row, rec.col)
    return per_floor


def _draw_glyph(image: np.ndarray, row: int, col: int, cell_px: int,
                kind: int) -> None:
    y0, x0 = row * cell_px, col * cell_px
    block = image[y0:y0 + cell_px, x0:x0 + cell_px]
    mid = cell_px // 2
    if kind == L.KEY:
        block[1:cell_px - 1, mid - 1:mid + 1] = KEY_GLYPH_COLOR
        block[mid - 1:mid + 1, 1:cell_px - 1] = KEY_GLYPH_COLOR
    elif kind in (L.DOOR, L.LOCKED_DOOR):
        block[1:cell_px - 1, 1:cell_px - 1] = GLYPH_EDGE_COLOR
        block[2:cell_px - 2, 2:cell_px - 2] = DOOR_GLYPH_COLOR
    elif kind == L.EXIT:
        yy, xx = np.mgrid[0:cell_px, 0:cell_px]
        diamond = (np.abs(yy - mid) + np.abs(xx - mid)) <= (mid - 1)
        block[diamond] = EXIT_GLYPH_COLOR


def render_floor_path(grid: np.ndarray, points: list[tuple[int, int, int]],
                      total_records: int, theme_name: str,
                      cell_px: int = PATH_CELL_PX) -> np.ndarray:
    """Allocentric floor image with the gradient path and landmark glyphs."""
    tiles = build_tiles(get_theme(theme_name), cell_px)
    blocks = tiles[grid]
    image = np.ascontiguousarray(blocks.transpose(0, 2, 1, 3, 4)).reshape(
        grid.shape[0] * cell_px, grid.shape[1] * cell_px, 3)

    inset = cell_px // 4
    for row, col, idx in points:
        color = path_color(idx, total_records)
        image[row * cell_px + inset:(row + 1) * cell_px - inset,
              col * cell_px + inset:(col + 1) * cell_px - inset] = color

    for kind in (L.KEY, L.LOCKED_DOOR, L.DOOR, L.EXIT):
        for row, col in np.argwhere(grid == kind):
            _draw_glyph(image, int(row), int(col), cell_px, kind)
    return image


def render_paths_for_recording(recording: Recording, env_config, out_dir,
                               stem: str, cell_px: int = PATH_CELL_PX) -> list[Path]:
    """One path image per visited floor, regenerating layouts from the seed."""
    if recording.config_digest != env_config.digest():
        raise ConfigurationError(
            "recording was made with a different environment config")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    per_floor = trace_points(recording)
    total = len(recording.records)
    written = []
    for floor in sorted(per_floor):
        lay = generate_floor(recording.seed, floor, env_config)
        image = render_floor_path(lay.grid, per_floor[floor], total,
                                  recording.theme, cell_px)
        path = out_dir / f"{stem}_floor{floor:02d}.ppm"
        write_ppm(path, image)
        written.append(path)
    return written
