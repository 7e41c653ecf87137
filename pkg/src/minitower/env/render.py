"""Egocentric top-down rasterization of the agent's surroundings.

The renderer extracts a (2r+1) x (2r+1) window of cell kinds around the
agent, rotates it so the agent's heading points up, and paints one theme
tile per cell.  Out-of-view space and padding use the theme background.
Rendering is a pure function of (grid, position, heading, theme, config).
"""

from __future__ import annotations

import numpy as np

from . import layout
from .themes import AGENT_COLOR, AGENT_NOTCH, ThemeSpec, get_theme

# heading indices; rotating the view by `heading` quarter turns puts the
# faced direction at the top of the frame
NORTH, EAST, SOUTH, WEST = range(4)
DIR_VECTORS = ((-1, 0), (0, 1), (1, 0), (0, -1))

_TILE_CACHE: dict[tuple[str, int], np.ndarray] = {}


def _pattern_mask(pattern: str, cell_px: int) -> np.ndarray:
    yy, xx = np.mgrid[0:cell_px, 0:cell_px]
    if pattern == "checker":
        return ((yy // 2 + xx // 2) % 2) == 0
    if pattern == "stripes":
        return (yy % 4) < 2
    if pattern == "dots":
        return ((yy % 3) == 1) & ((xx % 3) == 1)
    return np.zeros((cell_px, cell_px), dtype=bool)


def build_tiles(theme: ThemeSpec, cell_px: int) -> np.ndarray:
    """(kind, cell_px, cell_px, 3) uint8 tile atlas for one theme."""
    tiles = np.zeros((layout.N_CELL_KINDS, cell_px, cell_px, 3), dtype=np.int16)
    for kind, color in theme.colors.items():
        tiles[kind] = np.array(color, dtype=np.int16)
    mask = _pattern_mask(theme.pattern, cell_px)
    for kind in (layout.OPEN, layout.START):
        tiles[kind][mask] += theme.pattern_delta
    return np.clip(tiles, 0, 255).astype(np.uint8)


def _tiles_for(theme_name: str, cell_px: int) -> np.ndarray:
    key = (theme_name, cell_px)
    if key not in _TILE_CACHE:
        _TILE_CACHE[key] = build_tiles(get_theme(theme_name), cell_px)
    return _TILE_CACHE[key]


def extract_view(grid: np.ndarray, pos: tuple[int, int], radius: int) -> np.ndarray:
    """Window of cell kinds centered on pos; outside the grid reads as wall."""
    v = 2 * radius + 1
    window = np.full((v, v), layout.WALL, dtype=np.int8)
    r0, c0 = pos[0] - radius, pos[1] - radius
    gr0, gc0 = max(r0, 0), max(c0, 0)
    gr1 = min(r0 + v, grid.shape[0])
    gc1 = min(c0 + v, grid.shape[1])
    if gr1 > gr0 and gc1 > gc0:
        window[gr0 - r0:gr1 - r0, gc0 - c0:gc1 - c0] = grid[gr0:gr1, gc0:gc1]
    return window


def _paint_agent(block: np.ndarray) -> None:
    px = block.shape[0]
    inset = max(px // 4, 1)
    block[inset:px - inset, inset:px - inset] = AGENT_COLOR
    mid = px // 2
    block[inset:inset + 2, mid - 1:mid + 1] = AGENT_NOTCH


def render_frame(grid: np.ndarray, pos: tuple[int, int], heading: int,
                 theme_name: str, config) -> np.ndarray:
    """Render the agent's view as an (H, W, 3) uint8 image."""
    v = 2 * config.view_radius + 1
    cell_px = min(config.frame_height, config.frame_width) // v
    tiles = _tiles_for(theme_name, cell_px)

    window = np.rot90(extract_view(grid, pos, config.view_radius), k=heading)
    blocks = tiles[window]
    inner = np.ascontiguousarray(blocks.transpose(0, 2, 1, 3, 4)).reshape(
        v * cell_px, v * cell_px, 3)
    _paint_agent(inner[config.view_radius * cell_px:(config.view_radius + 1) * cell_px,
                       config.view_radius * cell_px:(config.view_radius + 1) * cell_px])

    h, w = config.frame_height, config.frame_width
    if inner.shape[:2] == (h, w):
        return inner
    canvas = np.empty((h, w, 3), dtype=np.uint8)
    canvas[...] = get_theme(theme_name).background
    y0 = (h - inner.shape[0]) // 2
    x0 = (w - inner.shape[1]) // 2
    canvas[y0:y0 + inner.shape[0], x0:x0 + inner.shape[1]] = inner
    return canvas
