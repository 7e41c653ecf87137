"""Seeded generation of solvable tower floors.

A floor is a horizontal chain of walled rooms joined by doors.  Difficulty
scales with the floor index: more rooms, a key/locked-door pair from the key
intro floor on, and gap bands (crossable only by jumping) from the gap intro
floor on.  Generation is a pure function of (seed, floor index, config);
themes never touch the grid.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import GenerationError, UsageError

# Cell kinds
WALL = 0
OPEN = 1
GAP = 2
DOOR = 3
LOCKED_DOOR = 4
KEY = 5
ORB = 6
START = 7
EXIT = 8

N_CELL_KINDS = 9

CELL_NAMES = {
    WALL: "wall", OPEN: "open", GAP: "gap", DOOR: "door",
    LOCKED_DOOR: "locked_door", KEY: "key", ORB: "orb",
    START: "start", EXIT: "exit",
}

# Cells an agent can stand on or pass through (locked doors need the key)
PASSABLE = frozenset({OPEN, GAP, DOOR, KEY, ORB, START, EXIT})

# interiors large enough that random walks usually time out, while the
# egocentric view still covers most of a room
ROOM_MIN = 5
ROOM_MAX = 8


@dataclass(frozen=True)
class FloorLayout:
    """One floor's pristine grid plus the landmark cells."""

    seed: int
    floor_index: int
    grid: np.ndarray
    start: tuple[int, int]
    exit_pos: tuple[int, int]
    key_pos: tuple[int, int] | None
    locked_door_pos: tuple[int, int] | None


def _room_count(floor_index: int, max_rooms: int) -> int:
    return min(2 + floor_index // 2, max_rooms)


def _pick_open_cell(rng: np.random.Generator, grid: np.ndarray,
                    span: tuple[int, int, int, int]) -> tuple[int, int]:
    x0, top, width, height = span
    cells = [(r, c) for r in range(top, top + height)
             for c in range(x0, x0 + width) if grid[r, c] == OPEN]
    return cells[int(rng.integers(len(cells)))]


def _build_candidate(rng: np.random.Generator, seed: int, floor_index: int,
                     config) -> FloorLayout:
    rooms = _room_count(floor_index, config.max_rooms)
    widths = rng.integers(ROOM_MIN, ROOM_MAX + 1, size=rooms)
    heights = rng.integers(ROOM_MIN, ROOM_MAX + 1, size=rooms)
    max_h = int(heights.max())
    grid = np.full((max_h + 2, int(widths.sum()) + rooms + 1), WALL, dtype=np.int8)

    spans = []
    x = 1
    for i in range(rooms):
        top = 1 + (max_h - int(heights[i])) // 2
        grid[top:top + heights[i], x:x + widths[i]] = OPEN
        spans.append((x, top, int(widths[i]), int(heights[i])))
        x += int(widths[i]) + 1

    locked_index = None
    if floor_index >= config.key_intro_floor:
        locked_index = int(rng.integers(rooms - 1))
    locked_door_pos = None
    for i in range(rooms - 1):
        x0, top, width, height = spans[i]
        x1, top1, _, height1 = spans[i + 1]
        lo = max(top, top1)
        hi = min(top + height, top1 + height1)
        row = int(rng.integers(lo, hi))
        col = x1 - 1
        if i == locked_index:
            grid[row, col] = LOCKED_DOOR
            locked_door_pos = (row, col)
        else:
            grid[row, col] = DOOR

    if floor_index >= config.gap_intro_floor and rooms >= 2:
        band = 2 if floor_index >= config.gap_intro_floor + 3 else 1
        gx, gtop, gwidth, gheight = spans[int(rng.integers(1, rooms))]
        col = int(rng.integers(gx + 1, gx + gwidth - band))
        grid[gtop:gtop + gheight, col:col + band] = GAP

    start = _pick_open_cell(rng, grid, spans[0])
    grid[start] = START
    exit_pos = _pick_open_cell(rng, grid, spans[-1])
    grid[exit_pos] = EXIT

    key_pos = None
    if locked_index is not None:
        key_room = int(rng.integers(locked_index + 1))
        key_pos = _pick_open_cell(rng, grid, spans[key_room])
        grid[key_pos] = KEY

    for _ in range(int(rng.integers(0, 3))):
        open_cells = np.argwhere(grid == OPEN)
        r, c = open_cells[int(rng.integers(len(open_cells)))]
        grid[r, c] = ORB

    grid.flags.writeable = False
    return FloorLayout(seed=seed, floor_index=floor_index, grid=grid,
                       start=start, exit_pos=exit_pos, key_pos=key_pos,
                       locked_door_pos=locked_door_pos)


def solvable(grid: np.ndarray, start: tuple[int, int]) -> bool:
    """Breadth-first search over (position, key phase) to the exit.

    Phases: 0 before the key, 1 holding it, 2 after spending it on the
    locked door.  Gap cells count as passable since jumps cross them.
    """
    rows, cols = grid.shape
    initial = (start[0], start[1], 0)
    seen = {initial}
    queue = deque([initial])
    while queue:
        r, c, phase = queue.popleft()
        if grid[r, c] == EXIT:
            return True
        for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
            nr, nc = r + dr, c + dc
            if not (0 <= nr < rows and 0 <= nc < cols):
                continue
            kind = grid[nr, nc]
            nphase = phase
            if kind == LOCKED_DOOR:
                if phase != 1:
                    continue
                nphase = 2
            elif kind not in PASSABLE:
                continue
            elif kind == KEY and phase == 0:
                nphase = 1
            state = (nr, nc, nphase)
            if state not in seen:
                seen.add(state)
                queue.append(state)
    return False


def generate_floor(seed: int, floor_index: int, config) -> FloorLayout:
    """Deterministic, search-verified layout for (seed, floor_index)."""
    if floor_index >= config.floor_cap:
        raise UsageError(
            f"floor index {floor_index} is beyond the floor cap {config.floor_cap}")
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    for attempt in range(config.max_gen_retries):
        rng = np.random.default_rng(
            np.random.SeedSequence((seed, floor_index, attempt)))
        layout = _build_candidate(rng, seed, floor_index, config)
        if solvable(layout.grid, layout.start):
            return layout
    raise GenerationError(
        f"no solvable layout for seed {seed} floor {floor_index} after "
        f"{config.max_gen_retries} attempts")
