from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minitower.env import EnvConfig, generate_floor
from minitower.env import layout as L
from minitower.errors import UsageError

from oracles import bfs_solvable

CELL_KINDS = {"wall": L.WALL, "locked_door": L.LOCKED_DOOR, "key": L.KEY,
              "exit": L.EXIT, "start": L.START}

CFG = EnvConfig()


def test_same_inputs_same_grid():
    a = generate_floor(1234, 3, CFG)
    b = generate_floor(1234, 3, CFG)
    assert a.grid.tobytes() == b.grid.tobytes()
    assert a.start == b.start and a.exit_pos == b.exit_pos


def test_no_keys_below_intro_floor():
    for seed in range(50):
        for floor in range(CFG.key_intro_floor):
            grid = generate_floor(seed, floor, CFG).grid
            assert not np.any(grid == L.KEY)
            assert not np.any(grid == L.LOCKED_DOOR)


def test_key_and_lock_present_from_intro_floor():
    for seed in range(50):
        grid = generate_floor(seed, CFG.key_intro_floor, CFG).grid
        assert np.count_nonzero(grid == L.KEY) == 1
        assert np.count_nonzero(grid == L.LOCKED_DOOR) == 1


def test_no_gaps_below_intro_floor():
    for seed in range(50):
        for floor in range(CFG.gap_intro_floor):
            grid = generate_floor(seed, floor, CFG).grid
            assert not np.any(grid == L.GAP)
        assert np.any(generate_floor(seed, CFG.gap_intro_floor, CFG).grid == L.GAP)


def test_double_gap_band_on_high_floors():
    floor = CFG.gap_intro_floor + 3
    found_double = False
    for seed in range(20):
        grid = generate_floor(seed, floor, CFG).grid
        gap_cols = np.unique(np.argwhere(grid == L.GAP)[:, 1])
        if len(gap_cols) == 2 and gap_cols[1] == gap_cols[0] + 1:
            found_double = True
    assert found_double


def test_solvable_sample_against_oracle():
    rng = np.random.default_rng(0)
    for _ in range(300):
        seed = int(rng.integers(0, 2**32))
        floor = int(rng.integers(0, CFG.floor_cap))
        lay = generate_floor(seed, floor, CFG)
        assert bfs_solvable(lay.grid, CELL_KINDS), (seed, floor)


def test_floor_beyond_cap_rejected():
    with pytest.raises(UsageError):
        generate_floor(0, CFG.floor_cap, CFG)


@given(seed=st.integers(0, 2**63 - 1), floor=st.integers(0, 9))
@settings(max_examples=80, deadline=None)
def test_layout_invariants(seed, floor):
    lay = generate_floor(seed, floor, CFG)
    grid = lay.grid
    # walls all around
    assert np.all(grid[0] == L.WALL) and np.all(grid[-1] == L.WALL)
    assert np.all(grid[:, 0] == L.WALL) and np.all(grid[:, -1] == L.WALL)
    # exactly one start and one exit, matching the landmark fields
    assert np.count_nonzero(grid == L.START) == 1
    assert np.count_nonzero(grid == L.EXIT) == 1
    assert grid[lay.start] == L.START
    assert grid[lay.exit_pos] == L.EXIT
    if floor < CFG.key_intro_floor:
        assert lay.key_pos is None and lay.locked_door_pos is None
    else:
        assert grid[lay.key_pos] == L.KEY
        assert grid[lay.locked_door_pos] == L.LOCKED_DOOR
