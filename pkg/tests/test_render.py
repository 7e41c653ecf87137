from __future__ import annotations

import numpy as np

from minitower.env import EnvConfig, MiniTowerEnv, THEMES, THEME_NAMES, render_frame
from minitower.env import layout as L
from minitower.env.render import EAST, NORTH, extract_view

CFG = EnvConfig()


def small_grid() -> np.ndarray:
    grid = np.full((9, 9), L.WALL, dtype=np.int8)
    grid[1:8, 1:8] = L.OPEN
    grid[4, 4] = L.START
    return grid


def test_render_is_deterministic():
    grid = small_grid()
    a = render_frame(grid, (4, 4), NORTH, "moorish", CFG)
    b = render_frame(grid, (4, 4), NORTH, "moorish", CFG)
    assert a.dtype == np.uint8 and a.shape == (64, 64, 3)
    assert a.tobytes() == b.tobytes()


def test_out_of_bounds_reads_as_wall():
    grid = small_grid()
    view = extract_view(grid, (0, 0), radius=3)
    assert np.all(view[:3, :] == L.WALL)
    assert np.all(view[:, :3] == L.WALL)


def test_heading_points_up():
    # a distinctive cell east of the agent must appear directly above the
    # agent when it faces east
    grid = small_grid()
    grid[4, 5] = L.EXIT
    frame = render_frame(grid, (4, 4), EAST, "modern", CFG)
    cell_px = 64 // 7
    above_center = frame[3 * cell_px - 2, 3 * cell_px + cell_px // 2]
    assert tuple(above_center) == THEMES["modern"].colors[L.EXIT]


def test_key_tint_visible_when_key_in_view():
    grid = small_grid()
    grid[4, 6] = L.KEY
    for theme in THEME_NAMES:
        frame = render_frame(grid, (4, 4), NORTH, theme, CFG)
        key_color = np.array(THEMES[theme].colors[L.KEY], dtype=np.uint8)
        assert np.any(np.all(frame == key_color, axis=-1)), theme


def test_theme_pairs_differ_in_at_least_30_percent_of_pixels():
    # measured minimum over 100 random states was ~0.55; the spec floor is 0.30
    rng = np.random.default_rng(0)
    env = MiniTowerEnv(CFG)
    worst = 1.0
    for _ in range(100):
        seed = int(rng.integers(10_000))
        env.reset(seed, "ancient")
        for _ in range(int(rng.integers(1, 10))):
            if env.done:
                break
            env.step((int(rng.integers(2)), int(rng.integers(2)),
                      int(rng.integers(3))))
        frames = [render_frame(env.grid, env.pos, env.heading, t, CFG)
                  for t in THEME_NAMES]
        for i in range(len(frames)):
            for j in range(i + 1, len(frames)):
                differing = np.any(frames[i] != frames[j], axis=-1).mean()
                worst = min(worst, differing)
    assert worst >= 0.30, worst
