"""Visual themes: palettes and floor texture patterns.

Themes change pixels only, never dynamics.  The ancient palette deliberately
keeps everything in low-contrast brownish hues; the two held-out themes
(moorish, future) sit far from the training palettes.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import layout

RGB = tuple[int, int, int]

AGENT_COLOR: RGB = (255, 255, 255)
AGENT_NOTCH: RGB = (10, 10, 10)


@dataclass(frozen=True)
class ThemeSpec:
    name: str
    background: RGB
    colors: dict[int, RGB]
    pattern: str          # plain | checker | stripes | dots
    pattern_delta: int    # brightness offset applied by the pattern


THEMES: dict[str, ThemeSpec] = {
    "ancient": ThemeSpec(
        name="ancient",
        background=(62, 47, 28),
        colors={
            layout.WALL: (101, 67, 33),
            layout.OPEN: (181, 154, 110),
            layout.GAP: (41, 30, 18),
            layout.DOOR: (143, 103, 60),
            layout.LOCKED_DOOR: (122, 82, 48),
            layout.KEY: (202, 172, 96),
            layout.ORB: (96, 112, 158),
            layout.START: (172, 146, 104),
            layout.EXIT: (152, 121, 76),
        },
        pattern="checker",
        pattern_delta=7,
    ),
    "industrial": ThemeSpec(
        name="industrial",
        background=(38, 40, 44),
        colors={
            layout.WALL: (88, 93, 99),
            layout.OPEN: (150, 152, 156),
            layout.GAP: (22, 23, 26),
            layout.DOOR: (176, 122, 40),
            layout.LOCKED_DOOR: (196, 142, 28),
            layout.KEY: (240, 208, 58),
            layout.ORB: (70, 150, 220),
            layout.START: (138, 144, 148),
            layout.EXIT: (62, 198, 92),
        },
        pattern="stripes",
        pattern_delta=12,
    ),
    "modern": ThemeSpec(
        name="modern",
        background=(182, 186, 196),
        colors={
            layout.WALL: (236, 236, 242),
            layout.OPEN: (208, 213, 220),
            layout.GAP: (16, 16, 20),
            layout.DOOR: (84, 84, 222),
            layout.LOCKED_DOOR: (222, 62, 142),
            layout.KEY: (250, 198, 32),
            layout.ORB: (42, 168, 250),
            layout.START: (200, 206, 214),
            layout.EXIT: (22, 178, 122),
        },
        pattern="dots",
        pattern_delta=10,
    ),
    "moorish": ThemeSpec(
        name="moorish",
        background=(20, 43, 88),
        colors={
            layout.WALL: (32, 72, 142),
            layout.OPEN: (198, 178, 138),
            layout.GAP: (9, 15, 34),
            layout.DOOR: (182, 62, 62),
            layout.LOCKED_DOOR: (150, 40, 92),
            layout.KEY: (255, 214, 10),
            layout.ORB: (98, 220, 210),
            layout.START: (190, 172, 132),
            layout.EXIT: (238, 238, 238),
        },
        pattern="checker",
        pattern_delta=24,
    ),
    "future": ThemeSpec(
        name="future",
        background=(10, 10, 16),
        colors={
            layout.WALL: (26, 26, 36),
            layout.OPEN: (46, 51, 66),
            layout.GAP: (4, 4, 8),
            layout.DOOR: (0, 228, 182),
            layout.LOCKED_DOOR: (253, 42, 120),
            layout.KEY: (190, 252, 42),
            layout.ORB: (72, 130, 253),
            layout.START: (52, 58, 72),
            layout.EXIT: (162, 82, 252),
        },
        pattern="stripes",
        pattern_delta=16,
    ),
}

THEME_NAMES: tuple[str, ...] = tuple(THEMES)
TRAINING_THEMES: tuple[str, ...] = ("ancient", "industrial", "modern")
HELDOUT_THEMES: tuple[str, ...] = ("moorish", "future")


def theme_index(name: str) -> int:
    return THEME_NAMES.index(name)


def get_theme(name: str) -> ThemeSpec:
    if name not in THEMES:
        raise KeyError(f"unknown theme {name!r}; known: {', '.join(THEME_NAMES)}")
    return THEMES[name]
