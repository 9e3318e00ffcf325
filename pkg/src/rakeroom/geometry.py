"""Rectangular rooms, image-source enumeration and image-source tracking.

Rooms are axis-aligned rectangles ``[0, W] x [0, H]`` described by four
walls.  Walls are always stored in the order

    0: x = 0   (normal (-1, 0))
    1: x = W   (normal (+1, 0))
    2: y = 0   (normal (0, -1))
    3: y = H   (normal (0, +1))

so that a wall index doubles as a stable name in reflection sequences.
"""

from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SourceOutsideRoom, TranslationLeavesRoom

DEDUP_TOL = 1e-9

WALL_NAMES = ("west", "east", "south", "north")


@dataclass(frozen=True, eq=False)
class Wall:
    anchor_point: np.ndarray
    outward_normal: np.ndarray
    reflectivity: float = 1.0

    def __post_init__(self):
        p = np.asarray(self.anchor_point, dtype=float).reshape(2)
        n = np.asarray(self.outward_normal, dtype=float).reshape(2)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ConfigError(f"wall normal {n} is not unit length")
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ConfigError(f"reflectivity {self.reflectivity} not in [0, 1]")
        object.__setattr__(self, "anchor_point", p)
        object.__setattr__(self, "outward_normal", n)


@dataclass(frozen=True, eq=False)
class Room:
    """Axis-aligned rectangular room.

    Use :meth:`Room.shoebox` to build one; the constructor only validates.
    """

    walls: tuple[Wall, ...]
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ConfigError("room dimensions must be positive")
        if len(self.walls) != 4:
            raise ConfigError("a rectangular room has exactly 4 walls")
        expected = [(-1, 0), (1, 0), (0, -1), (0, 1)]
        for wall, n in zip(self.walls, expected):
            if not np.array_equal(wall.outward_normal, np.array(n, dtype=float)):
                raise ConfigError("walls must be ordered west, east, south, north")
        object.__setattr__(self, "walls", tuple(self.walls))

    @classmethod
    def shoebox(cls, width: float, height: float, reflectivity=0.9) -> Room:
        """Build a ``width x height`` room.

        ``reflectivity`` is either one scalar shared by all walls or four
        values in wall order (west, east, south, north).
        """
        r = np.broadcast_to(np.asarray(reflectivity, dtype=float), (4,))
        walls = (
            Wall((0.0, 0.0), (-1.0, 0.0), float(r[0])),
            Wall((width, 0.0), (1.0, 0.0), float(r[1])),
            Wall((0.0, 0.0), (0.0, -1.0), float(r[2])),
            Wall((0.0, height), (0.0, 1.0), float(r[3])),
        )
        return cls(walls, float(width), float(height))

    @property
    def reflectivities(self) -> np.ndarray:
        return np.array([w.reflectivity for w in self.walls])

    def contains(self, p, margin: float = 0.0) -> bool:
        """True if ``p`` lies strictly inside the room shrunk by ``margin``."""
        x, y = np.asarray(p, dtype=float)
        return bool(
            margin < x < self.width - margin and margin < y < self.height - margin
        )


@dataclass(frozen=True, eq=False)
class ImageSource:
    """A true source (generation 0) or one of its mirror images.

    ``mirror_counts`` holds how many times the x and y coordinates were
    mirrored; ``walls`` is the reflection sequence (wall indices) that
    produced the image.
    """

    position: np.ndarray
    generation: int = 0
    attenuation: float = 1.0
    mirror_counts: tuple[int, int] = (0, 0)
    walls: tuple[int, ...] = ()

    @property
    def parity(self) -> tuple[bool, bool]:
        return (self.mirror_counts[0] % 2 == 1, self.mirror_counts[1] % 2 == 1)

    @property
    def motion_signs(self) -> np.ndarray:
        """Diagonal of the matrix mapping a source translation to this image's."""
        px, py = self.parity
        return np.array([-1.0 if px else 1.0, -1.0 if py else 1.0])

    def moved(self, translation) -> ImageSource:
        return ImageSource(
            self.position + self.motion_signs * np.asarray(translation, dtype=float),
            self.generation,
            self.attenuation,
            self.mirror_counts,
            self.walls,
        )


def _sort_key(img: ImageSource):
    return (img.generation, round(float(img.position[0]), 9), round(float(img.position[1]), 9))


@dataclass(frozen=True, eq=False)
class ImageSourceSet:
    """The true source of a room together with its deduplicated images."""

    room: Room
    source: ImageSource
    images: tuple[ImageSource, ...] = field(default_factory=tuple)
    max_order: int = 0

    @property
    def entries(self) -> list[ImageSource]:
        """True source first, then images in sorted order."""
        return [self.source, *self.images]

    def __len__(self) -> int:
        return 1 + len(self.images)

    def __iter__(self) -> Iterator[ImageSource]:
        return iter(self.entries)

    def __getitem__(self, k: int) -> ImageSource:
        return self.entries[k]

    @property
    def positions(self) -> np.ndarray:
        """``(len(self), 2)`` array of positions, in entry order."""
        return np.array([e.position for e in self.entries])

    @property
    def attenuations(self) -> np.ndarray:
        return np.array([e.attenuation for e in self.entries])

    @property
    def generations(self) -> np.ndarray:
        return np.array([e.generation for e in self.entries])

    def first(self, n: int) -> ImageSourceSet:
        """Subset with the true source and the first ``n - 1`` images."""
        return ImageSourceSet(self.room, self.source, self.images[: max(n - 1, 0)], self.max_order)


def reflect_point(p, wall: Wall) -> np.ndarray:
    """Mirror ``p`` across the line through ``wall``."""
    p = np.asarray(p, dtype=float)
    n = wall.outward_normal
    return p + 2.0 * np.dot(wall.anchor_point - p, n) * n


class _PositionIndex:
    """Grid hash for spotting positions that coincide within ``tol``."""

    def __init__(self, tol: float = DEDUP_TOL):
        self.tol = tol
        self._cells: dict[tuple[int, int], list[np.ndarray]] = {}

    def _cell(self, p):
        return int(np.floor(p[0] / self.tol)), int(np.floor(p[1] / self.tol))

    def contains(self, p) -> bool:
        cx, cy = self._cell(p)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for q in self._cells.get((cx + dx, cy + dy), ()):
                    if np.max(np.abs(q - p)) <= self.tol:
                        return True
        return False

    def add(self, p) -> bool:
        """Insert ``p``; returns False if an equal position was already present."""
        if self.contains(p):
            return False
        self._cells.setdefault(self._cell(p), []).append(np.asarray(p, dtype=float))
        return True


def enumerate_images(room: Room, source_position, max_order: int) -> ImageSourceSet:
    """All distinct images of ``source_position`` up to ``max_order`` reflections.

    Breadth-first over reflection sequences, skipping an immediate
    reflection back across the wall just used.  When several sequences land
    on the same point the shortest one (first found) is kept.
    """
    s = np.asarray(source_position, dtype=float).reshape(2)
    if not room.contains(s):
        raise SourceOutsideRoom(f"source {tuple(s)} is not strictly inside the room")
    if max_order < 0:
        raise ConfigError("max_order must be non-negative")

    source = ImageSource(s, 0, 1.0, (0, 0), ())
    index = _PositionIndex()
    index.add(s)
    images: list[ImageSource] = []
    frontier = [source]
    for gen in range(1, max_order + 1):
        nxt = []
        for parent in frontier:
            last = parent.walls[-1] if parent.walls else None
            for i, wall in enumerate(room.walls):
                if i == last:
                    continue
                p = reflect_point(parent.position, wall)
                if not index.add(p):
                    continue
                mx, my = parent.mirror_counts
                counts = (mx + 1, my) if i < 2 else (mx, my + 1)
                child = ImageSource(
                    p, gen, parent.attenuation * wall.reflectivity, counts, parent.walls + (i,)
                )
                nxt.append(child)
        images.extend(nxt)
        frontier = nxt
    images.sort(key=_sort_key)
    return ImageSourceSet(room, source, tuple(images), max_order)


def track_images(image_set: ImageSourceSet, translation) -> ImageSourceSet:
    """Move every image consistently with a translation of the true source.

    Relies only on the stored mirror parities, never on the room walls, so
    it also works when the geometry is known only through the images.
    """
    t = np.asarray(translation, dtype=float).reshape(2)
    if not image_set.room.contains(image_set.source.position + t):
        raise TranslationLeavesRoom(f"translation {tuple(t)} moves the source outside the room")
    images = sorted((img.moved(t) for img in image_set.images), key=_sort_key)
    return ImageSourceSet(image_set.room, image_set.source.moved(t), tuple(images), image_set.max_order)


def images_for_count(room: Room, source_position, count: int) -> ImageSourceSet:
    """Smallest enumeration holding at least ``count`` entries, trimmed to ``count``."""
    if count < 1:
        raise ConfigError("need at least the true source")
    order = 0
    while 2 * order * order + 2 * order + 1 < count:
        order += 1
    return enumerate_images(room, source_position, order).first(count)

