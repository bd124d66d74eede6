"""Costmap data model, coordinate transforms and raster primitives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from proxsim import _kernels

FREE = 0
INSCRIBED = 253
LETHAL = 254
MAX_PENALTY = 252

# absorbs float noise when a coordinate sits exactly on a cell edge
_EDGE_EPS = 1e-9


class OutOfBounds(ValueError):
    """A point or cell index lies outside the map rectangle."""


def normalize_angle(theta: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.remainder(theta, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


class CellIndex(NamedTuple):
    col: int
    row: int


def round_cost(value):
    """Round half up to an integer cost; works on scalars and arrays."""
    return np.floor(np.asarray(value, dtype=float) + 0.5).astype(np.int64)


@dataclass
class Costmap:
    """Uniform grid of uint8 costs.

    ``cells`` is stored row-major with shape (height, width); row 0 is the
    bottom edge of the map (smallest y) and ``origin`` is the world position of
    the lower-left corner of cell (0, 0).
    """

    width: int
    height: int
    resolution: float
    origin: tuple[float, float] = (0.0, 0.0)
    cells: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"map dimensions must be positive, got {self.width}x{self.height}")
        if not self.resolution > 0:
            raise ValueError(f"resolution must be positive, got {self.resolution}")
        self.origin = (float(self.origin[0]), float(self.origin[1]))
        if self.cells is None:
            self.cells = np.zeros((self.height, self.width), dtype=np.uint8)
        else:
            cells = np.asarray(self.cells)
            if cells.size != self.width * self.height:
                raise ValueError(
                    f"cells has {cells.size} entries, expected {self.width * self.height}"
                )
            if cells.dtype != np.uint8:
                if cells.min(initial=0) < 0 or cells.max(initial=0) > LETHAL:
                    raise ValueError("cell costs must lie in 0..254")
                cells = cells.astype(np.uint8)
            self.cells = cells.reshape(self.height, self.width)
        if self.cells.max(initial=0) > LETHAL:
            raise ValueError("cell costs must lie in 0..254")

    @classmethod
    def like(cls, other: Costmap) -> Costmap:
        return cls(other.width, other.height, other.resolution, other.origin)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    def copy(self) -> Costmap:
        return Costmap(self.width, self.height, self.resolution, self.origin, self.cells.copy())

    def contains(self, c: CellIndex) -> bool:
        return 0 <= c.col < self.width and 0 <= c.row < self.height

    def cost_at(self, p) -> int:
        c = world_to_cell(self, p)
        return int(self.cells[c.row, c.col])

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """World x and y of every cell center, each shaped like ``cells``."""
        xs = self.origin[0] + (np.arange(self.width) + 0.5) * self.resolution
        ys = self.origin[1] + (np.arange(self.height) + 0.5) * self.resolution
        return np.meshgrid(xs, ys)


def world_to_cell(costmap: Costmap, p) -> CellIndex:
    x, y = float(p[0]), float(p[1])
    col = math.floor((x - costmap.origin[0]) / costmap.resolution + _EDGE_EPS)
    row = math.floor((y - costmap.origin[1]) / costmap.resolution + _EDGE_EPS)
    cell = CellIndex(col, row)
    if not costmap.contains(cell):
        raise OutOfBounds(f"point ({x:.3f}, {y:.3f}) is outside the map")
    return cell


def cell_to_world_center(costmap: Costmap, c) -> tuple[float, float]:
    c = CellIndex(*c)
    if not costmap.contains(c):
        raise OutOfBounds(f"cell {tuple(c)} is outside the {costmap.width}x{costmap.height} map")
    return (
        costmap.origin[0] + (c.col + 0.5) * costmap.resolution,
        costmap.origin[1] + (c.row + 0.5) * costmap.resolution,
    )


def max_combine(dst: int, v: int) -> int:
    return max(dst, v)


def raycast_cells(costmap: Costmap, start, end) -> list[CellIndex]:
    """Cells visited by the line from ``start`` to ``end`` (both inclusive).

    Consecutive cells are edge- or corner-adjacent. The same cell set comes back
    when the endpoints are swapped.
    """
    a = world_to_cell(costmap, start)
    b = world_to_cell(costmap, end)
    line = _kernels.bresenham(a.row, a.col, b.row, b.col)
    return [CellIndex(int(c), int(r)) for r, c in line]


def write_pgm(costmap: Costmap, path) -> Path:
    """Binary PGM (P5), one byte per cell, top image row = highest map row."""
    path = Path(path)
    header = f"P5\n{costmap.width} {costmap.height}\n255\n".encode("ascii")
    path.write_bytes(header + np.ascontiguousarray(costmap.cells[::-1]).tobytes())
    return path


def snapshot_path(prefix, tick: int) -> Path:
    prefix = Path(prefix)
    return prefix.with_name(f"{prefix.name}_{tick}.pgm")


def read_pgm(path) -> np.ndarray:
    """Read an 8-bit P5 or P2 image; returns rows top-to-bottom as uint8."""
    data = Path(path).read_bytes()
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    magic, width, height, maxval = tokens[0], int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError(f"{path}: only 8-bit PGM is supported")
    if magic == b"P5":
        raster = np.frombuffer(data[pos + 1 : pos + 1 + width * height], dtype=np.uint8)
    elif magic == b"P2":
        raster = np.array(data[pos:].split()[: width * height], dtype=np.uint8)
    else:
        raise ValueError(f"{path}: not a PGM file")
    if raster.size != width * height:
        raise ValueError(f"{path}: truncated raster")
    return raster.reshape(height, width).copy()
