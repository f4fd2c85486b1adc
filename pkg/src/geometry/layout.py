"""Warehouse grid model.

Shelves are congruent rectangles on a regular lattice. Geometry is computed
in a shelf frame ``(u, v)`` where ``u`` runs along the shelves' long axis;
for ``Orientation.Y_AXIS`` the frame is the transposed grid.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property, lru_cache
from typing import List, Optional, Tuple

import numpy as np

from ..core.settings import (ORIGIN_X, ORIGIN_Y, SHELF_DEPTH, SHELF_GAP_H,
                             SHELF_GAP_W, SHELF_LENGTH)
from ..models.domain import GridPoint


class Orientation(str, Enum):
    X_AXIS = "x"
    Y_AXIS = "y"


@dataclass(frozen=True)
class WarehouseLayout:
    width: int
    height: int
    shelf_length_l: int = SHELF_LENGTH
    shelf_gap_w: int = SHELF_GAP_W
    shelf_gap_h: int = SHELF_GAP_H
    origin: GridPoint = GridPoint(ORIGIN_X, ORIGIN_Y)
    orientation: Orientation = Orientation.X_AXIS
    shelf_depth: int = SHELF_DEPTH

    # Frame helpers

    def to_frame(self, p: GridPoint) -> Tuple[int, int]:
        if self.orientation == Orientation.Y_AXIS:
            return p.y, p.x
        return p.x, p.y

    def from_frame(self, u: int, v: int) -> GridPoint:
        if self.orientation == Orientation.Y_AXIS:
            return GridPoint(v, u)
        return GridPoint(u, v)

    @property
    def frame_size(self) -> Tuple[int, int]:
        if self.orientation == Orientation.Y_AXIS:
            return self.height, self.width
        return self.width, self.height

    @property
    def frame_origin(self) -> Tuple[int, int]:
        return self.to_frame(self.origin)

    @property
    def column_period(self) -> int:
        return self.shelf_length_l + self.shelf_gap_w

    @property
    def row_period(self) -> int:
        return self.shelf_depth + self.shelf_gap_h

    @cached_property
    def n_columns(self) -> int:
        size_u, _ = self.frame_size
        ou, _ = self.frame_origin
        if self.shelf_length_l <= 0 or self.column_period <= 0:
            return 0
        return max(0, (size_u - 2 * ou + self.shelf_gap_w) // self.column_period)

    @cached_property
    def n_rows(self) -> int:
        _, size_v = self.frame_size
        _, ov = self.frame_origin
        if self.shelf_depth <= 0 or self.row_period <= 0:
            return 0
        return max(0, (size_v - 2 * ov + self.shelf_gap_h) // self.row_period)

    @property
    def has_shelves(self) -> bool:
        return self.n_columns > 0 and self.n_rows > 0

    def column_start(self, c: int) -> int:
        return self.frame_origin[0] + c * self.column_period

    def row_start(self, r: int) -> int:
        return self.frame_origin[1] + r * self.row_period

    @property
    def block_end_u(self) -> int:
        """First ``u`` after the last shelf column."""
        return self.column_start(self.n_columns - 1) + self.shelf_length_l

    def column_at(self, u: int) -> Optional[int]:
        """Index of the shelf column whose strip contains ``u``."""
        if not self.has_shelves:
            return None
        rel = u - self.frame_origin[0]
        if rel < 0:
            return None
        c, offset = divmod(rel, self.column_period)
        if c >= self.n_columns or offset >= self.shelf_length_l:
            return None
        return c

    def row_band_at(self, v: int) -> Optional[int]:
        """Index of the shelf row whose band contains ``v``."""
        if not self.has_shelves:
            return None
        rel = v - self.frame_origin[1]
        if rel < 0:
            return None
        r, offset = divmod(rel, self.row_period)
        if r >= self.n_rows or offset >= self.shelf_depth:
            return None
        return r

    def gap_index_u(self, u: int) -> int:
        """Number of shelf columns starting at or before ``u``."""
        rel = u - self.frame_origin[0]
        if not self.has_shelves or rel < 0:
            return 0
        return min(self.n_columns, rel // self.column_period + 1)

    def gap_index_v(self, v: int) -> int:
        rel = v - self.frame_origin[1]
        if not self.has_shelves or rel < 0:
            return 0
        return min(self.n_rows, rel // self.row_period + 1)

    # Cell queries

    def in_bounds(self, p: GridPoint) -> bool:
        return 0 <= p.x < self.width and 0 <= p.y < self.height

    def is_shelf(self, p: GridPoint) -> bool:
        if not self.in_bounds(p):
            return False
        u, v = self.to_frame(p)
        return self.column_at(u) is not None and self.row_band_at(v) is not None

    def is_aisle(self, p: GridPoint) -> bool:
        return self.in_bounds(p) and not self.is_shelf(p)

    @cached_property
    def occupancy(self) -> np.ndarray:
        """Boolean grid indexed ``[y, x]``; True marks a shelf cell."""
        grid = np.zeros((self.height, self.width), dtype=bool)
        for x0, y0, x1, y1 in self.shelf_rects():
            grid[y0:y1, x0:x1] = True
        grid.setflags(write=False)
        return grid

    def shelf_rects(self) -> List[Tuple[int, int, int, int]]:
        """Shelf rectangles as half-open ``(x0, y0, x1, y1)`` grid boxes."""
        rects = []
        for c in range(self.n_columns if self.has_shelves else 0):
            u0 = self.column_start(c)
            for r in range(self.n_rows):
                v0 = self.row_start(r)
                a = self.from_frame(u0, v0)
                b = self.from_frame(u0 + self.shelf_length_l, v0 + self.shelf_depth)
                rects.append((a.x, a.y, b.x, b.y))
        return rects

    def aisle_cells(self) -> List[GridPoint]:
        ys, xs = np.nonzero(~self.occupancy)
        return sorted(GridPoint(int(x), int(y)) for x, y in zip(xs, ys))

    def pickup_cells(self) -> List[GridPoint]:
        """Aisle cells 4-adjacent to a shelf."""
        occ = self.occupancy
        padded = np.pad(occ, 1, constant_values=False)
        near = padded[:-2, 1:-1] | padded[2:, 1:-1] | padded[1:-1, :-2] | padded[1:-1, 2:]
        ys, xs = np.nonzero(near & ~occ)
        return sorted(GridPoint(int(x), int(y)) for x, y in zip(xs, ys))

    def delivery_cells(self) -> List[GridPoint]:
        """Aisle cells in the side regions before and after the shelf block."""
        size_u, size_v = self.frame_size
        if self.has_shelves:
            ou = self.frame_origin[0]
            side_u = list(range(0, ou)) + list(range(self.block_end_u, size_u))
        else:
            side_u = sorted({0, size_u - 1})
        return sorted(self.from_frame(u, v) for u in side_u for v in range(size_v))

    def snap_to_aisle(self, p: GridPoint) -> GridPoint:
        return _snap_to_aisle(self, p)

    # Regularity

    def regularity_violations(self) -> List[str]:
        problems = []
        if self.width <= 0 or self.height <= 0:
            problems.append(f"layout size must be positive, got {self.width}x{self.height}")
            return problems
        if not self.has_shelves:
            return problems
        named = {
            "shelf_length_l": self.shelf_length_l,
            "shelf_gap_w": self.shelf_gap_w,
            "shelf_gap_h": self.shelf_gap_h,
            "shelf_depth": self.shelf_depth,
        }
        for name, value in named.items():
            if value < 1:
                problems.append(f"layout {name} must be at least 1, got {value}")
        ou, ov = self.frame_origin
        if ou < 1 or ov < 1:
            problems.append(f"layout origin ({self.origin.x},{self.origin.y}) must leave a border aisle")
        return problems

    @cached_property
    def is_regular(self) -> bool:
        return not self.regularity_violations()


@lru_cache(maxsize=65536)
def _snap_to_aisle(layout: WarehouseLayout, p: GridPoint) -> GridPoint:
    """Nearest aisle cell by grid distance, ties broken by lowest (x, y)."""
    p = GridPoint(min(max(p.x, 0), layout.width - 1), min(max(p.y, 0), layout.height - 1))
    if layout.is_aisle(p):
        return p
    for radius in range(1, layout.width + layout.height):
        ring = []
        for dx in range(-radius, radius + 1):
            dy = radius - abs(dx)
            for sy in {dy, -dy}:
                q = GridPoint(p.x + dx, p.y + sy)
                if layout.is_aisle(q):
                    ring.append(q)
        if ring:
            return min(ring)
    return p
