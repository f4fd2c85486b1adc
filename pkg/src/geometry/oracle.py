"""Breadth-first ground truth for aisle distances."""
import math
from collections import deque
from functools import lru_cache

import numpy as np

from ..models.domain import GridPoint
from .estimators import _check_aisle
from .layout import WarehouseLayout

UNREACHABLE = math.inf

_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


@lru_cache(maxsize=2048)
def bfs_distances(source: GridPoint, layout: WarehouseLayout) -> np.ndarray:
    """4-connected distance field from ``source``, indexed ``[y, x]``; -1 if unreachable."""
    _check_aisle(source, layout)
    blocked = layout.occupancy
    dist = np.full((layout.height, layout.width), -1, dtype=np.int32)
    dist[source.y, source.x] = 0
    queue = deque([(source.x, source.y)])
    while queue:
        x, y = queue.popleft()
        d = dist[y, x] + 1
        for dx, dy in _MOVES:
            nx, ny = x + dx, y + dy
            if 0 <= nx < layout.width and 0 <= ny < layout.height \
                    and not blocked[ny, nx] and dist[ny, nx] < 0:
                dist[ny, nx] = d
                queue.append((nx, ny))
    dist.setflags(write=False)
    return dist


def bfs_oracle(a: GridPoint, b: GridPoint, layout: WarehouseLayout) -> float:
    _check_aisle(b, layout)
    d = bfs_distances(a, layout)[b.y, b.x]
    return UNREACHABLE if d < 0 else int(d)
