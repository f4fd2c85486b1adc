"""Path-cost estimators: the warehouse-aware distance and the generic metrics."""
import logging
import math
from enum import Enum
from typing import Callable

from ..core.exceptions import ConfigError, GeometryError
from ..models.domain import GridPoint
from .layout import WarehouseLayout

logger = logging.getLogger(__name__)

CostFn = Callable[[GridPoint, GridPoint], float]


class Estimator(str, Enum):
    WAREHOUSE = "warehouse"
    EUCLIDEAN = "euclidean"
    MANHATTAN = "manhattan"


def manhattan_cost(a: GridPoint, b: GridPoint) -> int:
    return abs(a.x - b.x) + abs(a.y - b.y)


def euclidean_cost(a: GridPoint, b: GridPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def _check_aisle(p: GridPoint, layout: WarehouseLayout):
    if not layout.in_bounds(p):
        raise GeometryError(f"Point ({p.x},{p.y}) is outside the {layout.width}x{layout.height} grid")
    if layout.is_shelf(p):
        raise GeometryError(f"Point ({p.x},{p.y}) lies inside a shelf")


def warehouse_cost(a: GridPoint, b: GridPoint, layout: WarehouseLayout) -> int:
    """Shortest aisle distance on a regular shelf lattice.

    Manhattan distance holds unless a shelf separates the two points along a
    strip they share. Two points in the same shelf column strip with a shelf
    row between them detour through the nearer bounding vertical gap; two
    points at the same shelf row's height with a shelf column between them
    detour through the nearer bounding horizontal gap.
    """
    _check_aisle(a, layout)
    _check_aisle(b, layout)
    if a == b:
        return 0
    if not layout.is_regular or not layout.has_shelves:
        return manhattan_cost(a, b)

    ua, va = layout.to_frame(a)
    ub, vb = layout.to_frame(b)
    du, dv = abs(ua - ub), abs(va - vb)

    column = layout.column_at(ua)
    if column is not None and column == layout.column_at(ub) \
            and layout.gap_index_v(va) != layout.gap_index_v(vb):
        left = layout.column_start(column) - 1
        right = layout.column_start(column) + layout.shelf_length_l
        return dv + min((ua - left) + (ub - left), (right - ua) + (right - ub))

    band = layout.row_band_at(va)
    if band is not None and band == layout.row_band_at(vb) \
            and layout.gap_index_u(ua) != layout.gap_index_u(ub):
        top = layout.row_start(band) - 1
        bottom = layout.row_start(band) + layout.shelf_depth
        return du + min((va - top) + (vb - top), (bottom - va) + (bottom - vb))

    return du + dv


def make_cost_fn(estimator: Estimator, layout: WarehouseLayout) -> CostFn:
    estimator = Estimator(estimator)
    if estimator == Estimator.MANHATTAN:
        return manhattan_cost
    if estimator == Estimator.EUCLIDEAN:
        return euclidean_cost
    if estimator == Estimator.WAREHOUSE:
        if not layout.is_regular:
            logger.warning(
                f"Layout is not a regular shelf lattice ({'; '.join(layout.regularity_violations())}), "
                f"warehouse estimator falls back to manhattan distance")
        return lambda a, b: warehouse_cost(a, b, layout)
    raise ConfigError(f"Unknown estimator {estimator}")
