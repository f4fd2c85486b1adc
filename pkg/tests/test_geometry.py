import itertools

import numpy as np
import pytest

from src.core.exceptions import GeometryError
from src.geometry.estimators import euclidean_cost, manhattan_cost, warehouse_cost
from src.geometry.layout import Orientation, WarehouseLayout
from src.geometry.oracle import bfs_distances, bfs_oracle
from src.models.domain import GridPoint, validate_scenario
from tests.factories import make_agent, make_task


@pytest.fixture
def transposed_layout():
    """small_layout with the shelves running along the y axis."""
    return WarehouseLayout(width=20, height=30, shelf_length_l=10, shelf_gap_w=2, shelf_gap_h=2,
                           origin=GridPoint(2, 3), orientation=Orientation.Y_AXIS, shelf_depth=2)


def test_metric_examples():
    a, b = GridPoint(0, 0), GridPoint(3, 4)
    assert euclidean_cost(a, b) == 5.0
    assert manhattan_cost(a, b) == 7
    assert euclidean_cost(a, a) == 0.0
    assert manhattan_cost(b, b) == 0


def test_small_layout_lattice(small_layout):
    assert small_layout.n_columns == 2
    assert small_layout.n_rows == 4
    assert small_layout.is_shelf(GridPoint(3, 2))
    assert small_layout.is_shelf(GridPoint(24, 15))
    assert small_layout.is_aisle(GridPoint(13, 2))
    assert small_layout.is_aisle(GridPoint(5, 4))
    assert len(small_layout.shelf_rects()) == 8
    assert int(small_layout.occupancy.sum()) == 8 * 10 * 2


def test_transposed_layout_mirrors_occupancy(small_layout, transposed_layout):
    assert np.array_equal(transposed_layout.occupancy, small_layout.occupancy.T)


def test_pickup_and_delivery_cells(small_layout):
    pickups = small_layout.pickup_cells()
    assert GridPoint(2, 2) in pickups
    assert GridPoint(0, 0) not in pickups
    assert all(small_layout.is_aisle(p) for p in pickups)

    deliveries = small_layout.delivery_cells()
    assert all(p.x < 3 or p.x >= 25 for p in deliveries)
    assert len(deliveries) == (3 + 5) * 20


def test_bfs_on_open_grid():
    layout = WarehouseLayout(width=5, height=5, origin=GridPoint(100, 100))
    assert not layout.has_shelves
    assert bfs_oracle(GridPoint(0, 0), GridPoint(4, 4), layout) == 8
    assert bfs_oracle(GridPoint(2, 2), GridPoint(2, 2), layout) == 0


def test_single_shelf_detour():
    # One 3x1 shelf at y=3, x in 2..4
    layout = WarehouseLayout(width=7, height=7, shelf_length_l=3, shelf_gap_w=10, shelf_gap_h=10,
                             origin=GridPoint(2, 3), shelf_depth=1)
    assert layout.occupancy.sum() == 3
    a, b = GridPoint(4, 2), GridPoint(4, 4)
    assert bfs_oracle(a, b, layout) == manhattan_cost(a, b) + 2
    assert warehouse_cost(a, b, layout) == manhattan_cost(a, b) + 2


def test_same_column_detour(small_layout):
    # Adjacent horizontal gaps, one cell away from the left vertical gap
    a, b = GridPoint(3, 1), GridPoint(3, 4)
    assert warehouse_cost(a, b, small_layout) == 3 + 2
    assert warehouse_cost(a, b, small_layout) == bfs_oracle(a, b, small_layout)


def test_same_band_detour(small_layout):
    a, b = GridPoint(13, 6), GridPoint(26, 7)
    assert warehouse_cost(a, b, small_layout) == bfs_oracle(a, b, small_layout)
    assert warehouse_cost(a, b, small_layout) > manhattan_cost(a, b)


@pytest.mark.parametrize("layout_name", ["small_layout", "transposed_layout"])
def test_warehouse_cost_matches_bfs(layout_name, request):
    layout = request.getfixturevalue(layout_name)
    cells = layout.aisle_cells()
    for a in cells:
        for b in cells:
            assert warehouse_cost(a, b, layout) == bfs_oracle(a, b, layout), f"{a} -> {b}"


def test_warehouse_cost_is_a_metric(small_layout):
    cells = small_layout.aisle_cells()[::17]
    for a, b, c in itertools.product(cells[:12], repeat=3):
        ab = warehouse_cost(a, b, small_layout)
        assert ab == warehouse_cost(b, a, small_layout)
        assert (ab == 0) == (a == b)
        assert warehouse_cost(a, c, small_layout) <= ab + warehouse_cost(b, c, small_layout)


@pytest.mark.parametrize("point", [GridPoint(3, 2), GridPoint(-1, 0), GridPoint(30, 0)])
def test_warehouse_cost_rejects_non_aisle_points(small_layout, point):
    with pytest.raises(GeometryError):
        warehouse_cost(point, GridPoint(0, 0), small_layout)


def test_default_layout_lattice():
    layout = WarehouseLayout(width=80, height=80)
    assert (layout.shelf_length_l, layout.shelf_gap_w, layout.shelf_gap_h, layout.shelf_depth) == (10, 2, 2, 2)
    assert layout.origin == GridPoint(6, 2)
    assert layout.is_regular


def test_irregular_layout_is_reported():
    layout = WarehouseLayout(width=30, height=20, shelf_length_l=10, shelf_gap_w=2, shelf_gap_h=2,
                             origin=GridPoint(0, 2), shelf_depth=2)
    assert not layout.is_regular
    assert any("border aisle" in v for v in layout.regularity_violations())


def test_validate_well_formed_scenario(small_layout):
    agents = [make_agent(0, (0, 0))]
    tasks = [make_task(0, (2, 2), (0, 5))]
    assert validate_scenario(agents, tasks, small_layout) == []


def test_validate_reversed_window(small_layout):
    agents = [make_agent(0, (0, 0))]
    tasks = [make_task(0, (2, 2), (0, 5), time_start=10.0, time_end=5.0)]
    violations = validate_scenario(agents, tasks, small_layout)
    assert len(violations) == 1
    assert "task 0" in violations[0]


def test_validate_pickup_inside_shelf(small_layout):
    agents = [make_agent(0, (0, 0))]
    tasks = [make_task(0, (3, 2), (0, 5))]
    violations = validate_scenario(agents, tasks, small_layout)
    assert len(violations) == 1
    assert "shelf" in violations[0]


def test_validate_sparse_ids(small_layout):
    agents = [make_agent(1, (0, 0))]
    violations = validate_scenario(agents, [], small_layout)
    assert any("agent ids" in v for v in violations)


def random_regular_layout(rng, low, high):
    """Draw layout parameters until the lattice has shelves and a border aisle."""
    while True:
        layout = WarehouseLayout(
            width=int(rng.integers(low, high + 1)), height=int(rng.integers(low, high + 1)),
            shelf_length_l=int(rng.integers(2, 11)), shelf_gap_w=int(rng.integers(1, 4)),
            shelf_gap_h=int(rng.integers(1, 4)), shelf_depth=int(rng.integers(1, 4)),
            origin=GridPoint(int(rng.integers(1, 5)), int(rng.integers(1, 5))),
            orientation=Orientation.X_AXIS if rng.random() < 0.5 else Orientation.Y_AXIS)
        if layout.has_shelves and layout.is_regular:
            return layout


def mean_abs_errors(layout, pairs):
    exact = np.array([bfs_oracle(a, b, layout) for a, b in pairs], dtype=float)
    shelf_aware = np.array([warehouse_cost(a, b, layout) for a, b in pairs], dtype=float)
    straight = np.array([euclidean_cost(a, b) for a, b in pairs], dtype=float)
    return np.abs(shelf_aware - exact).mean(), np.abs(straight - exact).mean()


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_warehouse_cost_exact_on_small_generated_layouts(seed):
    layout = random_regular_layout(np.random.default_rng(seed), 10, 30)
    cells = layout.aisle_cells()
    for a in cells:
        field = bfs_distances(a, layout)
        for b in cells:
            assert warehouse_cost(a, b, layout) == field[b.y, b.x], f"{layout}: {a} -> {b}"


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(10))
def test_warehouse_cost_on_large_generated_layouts(seed):
    rng = np.random.default_rng(100 + seed)
    layout = random_regular_layout(rng, 80, 80)
    cells = layout.aisle_cells()
    sources = [cells[i] for i in rng.choice(len(cells), size=100, replace=False)]
    targets = [cells[i] for i in rng.choice(len(cells), size=100, replace=False)]
    pairs = list(itertools.product(sources, targets))
    matches = sum(warehouse_cost(a, b, layout) == bfs_oracle(a, b, layout) for a, b in pairs)
    assert matches >= 0.99 * len(pairs)
    shelf_aware_mae, straight_mae = mean_abs_errors(layout, pairs)
    assert shelf_aware_mae < straight_mae
