"""Time-expanded A* for a single leg against a reservation table."""
import heapq
import itertools
import logging
import math
from typing import Dict, List, Optional, Tuple

from ..core.exceptions import PlanningError
from ..core.settings import HORIZON_FACTOR, MAX_EXPANSIONS
from ..geometry.layout import WarehouseLayout
from ..geometry.oracle import bfs_distances
from ..models.domain import GridPoint
from .reservation import ReservationTable

logger = logging.getLogger(__name__)

Step = Tuple[int, GridPoint]

_MOVES = ((1, 0), (-1, 0), (0, 1), (0, -1))


def steps_per_timestep(velocity: float) -> int:
    return max(1, int(math.floor(velocity)))


def default_horizon(layout: WarehouseLayout) -> int:
    return HORIZON_FACTOR * (layout.width + layout.height)


def _macro_moves(cell: GridPoint, t: int, speed: int, agent_id: int, layout: WarehouseLayout,
                 table: ReservationTable) -> Dict[GridPoint, List[GridPoint]]:
    """Self-avoiding walks of up to ``speed`` unit moves ending at ``t + 1``.

    Every cell of a walk is stamped ``t + 1``. Returns the first walk found
    for each end cell; the empty walk stands for waiting.
    """
    arrival = t + 1
    walks: Dict[GridPoint, List[GridPoint]] = {}
    if table.is_free(arrival, cell, agent_id):
        walks[cell] = []
    frontier: List[List[GridPoint]] = [[]]
    for _ in range(speed):
        extended: List[List[GridPoint]] = []
        for walk in frontier:
            here = walk[-1] if walk else cell
            for dx, dy in _MOVES:
                nxt = GridPoint(here.x + dx, here.y + dy)
                if nxt == cell or nxt in walk or not layout.is_aisle(nxt):
                    continue
                if not table.is_free(arrival, nxt, agent_id) or not table.edge_free(arrival, here, nxt, agent_id):
                    continue
                new_walk = walk + [nxt]
                extended.append(new_walk)
                walks.setdefault(nxt, new_walk)
        frontier = extended
    return walks


def find_path(agent_id: int, velocity: float, start: GridPoint, start_time: int, goal: GridPoint,
              layout: WarehouseLayout, table: ReservationTable, horizon: Optional[int] = None,
              max_expansions: int = MAX_EXPANSIONS) -> Optional[List[Step]]:
    """Earliest conflict-free timed path from ``(start, start_time)`` to a parkable ``goal``.

    The result lists one ``(timestep, cell)`` entry per unit move or wait,
    beginning with the start entry. Returns None when no path exists within
    the horizon or the expansion budget. Raises PlanningError when the goal
    is unreachable on the static map.
    """
    distances = bfs_distances(goal, layout)
    if distances[start.y, start.x] < 0:
        raise PlanningError(f"Agent {agent_id}: ({goal.x},{goal.y}) is unreachable from ({start.x},{start.y})")
    speed = steps_per_timestep(velocity)
    horizon = default_horizon(layout) if horizon is None else horizon
    deadline = start_time + horizon
    settle = table.latest_time + 1

    def heuristic(cell: GridPoint) -> int:
        return -(-int(distances[cell.y, cell.x]) // speed)

    counter = itertools.count()
    h0 = heuristic(start)
    open_heap = [(start_time + h0, h0, start_time, start.x, start.y, next(counter))]
    parents: Dict[Tuple[GridPoint, int], Tuple[Optional[Tuple[GridPoint, int]], List[GridPoint]]] = {
        (start, start_time): (None, [])}
    closed = set()
    expansions = 0

    while open_heap:
        _, _, t, x, y, _ = heapq.heappop(open_heap)
        cell = GridPoint(x, y)
        key = (cell, min(t, settle))
        if key in closed:
            continue
        closed.add(key)

        if cell == goal and table.can_park(goal, t, agent_id):
            return _reconstruct(parents, (cell, t), start_time)

        expansions += 1
        if expansions > max_expansions:
            logger.warning(f"Agent {agent_id}: search stopped after {max_expansions} expansions")
            return None
        if t >= deadline:
            continue

        for end, walk in _macro_moves(cell, t, speed, agent_id, layout, table).items():
            node = (end, t + 1)
            if (end, min(t + 1, settle)) in closed or node in parents:
                continue
            parents[node] = ((cell, t), walk)
            h = heuristic(end)
            heapq.heappush(open_heap, (t + 1 + h, h, t + 1, end.x, end.y, next(counter)))
    return None


def _reconstruct(parents, node, start_time: int) -> List[Step]:
    reversed_steps: List[Step] = []
    while True:
        parent, walk = parents[node]
        cell, t = node
        if parent is None:
            break
        if walk:
            reversed_steps.extend((t, c) for c in reversed(walk))
        else:
            reversed_steps.append((t, cell))
        node = parent
    reversed_steps.append((start_time, node[0]))
    return list(reversed(reversed_steps))


def unit_moves(steps: List[Step]) -> int:
    return sum(1 for (_, a), (_, b) in zip(steps, steps[1:]) if a != b)
