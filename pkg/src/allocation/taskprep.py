"""Task processing ahead of the auction: decomposition of oversized tasks and
clustering of small same-type tasks into capped groups."""
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from ..core.exceptions import ConfigError, ScenarioError
from ..geometry.layout import WarehouseLayout
from ..models.domain import Agent, GridPoint, Task, TaskGroup

logger = logging.getLogger(__name__)

CostFn = Callable[[GridPoint, GridPoint], float]


@dataclass(frozen=True)
class GroupingConfig:
    request_group: int

    def __post_init__(self):
        if self.request_group <= 0:
            raise ConfigError(f"request_group must be positive, got {self.request_group}")

    def enables_grouping(self, tasks: Sequence[Task]) -> bool:
        return bool(tasks) and self.request_group >= 2 * min(t.request for t in tasks)


def decompose(tasks: Sequence[Task], agents: Sequence[Agent]) -> List[Task]:
    """Split tasks no single agent can carry into pieces of the smallest capacity.

    The original id keeps the first piece; further pieces get ids appended
    after the current task list. The last piece carries the remainder and
    value is split in proportion to demand.
    """
    if not agents:
        raise ScenarioError("Cannot decompose tasks without agents")
    min_capacity = min(a.capacity for a in agents)
    max_capacity = max(a.capacity for a in agents)
    if min_capacity <= 0:
        raise ScenarioError(f"Minimum agent capacity must be positive, got {min_capacity}")

    result = list(tasks)
    for index, task in enumerate(tasks):
        if task.request <= max_capacity:
            continue
        pieces = math.ceil(task.request / min_capacity)
        remainder = task.request - (pieces - 1) * min_capacity
        share = task.value / task.request
        result[index] = replace(task, request=min_capacity, value=share * min_capacity)
        for piece in range(1, pieces):
            request = remainder if piece == pieces - 1 else min_capacity
            result.append(replace(task, id=len(result), request=request, value=share * request))
        logger.info(f"Decomposed task {task.id} (request {task.request}) into {pieces} subtasks")
    return result


def single_task_cycle(tasks: Sequence[Task], cost: CostFn) -> float:
    """Cost of serving every task on its own: the sum of pickup-to-delivery legs."""
    return sum(cost(t.position_start, t.position_end) for t in tasks)


def all_tasks_cycle(tasks: Sequence[Task], cost: CostFn) -> float:
    """Greedy nearest-neighbour tour over the group's pickups and deliveries.

    Starts at the first task's pickup; a delivery becomes eligible once its
    pickup has been visited. Ties go to the lower task id, pickups first.
    """
    if not tasks:
        return 0.0
    position = tasks[0].position_start
    picked = {tasks[0].id}
    pending = [(t.id, 0, t.position_start) for t in tasks[1:]] + \
              [(t.id, 1, t.position_end) for t in tasks]
    total = 0.0
    while pending:
        eligible = [p for p in pending if p[1] == 0 or p[0] in picked]
        nxt = min(eligible, key=lambda p: (cost(position, p[2]), p[0], p[1]))
        total += cost(position, nxt[2])
        position = nxt[2]
        if nxt[1] == 0:
            picked.add(nxt[0])
        pending.remove(nxt)
    return total


def _centroid(points: Sequence[GridPoint], layout: WarehouseLayout) -> GridPoint:
    x = sum(p.x for p in points) / len(points)
    y = sum(p.y for p in points) / len(points)
    return layout.snap_to_aisle(GridPoint(int(math.floor(x + 0.5)), int(math.floor(y + 0.5))))


def nearest_task(group: Sequence[Task], candidates: Sequence[Task], remaining_cap: int,
                 layout: WarehouseLayout, cost: CostFn) -> Optional[Task]:
    """Closest same-type candidate that fits, measured from the group's pickup centroid."""
    anchor = _centroid([t.position_start for t in group], layout)
    cargo = group[0].cargo_type
    fitting = [t for t in candidates if t.cargo_type == cargo and t.request <= remaining_cap]
    if not fitting:
        return None
    return min(fitting, key=lambda t: (cost(anchor, t.position_start), t.id))


def nearest_group(unassigned_tasks: Sequence[Task], remaining_cap: int, layout: WarehouseLayout,
                  cost: CostFn) -> Tuple[List[Task], List[Task]]:
    """Pick the seed-grown group that minimises grouped plus ungrouped tour cost.

    Each seed greedily accretes its nearest fitting task; every intermediate
    group is scored as ``all_tasks_cycle(group) + single_task_cycle(rest)``
    and a group replaces the best only when strictly cheaper, so ties keep the
    earlier seed. Without any improvement
    the lowest-id task forms a singleton.
    """
    if not unassigned_tasks:
        raise ValueError("nearest_group needs at least one task")
    ordered = sorted(unassigned_tasks, key=lambda t: t.id)
    legs = {t.id: cost(t.position_start, t.position_end) for t in ordered}
    all_single = sum(legs.values())
    cost_min = all_single
    best_group = [ordered[0]]
    best_rest = ordered[1:]

    for seed in ordered:
        group = [seed]
        rest = [t for t in ordered if t.id != seed.id]
        request_total = seed.request
        while request_total < remaining_cap:
            candidate = nearest_task(group, rest, remaining_cap - request_total, layout, cost)
            if candidate is None:
                break
            request_total += candidate.request
            group.append(candidate)
            rest.remove(candidate)
            # single_task_cycle(rest), kept incremental
            rest_single = all_single - sum(legs[t.id] for t in group)
            grouped_cost = all_tasks_cycle(group, cost) + rest_single
            if grouped_cost < cost_min:
                cost_min = grouped_cost
                best_group = list(group)
                best_rest = list(rest)
    return best_group, best_rest


def _meta_task(group_id: int, members: Sequence[Task], layout: WarehouseLayout) -> Task:
    if len(members) == 1:
        return replace(members[0], id=group_id)
    return Task(
        id=group_id,
        position_start=_centroid([t.position_start for t in members], layout),
        position_end=_centroid([t.position_end for t in members], layout),
        time_start=min(t.time_start for t in members),
        time_end=min(t.time_end for t in members),
        request=sum(t.request for t in members),
        cargo_type=members[0].cargo_type,
        value=sum(t.value for t in members),
    )


def _to_groups(partition: List[List[Task]], layout: WarehouseLayout) -> Tuple[List[Task], Dict[int, List[Task]]]:
    # Group ids follow the smallest member id so singleton groups keep their task ids.
    partition = sorted((sorted(members, key=lambda t: t.id) for members in partition),
                       key=lambda members: members[0].id)
    meta_tasks = []
    group_list: Dict[int, List[Task]] = {}
    for group_id, members in enumerate(partition):
        meta_tasks.append(_meta_task(group_id, members, layout))
        group_list[group_id] = members
    return meta_tasks, group_list


def singleton_groups(tasks: Sequence[Task], layout: WarehouseLayout) -> Tuple[List[Task], Dict[int, List[Task]]]:
    """One auction item per task."""
    return _to_groups([[t] for t in tasks], layout)


def group(tasks: Sequence[Task], config: GroupingConfig, layout: WarehouseLayout,
          cost: CostFn) -> Tuple[List[Task], Dict[int, List[Task]]]:
    """Partition ``tasks`` into capped single-type groups and build one meta-task per group."""
    try:
        oversized = [t for t in tasks if t.request > config.request_group]
        for task in oversized:
            logger.warning(f"Task {task.id} request {task.request} exceeds request_group "
                           f"{config.request_group}, auctioned on its own")
        if tasks and not config.enables_grouping(tasks):
            logger.warning(f"request_group {config.request_group} is below twice the smallest "
                           f"task request, every task forms its own group")

        partition: List[List[Task]] = [[t] for t in oversized]
        remaining = [t for t in tasks if t.request <= config.request_group]
        while remaining:
            members, remaining = nearest_group(remaining, config.request_group, layout, cost)
            partition.append(members)

        meta_tasks, group_list = _to_groups(partition, layout)
        logger.info(f"Grouped {len(tasks)} tasks into {len(meta_tasks)} auction items")
        return meta_tasks, group_list
    except Exception as e:
        logger.error(f"Error grouping tasks: {str(e)}")
        raise


def to_task_groups(meta_tasks: Sequence[Task], group_list: Dict[int, List[Task]]) -> List[TaskGroup]:
    return [TaskGroup(m.id, tuple(t.id for t in group_list[m.id]), m) for m in meta_tasks]
