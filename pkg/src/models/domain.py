"""Domain types shared by the allocation, planning and benchmark layers."""
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..core.settings import NONE

if TYPE_CHECKING:
    from ..geometry.layout import WarehouseLayout


@dataclass(frozen=True, order=True)
class GridPoint:
    x: int
    y: int

    def as_tuple(self) -> Tuple[int, int]:
        return (self.x, self.y)


class CargoType(str, Enum):
    GENERAL = "general"
    SPECIAL = "special"


class TargetKind(str, Enum):
    PICKUP = "pickup"
    DELIVERY = "delivery"


@dataclass(frozen=True)
class Task:
    id: int
    position_start: GridPoint
    position_end: GridPoint
    time_start: float
    time_end: float
    request: int
    cargo_type: CargoType = CargoType.GENERAL
    value: float = 0.0


@dataclass(frozen=True)
class Agent:
    id: int
    position: GridPoint
    capacity: int
    cargo_type: CargoType = CargoType.GENERAL
    velocity: float = 1.0


@dataclass(frozen=True)
class TaskGroup:
    group_id: int
    member_ids: Tuple[int, ...]
    meta_task: Task


@dataclass(frozen=True)
class Target:
    position: GridPoint
    kind: TargetKind
    task_id: int
    time_start: float
    time_end: float

    @classmethod
    def pickup(cls, task: Task) -> "Target":
        return cls(task.position_start, TargetKind.PICKUP, task.id, task.time_start, task.time_end)

    @classmethod
    def delivery(cls, task: Task) -> "Target":
        return cls(task.position_end, TargetKind.DELIVERY, task.id, task.time_start, task.time_end)


@dataclass(frozen=True)
class OrderedTargetQueue:
    agent_id: int
    targets: Tuple[Target, ...] = ()

    def task_ids(self) -> List[int]:
        """Task ids in order of first appearance."""
        seen: List[int] = []
        for target in self.targets:
            if target.task_id not in seen:
                seen.append(target.task_id)
        return seen

    def __len__(self) -> int:
        return len(self.targets)


@dataclass
class BidState:
    """Local auction state of one agent.

    ``bundle`` is kept in execution order and ``scores`` holds the per-entry
    insertion score of each bundle member under that order.
    """
    agent_id: int
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    t: np.ndarray
    bundle: List[int] = field(default_factory=list)
    bundle_request: int = 0
    scores: List[float] = field(default_factory=list)

    @classmethod
    def initial(cls, agent_id: int, n_agents: int, n_tasks: int) -> "BidState":
        return cls(
            agent_id=agent_id,
            x=np.zeros(n_tasks, dtype=np.int8),
            y=np.zeros(n_tasks, dtype=np.float64),
            z=np.full(n_tasks, NONE, dtype=np.int64),
            t=np.zeros(n_agents, dtype=np.int64),
        )

    def copy(self) -> "BidState":
        return BidState(
            agent_id=self.agent_id,
            x=self.x.copy(),
            y=self.y.copy(),
            z=self.z.copy(),
            t=self.t.copy(),
            bundle=list(self.bundle),
            bundle_request=self.bundle_request,
            scores=list(self.scores),
        )


@dataclass(frozen=True)
class Scenario:
    layout: "WarehouseLayout"
    agents: Tuple[Agent, ...]
    tasks: Tuple[Task, ...]
    seed: Optional[int] = None


def _position_violations(label: str, point: GridPoint, layout: "WarehouseLayout") -> List[str]:
    if not layout.in_bounds(point):
        return [f"{label}: position ({point.x},{point.y}) is outside the {layout.width}x{layout.height} grid"]
    if layout.is_shelf(point):
        return [f"{label}: position ({point.x},{point.y}) is a shelf cell"]
    return []


def _dense_id_violations(kind: str, ids: Sequence[int]) -> List[str]:
    if sorted(ids) != list(range(len(ids))):
        return [f"{kind} ids must be exactly 0..{len(ids) - 1}, got {sorted(ids)}"]
    return []


def validate_scenario(agents: Sequence[Agent], tasks: Sequence[Task],
                      layout: "WarehouseLayout") -> List[str]:
    """Return one message per violated agent, task or layout invariant."""
    violations: List[str] = list(layout.regularity_violations())
    violations += _dense_id_violations("agent", [a.id for a in agents])
    violations += _dense_id_violations("task", [t.id for t in tasks])

    for agent in agents:
        label = f"agent {agent.id}"
        if agent.capacity <= 0:
            violations.append(f"{label}: capacity must be positive, got {agent.capacity}")
        if agent.velocity <= 0:
            violations.append(f"{label}: velocity must be positive, got {agent.velocity}")
        violations += _position_violations(label, agent.position, layout)

    for task in tasks:
        label = f"task {task.id}"
        if task.time_start < 0 or task.time_end < 0:
            violations.append(f"{label}: time window must be non-negative")
        if task.time_start >= task.time_end:
            violations.append(
                f"{label}: time_start {task.time_start} must precede time_end {task.time_end}")
        if task.position_start == task.position_end:
            violations.append(f"{label}: pickup and delivery positions coincide")
        if task.request <= 0:
            violations.append(f"{label}: request must be positive, got {task.request}")
        if task.value < 0:
            violations.append(f"{label}: value must be non-negative, got {task.value}")
        violations += _position_violations(f"{label} pickup", task.position_start, layout)
        violations += _position_violations(f"{label} delivery", task.position_end, layout)
    return violations


def validate_queues(queues: Iterable[OrderedTargetQueue], tasks: Sequence[Task],
                    agents: Sequence[Agent]) -> List[str]:
    """Check precedence, single assignment, capacity and cargo type of queues."""
    violations: List[str] = []
    tasks_by_id: Dict[int, Task] = {t.id: t for t in tasks}
    agents_by_id: Dict[int, Agent] = {a.id: a for a in agents}
    owner: Dict[int, int] = {}

    for queue in queues:
        agent = agents_by_id.get(queue.agent_id)
        if agent is None:
            violations.append(f"queue references unknown agent {queue.agent_id}")
            continue
        picked: Dict[int, int] = {}
        delivered: Dict[int, int] = {}
        for index, target in enumerate(queue.targets):
            task = tasks_by_id.get(target.task_id)
            if task is None:
                violations.append(f"agent {agent.id}: unknown task {target.task_id}")
                continue
            seen = picked if target.kind == TargetKind.PICKUP else delivered
            if target.task_id in seen:
                violations.append(
                    f"agent {agent.id}: task {task.id} has more than one {target.kind.value}")
            seen[target.task_id] = index
            expected = task.position_start if target.kind == TargetKind.PICKUP else task.position_end
            if target.position != expected:
                violations.append(
                    f"agent {agent.id}: task {task.id} {target.kind.value} position does not match the task")

        load = 0
        for task_id in sorted(set(picked) | set(delivered)):
            task = tasks_by_id[task_id]
            if task_id not in picked or task_id not in delivered:
                violations.append(f"agent {agent.id}: task {task_id} needs one pickup and one delivery")
            elif delivered[task_id] < picked[task_id]:
                violations.append(f"agent {agent.id}: task {task_id} is delivered before pickup")
            if task.cargo_type != agent.cargo_type:
                violations.append(
                    f"agent {agent.id}: task {task_id} cargo {task.cargo_type.value} "
                    f"does not match agent cargo {agent.cargo_type.value}")
            if task_id in owner:
                violations.append(f"task {task_id} is assigned to agents {owner[task_id]} and {agent.id}")
            owner[task_id] = agent.id
            load += task.request
        if load > agent.capacity:
            violations.append(f"agent {agent.id}: demand {load} exceeds capacity {agent.capacity}")
    return violations
