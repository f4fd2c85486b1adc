"""Comparison allocators sharing the scoring and geometry stack."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from ..models.domain import Agent, GridPoint, OrderedTargetQueue, Target, Task
from .gcbha import ConsensusAllocation, consensus_allocate
from .netsim import CommGraph
from .scoring import ScoringContext
from .taskprep import singleton_groups

logger = logging.getLogger(__name__)


class AllocatorKind(str, Enum):
    GCBHA = "gcbha"
    CBGA = "cbga"
    CENTRAL = "central"
    TA_PRIORITY = "ta-priority"

    @property
    def is_consensus(self) -> bool:
        return self in (AllocatorKind.GCBHA, AllocatorKind.CBGA)

    @property
    def report_label(self) -> str:
        if self == AllocatorKind.TA_PRIORITY:
            return "TA-priority (reconstructed)"
        return self.name


@dataclass
class _Route:
    """Sequential route of one agent as tasks are appended to its tail."""
    agent: Agent
    position: GridPoint
    time: float = 0.0
    load: int = 0
    tasks: List[Task] = field(default_factory=list)

    def fits(self, task: Task) -> bool:
        return task.cargo_type == self.agent.cargo_type and self.load + task.request <= self.agent.capacity

    def append(self, task: Task, completion: float):
        self.tasks.append(task)
        self.position = task.position_end
        self.time = completion
        self.load += task.request

    def queue(self) -> OrderedTargetQueue:
        targets = []
        for task in self.tasks:
            targets += [Target.pickup(task), Target.delivery(task)]
        return OrderedTargetQueue(self.agent.id, tuple(targets))


def _completion(route: _Route, task: Task, ctx: ScoringContext) -> Optional[float]:
    velocity = route.agent.velocity
    arrival = max(route.time + ctx.cost(route.position, task.position_start) / velocity, task.time_start)
    completion = arrival + ctx.cost(task.position_start, task.position_end) / velocity
    return completion if completion <= task.time_end else None


def cbga_allocate(agents: Sequence[Agent], tasks: Sequence[Task], graph: CommGraph,
                  ctx: ScoringContext) -> ConsensusAllocation:
    """Consensus auction with every task as its own item."""
    meta_tasks, group_list = singleton_groups(tasks, ctx.layout)
    return consensus_allocate(agents, meta_tasks, group_list, graph, ctx)


def central_allocate(agents: Sequence[Agent], tasks: Sequence[Task], ctx: ScoringContext) -> List[OrderedTargetQueue]:
    """Repeatedly give the globally nearest feasible (agent, task) pair to that agent.

    Distance runs from the agent's queue tail to the task pickup; ties go to
    the lower agent id, then the lower task id.
    """
    routes = [_Route(a, a.position) for a in agents]
    unassigned: Dict[int, Task] = {t.id: t for t in tasks}
    while unassigned:
        best: Optional[Tuple[float, int, int, float]] = None
        for route in routes:
            for task in unassigned.values():
                if not route.fits(task):
                    continue
                completion = _completion(route, task, ctx)
                if completion is None:
                    continue
                key = (ctx.cost(route.position, task.position_start), route.agent.id, task.id, completion)
                if best is None or key[:3] < best[:3]:
                    best = key
        if best is None:
            break
        _, agent_id, task_id, completion = best
        routes[agent_id].append(unassigned.pop(task_id), completion)
    logger.info(f"Central allocation left {len(unassigned)} tasks unassigned")
    return [route.queue() for route in routes]


def ta_priority_allocate(agents: Sequence[Agent], tasks: Sequence[Task], ctx: ScoringContext) -> List[OrderedTargetQueue]:
    """Round-robin in ascending agent id; each agent claims its nearest fitting task, windows ignored."""
    routes = [_Route(a, a.position) for a in sorted(agents, key=lambda a: a.id)]
    unassigned: Dict[int, Task] = {t.id: t for t in tasks}
    claimed = True
    while unassigned and claimed:
        claimed = False
        for route in routes:
            fitting = [t for t in unassigned.values() if route.fits(t)]
            if not fitting:
                continue
            task = min(fitting, key=lambda t: (ctx.cost(route.position, t.position_start), t.id))
            route.append(unassigned.pop(task.id), route.time)
            claimed = True
    return [route.queue() for route in sorted(routes, key=lambda r: r.agent.id)]
