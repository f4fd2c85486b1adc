"""Lifelong prioritized planning of target queues.

Agents start parked on their initial cells at timestep 0. An agent replans
only when it reaches a target; all previously committed paths stay in the
reservation table as constraints.
"""
import heapq
import logging
import math
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Deque, Dict, List, Optional, Sequence, Tuple

from ..core.exceptions import PlanningError
from ..core.settings import MAX_EXPANSIONS, PLAN_RETRY_CAP
from ..geometry.layout import WarehouseLayout
from ..models.domain import Agent, GridPoint, OrderedTargetQueue, Target, TargetKind
from .reservation import ReservationTable
from .search import Step, find_path, unit_moves

logger = logging.getLogger(__name__)


@dataclass
class TimedPath:
    agent_id: int
    steps: List[Step] = field(default_factory=list)

    @property
    def end_time(self) -> int:
        return self.steps[-1][0]

    @property
    def end_position(self) -> GridPoint:
        return self.steps[-1][1]

    @property
    def length(self) -> int:
        return unit_moves(self.steps)

    def position_at(self, t: int) -> GridPoint:
        """Cell held at the end of timestep ``t``; the final cell after the path ends."""
        position = self.steps[0][1]
        for step_time, cell in self.steps:
            if step_time > t:
                break
            position = cell
        return position


@dataclass(frozen=True)
class Visit:
    agent_id: int
    task_id: int
    kind: TargetKind
    timestep: int


@dataclass(frozen=True)
class Leg:
    agent_id: int
    task_id: int
    kind: TargetKind
    start: GridPoint
    goal: GridPoint
    depart: int
    arrive: int
    length: int


@dataclass(frozen=True)
class PlanFailure:
    agent_id: int
    task_id: int
    kind: TargetKind
    timestep: int
    reason: str


@dataclass
class PlanResult:
    paths: List[TimedPath]
    actual_lengths: List[int]
    legs: List[Leg]
    visits: List[Visit]
    makespan: int
    replans: int
    retries: int
    failures: List[PlanFailure] = field(default_factory=list)
    late_deliveries: List[int] = field(default_factory=list)
    planning_time_s: float = 0.0

    @property
    def total_length(self) -> int:
        return int(sum(self.actual_lengths))

    @property
    def n_targets(self) -> int:
        return len(self.visits) + len(self.failures)


class LifelongPlanner:
    """Event-driven planner: each agent plans its next leg when it reaches a target.

    Agents due at the same timestep plan in priority order, descending
    velocity then ascending id.
    """

    def __init__(self, agents: Sequence[Agent], queues: Sequence[OrderedTargetQueue], layout: WarehouseLayout,
                 enforce_windows: bool = True, return_home: bool = True, horizon: Optional[int] = None,
                 max_expansions: int = MAX_EXPANSIONS, retry_cap: int = PLAN_RETRY_CAP):
        self.agents: Dict[int, Agent] = {a.id: a for a in agents}
        self.layout = layout
        self.enforce_windows = enforce_windows
        self.return_home = return_home
        self.horizon = horizon
        self.max_expansions = max_expansions
        self.retry_cap = retry_cap

        self.table = ReservationTable()
        self.paths: Dict[int, TimedPath] = {}
        self.pending: Dict[int, Deque[Target]] = {a.id: deque() for a in agents}
        for queue in queues:
            if queue.agent_id not in self.agents:
                raise PlanningError(f"Queue references unknown agent {queue.agent_id}")
            self.pending[queue.agent_id].extend(queue.targets)
        self._deadlines = {t.task_id: t.time_end for q in queues for t in q.targets}
        self.rank = {a.id: r for r, a in enumerate(sorted(agents, key=lambda a: (-a.velocity, a.id)))}

        for agent in agents:
            self.paths[agent.id] = TimedPath(agent.id, [(0, agent.position)])
            self.table.reserve(0, agent.position, agent.id)
            self.table.park(agent.id, agent.position, 0)

        self.legs: List[Leg] = []
        self.visits: List[Visit] = []
        self.failures: List[PlanFailure] = []
        self.replans = 0
        self.retries = 0
        self._attempts: Dict[int, int] = {a.id: 0 for a in agents}
        self._homed: Dict[int, bool] = {a.id: False for a in agents}
        self._events: List[Tuple[int, int, int]] = []

    def remaining_steps(self, agent_id: int, now: int) -> int:
        """Timesteps until the agent reaches the end of its committed path."""
        return max(0, self.paths[agent_id].end_time - now)

    def _earliest_visit(self, target: Target) -> int:
        if self.enforce_windows and target.kind == TargetKind.PICKUP:
            return int(math.ceil(target.time_start))
        return 0

    def _wait_until(self, agent_id: int, until: int):
        path = self.paths[agent_id]
        cell = path.end_position
        for t in range(path.end_time + 1, until + 1):
            path.steps.append((t, cell))
            self.table.reserve(t, cell, agent_id)

    def _next_goal(self, agent_id: int) -> Optional[Tuple[GridPoint, Optional[Target]]]:
        if self.pending[agent_id]:
            target = self.pending[agent_id][0]
            return target.position, target
        if self.return_home and not self._homed[agent_id]:
            return self.agents[agent_id].position, None
        return None

    def lifelong_step(self, agent_id: int, now: int) -> Optional[int]:
        """Plan the agent's next leg starting ``τ`` steps after ``now``.

        ``τ`` is the time the agent still needs to reach its current target.
        ``run`` fires events at arrival, so there ``τ`` is always 0; a nonzero
        delay only occurs when a caller replans an agent that is still moving.
        Returns the timestep at which the new target counts as visited, or
        None if no path was found.
        """
        nxt = self._next_goal(agent_id)
        if nxt is None:
            return None
        goal, target = nxt
        agent = self.agents[agent_id]
        start_time = now + self.remaining_steps(agent_id, now)
        self._wait_until(agent_id, start_time)
        path = self.paths[agent_id]
        start = path.end_position

        self.table.unpark(agent_id, start)
        try:
            steps = find_path(agent_id, agent.velocity, start, start_time, goal, self.layout, self.table,
                              horizon=self.horizon, max_expansions=self.max_expansions)
        except PlanningError:
            self.table.park(agent_id, start, start_time)
            raise
        if steps is None:
            self.table.park(agent_id, start, start_time)
            return None

        path.steps.extend(steps[1:])
        self.table.reserve_path(agent_id, steps)
        arrive = steps[-1][0]
        self.table.park(agent_id, goal, arrive)

        if target is None:
            self._homed[agent_id] = True
            return arrive
        self.pending[agent_id].popleft()
        self.replans += 1
        visit_time = max(arrive, self._earliest_visit(target))
        self.legs.append(Leg(agent_id, target.task_id, target.kind, start, goal, start_time, arrive,
                             unit_moves(steps)))
        self.visits.append(Visit(agent_id, target.task_id, target.kind, visit_time))
        return visit_time

    def _drop(self, agent_id: int, target: Target):
        """Abandon a target; a lost pickup also drops the matching delivery."""
        queue = self.pending[agent_id]
        queue.popleft()
        if target.kind == TargetKind.PICKUP:
            self.pending[agent_id] = deque(
                t for t in queue if not (t.task_id == target.task_id and t.kind == TargetKind.DELIVERY))

    def _schedule(self, t: int, agent_id: int):
        heapq.heappush(self._events, (t, self.rank[agent_id], agent_id))

    def _fail(self, agent_id: int, now: int, reason: str):
        nxt = self._next_goal(agent_id)
        if nxt is None:
            return
        _, target = nxt
        self._attempts[agent_id] = 0
        if target is None:
            self._homed[agent_id] = True
            logger.warning(f"Agent {agent_id} could not return to its start cell: {reason}")
            return
        self.failures.append(PlanFailure(agent_id, target.task_id, target.kind, now, reason))
        logger.warning(f"Agent {agent_id} gave up {target.kind.value} of task {target.task_id}: {reason}")
        self._drop(agent_id, target)
        self._schedule(now + 1, agent_id)

    def run(self) -> PlanResult:
        start_clock = time.perf_counter()
        for agent_id in self.agents:
            self._schedule(0, agent_id)

        while self._events:
            now, _, agent_id = heapq.heappop(self._events)
            if self._next_goal(agent_id) is None:
                continue
            try:
                visit_time = self.lifelong_step(agent_id, now)
            except PlanningError as e:
                self._fail(agent_id, now, str(e))
                continue
            if visit_time is not None:
                self._attempts[agent_id] = 0
                self._schedule(visit_time, agent_id)
                continue

            self._attempts[agent_id] += 1
            if self._attempts[agent_id] > self.retry_cap:
                self._fail(agent_id, now, f"no path after {self.retry_cap} retries")
                continue
            self.retries += 1
            retry_at = max(now + 1, self._events[0][0]) if self._events else now + 1
            self._schedule(retry_at, agent_id)

        return self._result(time.perf_counter() - start_clock)

    def _result(self, elapsed: float) -> PlanResult:
        ids = sorted(self.agents)
        lengths = {agent_id: 0 for agent_id in ids}
        for leg in self.legs:
            lengths[leg.agent_id] += leg.length
        late = sorted(v.task_id for v in self.visits
                      if v.kind == TargetKind.DELIVERY and v.timestep > math.floor(self._deadlines[v.task_id]))
        visits = sorted(self.visits, key=lambda v: (v.timestep, v.agent_id, v.task_id, v.kind.value))
        return PlanResult(
            paths=[self.paths[agent_id] for agent_id in ids],
            actual_lengths=[lengths[agent_id] for agent_id in ids],
            legs=list(self.legs),
            visits=visits,
            makespan=max((v.timestep for v in self.visits), default=0),
            replans=self.replans,
            retries=self.retries,
            failures=list(self.failures),
            late_deliveries=late,
            planning_time_s=elapsed,
        )


def plan_all(agents: Sequence[Agent], queues: Sequence[OrderedTargetQueue], layout: WarehouseLayout,
             enforce_windows: bool = True, return_home: bool = True, horizon: Optional[int] = None,
             max_expansions: int = MAX_EXPANSIONS) -> PlanResult:
    """Run a full lifelong episode over every agent's queue."""
    try:
        planner = LifelongPlanner(agents, queues, layout, enforce_windows=enforce_windows,
                                  return_home=return_home, horizon=horizon, max_expansions=max_expansions)
        result = planner.run()
        logger.info(
            f"Planned {len(result.visits)} target visits for {len(agents)} agents: length {result.total_length}, "
            f"makespan {result.makespan}, {result.replans} replans, {len(result.failures)} failures")
        return result
    except Exception as e:
        logger.error(f"Error planning paths: {str(e)}")
        raise
