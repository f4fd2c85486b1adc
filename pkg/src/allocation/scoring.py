"""Time-discounted task rewards.

An agent serving a task earns ``value * exp(-lam * arrival) * ln(lam * slack + 1)``
where ``arrival`` is the (possibly waited-for) pickup time and ``slack`` the
margin left before the delivery deadline. Target sequences produced by
unpacking are ranked with the simpler per-target discount
``value * exp(-lam * reach_time)``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from ..core.exceptions import ConfigError
from ..core.settings import LAMBDA
from ..geometry.estimators import Estimator, make_cost_fn
from ..geometry.layout import WarehouseLayout
from ..models.domain import Agent, GridPoint, OrderedTargetQueue, Target, TargetKind, Task

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScoreParams:
    lam: float = LAMBDA
    estimator: Estimator = Estimator.WAREHOUSE
    literal_formula: bool = False

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise ConfigError(f"lambda must lie in (0, 1], got {self.lam}")
        object.__setattr__(self, "estimator", Estimator(self.estimator))


@dataclass(frozen=True)
class Insertion:
    index: int
    marginal: float
    scores: Tuple[float, ...]


@dataclass(frozen=True)
class BundleEvaluation:
    scores: Tuple[float, ...]
    total: float
    end_position: GridPoint
    end_time: float


class ScoringContext:
    """Score parameters plus memoized path costs for one layout."""

    def __init__(self, params: ScoreParams, layout: WarehouseLayout):
        self.params = params
        self.layout = layout
        self._cost_fn = make_cost_fn(params.estimator, layout)
        self._costs: Dict[Tuple[GridPoint, GridPoint], float] = {}
        self._insertions: Dict[Tuple[int, int, Tuple[int, ...]], Optional[Insertion]] = {}

    @property
    def lam(self) -> float:
        return self.params.lam

    def cost(self, a: GridPoint, b: GridPoint) -> float:
        key = (a, b) if a <= b else (b, a)
        cost = self._costs.get(key)
        if cost is None:
            cost = self._cost_fn(a, b)
            self._costs[key] = cost
        return cost


def _discounted(value: float, lam: float, arrival: float, slack: float) -> float:
    return value * math.exp(-lam * arrival) * math.log(lam * slack + 1)


def _serve(agent: Agent, task: Task, prev_position: GridPoint, prev_time: float,
           ctx: ScoringContext) -> Optional[Tuple[float, float]]:
    """Score and completion time of serving ``task`` after the given queue end."""
    approach = ctx.cost(prev_position, task.position_start) / agent.velocity
    carry = ctx.cost(task.position_start, task.position_end) / agent.velocity
    arrival = max(prev_time + approach, task.time_start)
    completion = arrival + carry
    slack = task.time_end - completion
    if slack < 0:
        return None
    if ctx.params.literal_formula:
        exponent = (ctx.cost(prev_position, task.position_start) + prev_time - task.time_start) / agent.velocity
        literal_slack = task.time_end - carry - approach - prev_time
        score = task.value * math.exp(-ctx.lam * exponent) * math.log(ctx.lam * literal_slack + 1)
    else:
        score = _discounted(task.value, ctx.lam, arrival, slack)
    return score, completion


def insertion_score(agent: Agent, task: Task, queue_prefix_end: Tuple[GridPoint, float],
                    ctx: ScoringContext) -> Optional[float]:
    """Score of appending ``task`` after a queue ending at ``(position, time)``; None if late."""
    served = _serve(agent, task, queue_prefix_end[0], queue_prefix_end[1], ctx)
    return None if served is None else served[0]


def evaluate_bundle(agent: Agent, tasks: Sequence[Task], ctx: ScoringContext) -> Optional[BundleEvaluation]:
    position, time = agent.position, 0.0
    scores = []
    for task in tasks:
        served = _serve(agent, task, position, time, ctx)
        if served is None:
            return None
        score, time = served
        scores.append(score)
        position = task.position_end
    return BundleEvaluation(tuple(scores), sum(scores), position, time)


def best_insertion(agent: Agent, task: Task, bundle: Sequence[Task],
                   ctx: ScoringContext) -> Optional[Insertion]:
    """Best index for ``task`` in ``bundle`` and the marginal score it adds.

    Every index is tried with downstream entries rescored; ties go to the
    smallest index. Returns None when no index keeps the whole bundle on time.
    """
    key = (agent.id, task.id, tuple(t.id for t in bundle))
    if key in ctx._insertions:
        return ctx._insertions[key]

    result = None
    before = evaluate_bundle(agent, bundle, ctx)
    if before is not None:
        best = None
        for index in range(len(bundle) + 1):
            candidate = list(bundle[:index]) + [task] + list(bundle[index:])
            after = evaluate_bundle(agent, candidate, ctx)
            if after is not None and (best is None or after.total > best[1].total):
                best = (index, after)
        if best is not None:
            result = Insertion(best[0], best[1].total - before.total, best[1].scores)
    ctx._insertions[key] = result
    return result


def position_score(agent: Agent, from_position: GridPoint, target_position: GridPoint,
                   value: float, order_time: float, ctx: ScoringContext) -> float:
    """Discounted reward for reaching ``target_position`` after ``order_time``."""
    travel = ctx.cost(from_position, target_position) / agent.velocity
    return value * math.exp(-ctx.lam * (travel + order_time))


def evaluate_targets(agent: Agent, targets: Sequence[Target], values: Mapping[int, float],
                     ctx: ScoringContext) -> float:
    """Summed position scores of visiting ``targets`` in order.

    Reaching a pickup before its task opens means waiting until ``time_start``.
    """
    position, time = agent.position, 0.0
    total = 0.0
    for target in targets:
        total += position_score(agent, position, target.position, values[target.task_id], time, ctx)
        time += ctx.cost(position, target.position) / agent.velocity
        if target.kind == TargetKind.PICKUP:
            time = max(time, target.time_start)
        position = target.position
    return total


def queue_score(agent: Agent, queue: OrderedTargetQueue, tasks: Mapping[int, Task],
                ctx: ScoringContext) -> float:
    """Objective contribution of executing ``queue``; tasks delivered late score zero."""
    position, time = agent.position, 0.0
    arrivals: Dict[int, float] = {}
    total = 0.0
    for target in queue.targets:
        time += ctx.cost(position, target.position) / agent.velocity
        position = target.position
        task = tasks[target.task_id]
        if target.kind == TargetKind.PICKUP:
            time = max(time, task.time_start)
            arrivals[task.id] = time
            continue
        slack = task.time_end - time
        if task.id in arrivals and slack >= 0:
            total += _discounted(task.value, ctx.lam, arrivals[task.id], slack)
    return total


def total_score(queues: Sequence[OrderedTargetQueue], agents: Sequence[Agent],
                tasks: Sequence[Task], ctx: ScoringContext) -> float:
    agents_by_id = {a.id: a for a in agents}
    tasks_by_id = {t.id: t for t in tasks}
    return sum(queue_score(agents_by_id[q.agent_id], q, tasks_by_id, ctx) for q in queues)


def predicted_cost(agent: Agent, queue: OrderedTargetQueue, ctx: ScoringContext) -> float:
    """Estimator length of the legs from the agent's start through its queue."""
    position, length = agent.position, 0.0
    for target in queue.targets:
        length += ctx.cost(position, target.position)
        position = target.position
    return length
