import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from ..core.config import settings
from ..core.settings import GRAPH_STREAM
from ..geometry.estimators import Estimator
from ..models.domain import OrderedTargetQueue, Scenario, Task, validate_queues
from .baselines import AllocatorKind, cbga_allocate, central_allocate, ta_priority_allocate
from .gcbha import gcbha_allocate
from .netsim import CommGraph, make_graph, parse_graph_spec
from .scoring import ScoreParams, ScoringContext, predicted_cost, total_score
from .taskprep import GroupingConfig, decompose

logger = logging.getLogger(__name__)


@dataclass
class AllocationOptions:
    kind: AllocatorKind = AllocatorKind.GCBHA
    request_group: int = settings.DEFAULT_GROUP_REQUEST
    lam: float = settings.DEFAULT_LAMBDA
    estimator: Estimator = Estimator(settings.DEFAULT_ESTIMATOR)
    graph: str = settings.DEFAULT_GRAPH
    seed: int = 0
    literal_formula: bool = False

    def __post_init__(self):
        self.kind = AllocatorKind(self.kind)
        self.estimator = Estimator(self.estimator)
        parse_graph_spec(self.graph)

    def score_params(self) -> ScoreParams:
        return ScoreParams(lam=self.lam, estimator=self.estimator, literal_formula=self.literal_formula)

    def as_dict(self) -> Dict:
        return {
            "allocator": self.kind.value,
            "request_group": self.request_group,
            "lambda": self.lam,
            "estimator": self.estimator.value,
            "graph": self.graph,
            "seed": self.seed,
            "literal_formula": self.literal_formula,
        }


@dataclass
class AllocationResult:
    kind: AllocatorKind
    tasks: List[Task]
    queues: List[OrderedTargetQueue]
    predicted_costs: List[float]
    total_score: float
    rounds: int = 0
    messages: int = 0
    n_items: int = 0
    unassigned: List[int] = field(default_factory=list)
    conflicts: List[int] = field(default_factory=list)
    allocation_time_s: float = 0.0

    @property
    def predicted_length(self) -> float:
        return float(sum(self.predicted_costs))


def graph_for(options: AllocationOptions, n_agents: int) -> CommGraph:
    kind, p = parse_graph_spec(options.graph)
    seed = int(np.random.SeedSequence([options.seed, GRAPH_STREAM]).generate_state(1)[0])
    return make_graph(kind, n_agents, seed=seed, p=p)


class AllocationService:
    def __init__(self, options: AllocationOptions):
        self.options = options

    def allocate(self, scenario: Scenario, graph: Optional[CommGraph] = None) -> AllocationResult:
        """Process, allocate and score the scenario's tasks with the configured allocator."""
        options = self.options
        agents = list(scenario.agents)
        start_time = time.perf_counter()
        try:
            ctx = ScoringContext(options.score_params(), scenario.layout)
            tasks = decompose(scenario.tasks, agents)
            rounds = messages = 0
            n_items = len(tasks)
            conflicts: List[int] = []

            if options.kind.is_consensus:
                graph = graph or graph_for(options, len(agents))
                if options.kind == AllocatorKind.GCBHA:
                    outcome = gcbha_allocate(agents, tasks, graph, ctx, GroupingConfig(options.request_group))
                else:
                    outcome = cbga_allocate(agents, tasks, graph, ctx)
                queues = outcome.queues
                rounds, messages, n_items, conflicts = outcome.rounds, outcome.messages, outcome.n_items, outcome.conflicts
            elif options.kind == AllocatorKind.CENTRAL:
                queues = central_allocate(agents, tasks, ctx)
            else:
                queues = ta_priority_allocate(agents, tasks, ctx)
            elapsed = time.perf_counter() - start_time

            violations = validate_queues(queues, tasks, agents)
            if violations and not conflicts:
                logger.warning(f"Allocator {options.kind.value} produced invalid queues: {violations}")

            assigned = {task_id for q in queues for task_id in q.task_ids()}
            result = AllocationResult(
                kind=options.kind,
                tasks=tasks,
                queues=queues,
                predicted_costs=[predicted_cost(a, q, ctx) for a, q in zip(agents, queues)],
                total_score=total_score(queues, agents, tasks, ctx),
                rounds=rounds,
                messages=messages,
                n_items=n_items,
                unassigned=sorted(t.id for t in tasks if t.id not in assigned),
                conflicts=conflicts,
                allocation_time_s=elapsed,
            )
            logger.info(
                f"{options.kind.value} assigned {len(tasks) - len(result.unassigned)}/{len(tasks)} tasks "
                f"in {elapsed:.3f}s, score {result.total_score:.3f}")
            return result
        except Exception as e:
            logger.error(f"Error allocating with {options.kind.value}: {str(e)}")
            raise
