from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional

from ..allocation.service import AllocationResult
from ..geometry.layout import WarehouseLayout
from ..geometry.oracle import bfs_oracle
from ..models.domain import Scenario
from ..planning.lifelong import PlanResult

# Wall-clock metrics; kept out of byte-reproducible reports.
TIMING_FIELDS = ("allocation_time_s", "planning_time_s")


@dataclass
class RunMetrics:
    label: str
    allocator: str
    n_tasks: int
    n_agents: int
    repetition: int
    seed: int
    n_items: int
    rounds: int
    messages: int
    total_score: float
    predicted_length: float
    unassigned: int
    actual_length: Optional[float] = None
    lower_bound_length: Optional[float] = None
    prediction_gap: Optional[float] = None
    abs_prediction_gap: Optional[float] = None
    makespan: Optional[int] = None
    replans: Optional[int] = None
    retries: Optional[int] = None
    plan_failures: Optional[int] = None
    late_deliveries: Optional[int] = None
    allocation_time_s: float = 0.0
    planning_time_s: Optional[float] = None

    @classmethod
    def numeric_fields(cls) -> List[str]:
        skip = {"label", "allocator", "n_tasks", "n_agents", "repetition", "seed"}
        return [f.name for f in fields(cls) if f.name not in skip]

    def as_dict(self, include_timings: bool = True) -> Dict:
        data = asdict(self)
        if not include_timings:
            for name in TIMING_FIELDS:
                data.pop(name)
        return data


def leg_lower_bound(plan: PlanResult, layout: WarehouseLayout) -> float:
    """Sum of shortest static distances of every executed leg."""
    return float(sum(bfs_oracle(leg.start, leg.goal, layout) for leg in plan.legs))


def compute_metrics(label: str, scenario: Scenario, allocation: AllocationResult, plan: Optional[PlanResult],
                    repetition: int = 0, seed: int = 0) -> RunMetrics:
    """Collect one run's metrics; path metrics stay empty when nothing was planned."""
    metrics = RunMetrics(
        label=label,
        allocator=allocation.kind.value,
        n_tasks=len(scenario.tasks),
        n_agents=len(scenario.agents),
        repetition=repetition,
        seed=seed,
        n_items=allocation.n_items,
        rounds=allocation.rounds,
        messages=allocation.messages,
        total_score=allocation.total_score,
        predicted_length=allocation.predicted_length,
        unassigned=len(allocation.unassigned),
        allocation_time_s=allocation.allocation_time_s,
    )
    if plan is not None:
        metrics.actual_length = float(plan.total_length)
        metrics.lower_bound_length = leg_lower_bound(plan, scenario.layout)
        metrics.prediction_gap = metrics.actual_length - metrics.predicted_length
        metrics.abs_prediction_gap = abs(metrics.prediction_gap)
        metrics.makespan = plan.makespan
        metrics.replans = plan.replans
        metrics.retries = plan.retries
        metrics.plan_failures = len(plan.failures)
        metrics.late_deliveries = len(plan.late_deliveries)
        metrics.planning_time_s = plan.planning_time_s
    return metrics
