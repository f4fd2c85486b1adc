"""JSON artifact and API schemas.

Artifacts are plain JSON documents validated with pydantic on load. Each
file schema converts to and from the domain objects it carries.
"""
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from ..core.config import settings
from ..core.exceptions import AllocationError
from ..geometry.layout import Orientation, WarehouseLayout
from .domain import (Agent, CargoType, GridPoint, OrderedTargetQueue, Scenario, Target, TargetKind, Task)

SCENARIO_FORMAT = "gcbha-scenario"
ALLOCATION_FORMAT = "gcbha-allocation"
PLAN_FORMAT = "gcbha-plan"
FORMAT_VERSION = 1


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LayoutModel(_Strict):
    width: int
    height: int
    shelf_length: int
    shelf_gap_w: int
    shelf_gap_h: int
    shelf_depth: int
    origin: Tuple[int, int]
    orientation: Orientation = Orientation.X_AXIS

    @classmethod
    def from_domain(cls, layout: WarehouseLayout) -> "LayoutModel":
        return cls(width=layout.width, height=layout.height, shelf_length=layout.shelf_length_l,
                   shelf_gap_w=layout.shelf_gap_w, shelf_gap_h=layout.shelf_gap_h, shelf_depth=layout.shelf_depth,
                   origin=layout.origin.as_tuple(), orientation=layout.orientation)

    def to_domain(self) -> WarehouseLayout:
        return WarehouseLayout(width=self.width, height=self.height, shelf_length_l=self.shelf_length,
                               shelf_gap_w=self.shelf_gap_w, shelf_gap_h=self.shelf_gap_h,
                               origin=GridPoint(*self.origin), orientation=self.orientation,
                               shelf_depth=self.shelf_depth)


class AgentModel(_Strict):
    id: int
    position: Tuple[int, int]
    capacity: int
    cargo_type: CargoType = CargoType.GENERAL
    velocity: float = 1.0

    @classmethod
    def from_domain(cls, agent: Agent) -> "AgentModel":
        return cls(id=agent.id, position=agent.position.as_tuple(), capacity=agent.capacity,
                   cargo_type=agent.cargo_type, velocity=agent.velocity)

    def to_domain(self) -> Agent:
        return Agent(id=self.id, position=GridPoint(*self.position), capacity=self.capacity,
                     cargo_type=self.cargo_type, velocity=self.velocity)


class TaskModel(_Strict):
    id: int
    position_start: Tuple[int, int]
    position_end: Tuple[int, int]
    time_start: float
    time_end: float
    request: int
    cargo_type: CargoType = CargoType.GENERAL
    value: float = 0.0

    @classmethod
    def from_domain(cls, task: Task) -> "TaskModel":
        return cls(id=task.id, position_start=task.position_start.as_tuple(),
                   position_end=task.position_end.as_tuple(), time_start=task.time_start,
                   time_end=task.time_end, request=task.request, cargo_type=task.cargo_type, value=task.value)

    def to_domain(self) -> Task:
        return Task(id=self.id, position_start=GridPoint(*self.position_start),
                    position_end=GridPoint(*self.position_end), time_start=self.time_start,
                    time_end=self.time_end, request=self.request, cargo_type=self.cargo_type, value=self.value)


class ScenarioFile(_Strict):
    format: str = SCENARIO_FORMAT
    version: int = FORMAT_VERSION
    seed: Optional[int] = None
    layout: LayoutModel
    agents: List[AgentModel]
    tasks: List[TaskModel]

    @classmethod
    def from_domain(cls, scenario: Scenario) -> "ScenarioFile":
        return cls(seed=scenario.seed, layout=LayoutModel.from_domain(scenario.layout),
                   agents=[AgentModel.from_domain(a) for a in scenario.agents],
                   tasks=[TaskModel.from_domain(t) for t in scenario.tasks])

    def to_domain(self) -> Scenario:
        return Scenario(layout=self.layout.to_domain(), agents=tuple(a.to_domain() for a in self.agents),
                        tasks=tuple(t.to_domain() for t in self.tasks), seed=self.seed)


class TargetModel(_Strict):
    task_id: int
    kind: TargetKind
    position: Tuple[int, int]


class QueueModel(_Strict):
    agent_id: int
    targets: List[TargetModel] = Field(default_factory=list)

    @classmethod
    def from_domain(cls, queue: OrderedTargetQueue) -> "QueueModel":
        return cls(agent_id=queue.agent_id,
                   targets=[TargetModel(task_id=t.task_id, kind=t.kind, position=t.position.as_tuple())
                            for t in queue.targets])

    def to_domain(self, tasks: Dict[int, Task]) -> OrderedTargetQueue:
        targets = []
        for target in self.targets:
            task = tasks.get(target.task_id)
            if task is None:
                raise AllocationError(f"Queue of agent {self.agent_id} references unknown task {target.task_id}")
            targets.append(Target(GridPoint(*target.position), target.kind, task.id, task.time_start, task.time_end))
        return OrderedTargetQueue(self.agent_id, tuple(targets))


class AllocationFile(_Strict):
    """Allocation artifact; ``tasks`` holds the processed task list the queues refer to."""
    format: str = ALLOCATION_FORMAT
    version: int = FORMAT_VERSION
    params: Dict
    scenario: ScenarioFile
    tasks: List[TaskModel]
    queues: List[QueueModel]
    predicted_costs: List[float]
    total_score: float
    rounds: int = 0
    messages: int = 0
    n_items: int = 0
    unassigned: List[int] = Field(default_factory=list)
    conflicts: List[int] = Field(default_factory=list)

    def domain_tasks(self) -> List[Task]:
        return [t.to_domain() for t in self.tasks]

    def domain_queues(self) -> List[OrderedTargetQueue]:
        tasks = {t.id: t for t in self.domain_tasks()}
        return [q.to_domain(tasks) for q in self.queues]


class PathModel(_Strict):
    agent_id: int
    steps: List[Tuple[int, int, int]]


class VisitModel(_Strict):
    agent_id: int
    task_id: int
    kind: TargetKind
    timestep: int


class LegModel(_Strict):
    agent_id: int
    task_id: int
    kind: TargetKind
    start: Tuple[int, int]
    goal: Tuple[int, int]
    depart: int
    arrive: int
    length: int


class FailureModel(_Strict):
    agent_id: int
    task_id: int
    kind: TargetKind
    timestep: int
    reason: str


class PlanFile(_Strict):
    format: str = PLAN_FORMAT
    version: int = FORMAT_VERSION
    enforce_windows: bool
    actual_lengths: List[int]
    total_length: int
    makespan: int
    replans: int
    retries: int
    visits: List[VisitModel]
    legs: List[LegModel]
    failures: List[FailureModel] = Field(default_factory=list)
    late_deliveries: List[int] = Field(default_factory=list)
    conflicts: List[str] = Field(default_factory=list)
    paths: List[PathModel]


# API models

class AllocationOptionsModel(BaseModel):
    allocator: str = Field("gcbha", description="One of gcbha, cbga, central, ta-priority")
    request_group: int = Field(settings.DEFAULT_GROUP_REQUEST, gt=0, description="Group demand cap")
    lam: float = Field(settings.DEFAULT_LAMBDA, gt=0, le=1, description="Time discount factor")
    estimator: str = Field(settings.DEFAULT_ESTIMATOR, description="warehouse, euclidean or manhattan")
    graph: str = Field(settings.DEFAULT_GRAPH, description="full, line, ring or random:<p>")
    seed: int = Field(0, description="Seed for random communication graphs")


class AllocateRequest(BaseModel):
    scenario: ScenarioFile
    options: AllocationOptionsModel = Field(default_factory=AllocationOptionsModel)


class RunRequest(BaseModel):
    scenario: ScenarioFile
    options: AllocationOptionsModel = Field(default_factory=AllocationOptionsModel)
    enforce_windows: bool = Field(settings.ENFORCE_WINDOWS, description="Wait for task release before pickup")


class RunResponse(BaseModel):
    job_id: str
    status: str
    metrics: Optional[dict] = None
    error_message: Optional[str] = None
