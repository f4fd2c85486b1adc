import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Type, TypeVar, Union

import pandas as pd
from pydantic import BaseModel

from ..allocation.service import AllocationOptions, AllocationResult
from ..bench.metrics import TIMING_FIELDS, RunMetrics
from ..models.domain import Scenario
from ..models.schemas import (AllocationFile, FailureModel, LegModel, PathModel, PlanFile, QueueModel,
                              ScenarioFile, TaskModel, VisitModel)
from ..planning.lifelong import PlanResult, TimedPath

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)
PathLike = Union[str, Path]


def allocation_to_file(scenario: Scenario, options: AllocationOptions, result: AllocationResult) -> AllocationFile:
    return AllocationFile(
        params=options.as_dict(),
        scenario=ScenarioFile.from_domain(scenario),
        tasks=[TaskModel.from_domain(t) for t in result.tasks],
        queues=[QueueModel.from_domain(q) for q in result.queues],
        predicted_costs=result.predicted_costs,
        total_score=result.total_score,
        rounds=result.rounds,
        messages=result.messages,
        n_items=result.n_items,
        unassigned=result.unassigned,
        conflicts=result.conflicts,
    )


def plan_to_file(plan: PlanResult, enforce_windows: bool, conflicts: Sequence[str] = ()) -> PlanFile:
    return PlanFile(
        enforce_windows=enforce_windows,
        actual_lengths=plan.actual_lengths,
        total_length=plan.total_length,
        makespan=plan.makespan,
        replans=plan.replans,
        retries=plan.retries,
        visits=[VisitModel(agent_id=v.agent_id, task_id=v.task_id, kind=v.kind, timestep=v.timestep)
                for v in plan.visits],
        legs=[LegModel(agent_id=leg.agent_id, task_id=leg.task_id, kind=leg.kind, start=leg.start.as_tuple(),
                       goal=leg.goal.as_tuple(), depart=leg.depart, arrive=leg.arrive, length=leg.length)
              for leg in plan.legs],
        failures=[FailureModel(agent_id=f.agent_id, task_id=f.task_id, kind=f.kind, timestep=f.timestep,
                               reason=f.reason) for f in plan.failures],
        late_deliveries=plan.late_deliveries,
        conflicts=list(conflicts),
        paths=[PathModel(agent_id=p.agent_id, steps=[(t, c.x, c.y) for t, c in p.steps]) for p in plan.paths],
    )


class ArtifactStore:
    """Reads and writes pipeline artifacts with stable, byte-reproducible formatting."""

    def __init__(self, float_format: str = "%.6f"):
        self.float_format = float_format

    def read_model(self, path: PathLike, model: Type[ModelT]) -> ModelT:
        try:
            document = model.model_validate_json(Path(path).read_text())
            logger.info(f"Loaded {model.__name__} from {path}")
            return document
        except Exception as e:
            logger.error(f"Error loading {model.__name__} from {path}: {str(e)}")
            raise

    def write_model(self, path: PathLike, document: BaseModel) -> Path:
        return self.write_json(path, document.model_dump(mode="json"))

    def write_json(self, path: PathLike, data: Union[Dict, List]) -> Path:
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
            logger.info(f"Wrote {path}")
            return path
        except Exception as e:
            logger.error(f"Error writing {path}: {str(e)}")
            raise

    def load_scenario(self, path: PathLike) -> Scenario:
        return self.read_model(path, ScenarioFile).to_domain()

    def save_scenario(self, path: PathLike, scenario: Scenario) -> Path:
        return self.write_model(path, ScenarioFile.from_domain(scenario))

    def export_paths(self, paths: Sequence[TimedPath], directory: PathLike) -> List[Path]:
        """One ``agent_<id>.csv`` with columns timestep,x,y per agent."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for path in paths:
            frame = pd.DataFrame([(t, c.x, c.y) for t, c in path.steps], columns=["timestep", "x", "y"])
            target = directory / f"agent_{path.agent_id}.csv"
            frame.to_csv(target, index=False)
            written.append(target)
        logger.info(f"Exported {len(written)} path files to {directory}")
        return written

    def write_metrics(self, path: PathLike, metrics: Sequence[RunMetrics]) -> Path:
        """Deterministic metrics as CSV; wall times are written separately."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame([m.as_dict(include_timings=False) for m in metrics])
        frame.to_csv(path, index=False, float_format=self.float_format)
        return path

    def write_timings(self, path: PathLike, metrics: Sequence[RunMetrics]) -> Path:
        rows = [{name: getattr(m, name) for name in ("label",) + TIMING_FIELDS} for m in metrics]
        return self.write_json(path, rows)
