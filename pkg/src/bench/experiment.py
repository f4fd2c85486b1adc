"""Experiment matrices: generate, allocate, plan and aggregate repeated runs."""
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
import psutil
from pydantic import BaseModel, ConfigDict, Field

from ..allocation.baselines import AllocatorKind
from ..allocation.service import AllocationOptions, AllocationResult, AllocationService
from ..core.config import settings
from ..geometry.estimators import Estimator
from ..models.domain import Scenario
from ..planning.lifelong import PlanResult, plan_all
from .generator import ScenarioConfig, generate
from .metrics import TIMING_FIELDS, RunMetrics, compute_metrics

logger = logging.getLogger(__name__)

EXPERIMENT1_SIZES = [(20, 10), (50, 10), (50, 20), (100, 20), (100, 50), (200, 50), (200, 100)]
EXPERIMENT2_SIZES = [(50, 20), (100, 20), (200, 20), (50, 50), (100, 50), (200, 50)]
SLOW_TASK_COUNT = 200


class AllocatorSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: AllocatorKind
    request_group: Optional[int] = Field(None, gt=0)
    estimator: Estimator = Estimator(settings.DEFAULT_ESTIMATOR)
    graph: str = settings.DEFAULT_GRAPH
    lam: Optional[float] = Field(None, gt=0, le=1)

    @property
    def label(self) -> str:
        name = self.kind.report_label
        if self.kind == AllocatorKind.GCBHA and self.request_group is not None:
            name = f"{name}({self.request_group})"
        if self.estimator != Estimator(settings.DEFAULT_ESTIMATOR):
            name = f"{name}[{self.estimator.value}]"
        return name

    def options(self, config: ScenarioConfig, seed: int) -> AllocationOptions:
        return AllocationOptions(
            kind=self.kind,
            request_group=self.request_group or config.group_request,
            lam=self.lam or config.lam,
            estimator=self.estimator,
            graph=self.graph,
            seed=seed,
        )


class ExperimentCell(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    allocator: AllocatorSpec
    config: ScenarioConfig = ScenarioConfig()
    slow: bool = False

    @property
    def label(self) -> str:
        suffix = ", no capacity" if self.config.ignore_capacity else ""
        return f"{self.allocator.label} ({self.config.n_tasks},{self.config.n_agents}{suffix})"


class ExperimentMatrix(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = "custom"
    seed: int = 0
    plan: bool = True
    enforce_windows: bool = settings.ENFORCE_WINDOWS
    cells: List[ExperimentCell] = Field(default_factory=list)


def experiment1(seed: int = 0) -> ExperimentMatrix:
    """Allocation-only comparison with and without carrying capacity."""
    allocators = [
        AllocatorSpec(kind=AllocatorKind.GCBHA, request_group=50),
        AllocatorSpec(kind=AllocatorKind.GCBHA, request_group=100),
        AllocatorSpec(kind=AllocatorKind.CBGA),
        AllocatorSpec(kind=AllocatorKind.CENTRAL),
    ]
    cells = []
    for ignore_capacity in (True, False):
        for n_tasks, n_agents in EXPERIMENT1_SIZES:
            config = ScenarioConfig(n_tasks=n_tasks, n_agents=n_agents, ignore_capacity=ignore_capacity)
            for allocator in allocators:
                cells.append(ExperimentCell(allocator=allocator, config=config, slow=n_tasks >= SLOW_TASK_COUNT))
    return ExperimentMatrix(name="experiment1", seed=seed, plan=False, cells=cells)


def experiment2(seed: int = 0) -> ExperimentMatrix:
    """Full pickup-and-delivery runs: allocation followed by lifelong planning."""
    allocators = [
        AllocatorSpec(kind=AllocatorKind.GCBHA, request_group=50),
        AllocatorSpec(kind=AllocatorKind.CBGA),
        AllocatorSpec(kind=AllocatorKind.CENTRAL),
        AllocatorSpec(kind=AllocatorKind.TA_PRIORITY),
    ]
    cells = [ExperimentCell(allocator=allocator, config=ScenarioConfig(n_tasks=n_tasks, n_agents=n_agents),
                            slow=n_tasks >= SLOW_TASK_COUNT)
             for n_tasks, n_agents in EXPERIMENT2_SIZES for allocator in allocators]
    return ExperimentMatrix(name="experiment2", seed=seed, plan=True, cells=cells)


PRESETS = {"experiment1": experiment1, "experiment2": experiment2}


@dataclass
class RunOutcome:
    scenario: Scenario
    allocation: AllocationResult
    plan: Optional[PlanResult]
    metrics: RunMetrics


def run_single(scenario: Scenario, options: AllocationOptions, plan: bool = True,
               enforce_windows: bool = settings.ENFORCE_WINDOWS, label: Optional[str] = None,
               repetition: int = 0) -> RunOutcome:
    """Allocate one scenario and optionally execute the queues with the lifelong planner."""
    allocation = AllocationService(options).allocate(scenario)
    plan_result = None
    if plan:
        plan_result = plan_all(list(scenario.agents), allocation.queues, scenario.layout,
                               enforce_windows=enforce_windows)
    metrics = compute_metrics(label or options.kind.report_label, scenario, allocation, plan_result,
                              repetition=repetition, seed=options.seed)
    return RunOutcome(scenario, allocation, plan_result, metrics)


def repetition_seed(matrix_seed: int, config_seed: int, repetition: int) -> int:
    return int(np.random.SeedSequence([matrix_seed, config_seed, repetition]).generate_state(1)[0])


def _run_job(cell: ExperimentCell, repetition: int, seed: int, plan: bool,
             enforce_windows: bool) -> Tuple[Optional[Dict], Optional[str]]:
    try:
        scenario = generate(cell.config, seed)
        outcome = run_single(scenario, cell.allocator.options(cell.config, seed), plan=plan,
                             enforce_windows=enforce_windows, label=cell.label, repetition=repetition)
        return outcome.metrics.as_dict(), None
    except Exception as e:
        logger.error(f"Error in {cell.label} repetition {repetition}: {str(e)}")
        return None, f"{type(e).__name__}: {e}"


def resolve_jobs(jobs: Optional[int]) -> int:
    jobs = settings.N_JOBS if jobs is None else jobs
    if jobs is None or jobs < 1:
        return psutil.cpu_count(logical=False) or 1
    return jobs


@dataclass
class ExperimentReport:
    matrix: ExperimentMatrix
    runs: List[Dict] = field(default_factory=list)
    failures: List[Dict] = field(default_factory=list)
    elapsed_s: float = 0.0

    def _long_frame(self, metrics: List[str]) -> pd.DataFrame:
        id_columns = ["cell", "label", "allocator", "n_tasks", "n_agents"]
        columns = id_columns + ["metric", "mean", "std", "runs", "failures"]
        if not self.runs:
            return pd.DataFrame(columns=columns)
        frame = pd.DataFrame(self.runs)
        long = frame.melt(id_vars=id_columns + ["repetition"], value_vars=metrics,
                          var_name="metric", value_name="value").dropna(subset=["value"])
        long["value"] = long["value"].astype(float)
        grouped = long.groupby(id_columns + ["metric"], sort=False)["value"]
        summary = grouped.agg(mean="mean", std=lambda v: float(np.std(v, ddof=0)), runs="count").reset_index()
        failed = pd.Series([f["cell"] for f in self.failures], dtype=int).value_counts()
        summary["failures"] = summary["cell"].map(failed).fillna(0).astype(int)
        order = {name: i for i, name in enumerate(metrics)}
        summary["_order"] = summary["metric"].map(order)
        summary = summary.sort_values(["cell", "_order"], kind="stable").drop(columns="_order")
        return summary[columns].reset_index(drop=True)

    def summary(self) -> pd.DataFrame:
        metrics = [m for m in RunMetrics.numeric_fields() if m not in TIMING_FIELDS]
        return self._long_frame(metrics)

    def timings(self) -> pd.DataFrame:
        return self._long_frame(list(TIMING_FIELDS))

    def write(self, output_dir: Path) -> List[Path]:
        """Write report.csv, timings.csv and runs.json; only timings.csv varies between re-runs."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        report_path = output_dir / "report.csv"
        timings_path = output_dir / "timings.csv"
        runs_path = output_dir / "runs.json"
        self.summary().to_csv(report_path, index=False, float_format="%.6f")
        self.timings().to_csv(timings_path, index=False, float_format="%.6f")
        detail = {
            "matrix": self.matrix.model_dump(mode="json"),
            "runs": [{k: v for k, v in run.items() if k not in TIMING_FIELDS} for run in self.runs],
            "failures": self.failures,
        }
        runs_path.write_text(json.dumps(detail, indent=2, sort_keys=True))
        logger.info(f"Wrote experiment report to {output_dir}")
        return [report_path, timings_path, runs_path]


def run_experiment(matrix: ExperimentMatrix, jobs: Optional[int] = None, include_slow: bool = True) -> ExperimentReport:
    """Run every cell ``config.repetitions`` times and collect per-run metrics.

    Repetition ``r`` of a cell uses the scenario seed derived from the matrix
    seed, the cell's config seed and ``r``, so allocators sharing a config
    see identical scenarios. A failing run is recorded and the matrix goes on.
    """
    start_time = time.perf_counter()
    report = ExperimentReport(matrix=matrix)
    jobs_list = []
    for index, cell in enumerate(matrix.cells):
        if cell.slow and not include_slow:
            logger.info(f"Skipping slow cell {cell.label}")
            continue
        for repetition in range(cell.config.repetitions):
            seed = repetition_seed(matrix.seed, cell.config.seed, repetition)
            jobs_list.append((index, cell, repetition, seed))

    workers = resolve_jobs(jobs)
    logger.info(f"Running {len(jobs_list)} runs of '{matrix.name}' on {workers} workers")
    results: Dict[Tuple[int, int], Tuple[Optional[Dict], Optional[str], int]] = {}
    try:
        if workers == 1:
            for index, cell, repetition, seed in jobs_list:
                metrics, error = _run_job(cell, repetition, seed, matrix.plan, matrix.enforce_windows)
                results[(index, repetition)] = (metrics, error, seed)
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = {
                    executor.submit(_run_job, cell, repetition, seed, matrix.plan, matrix.enforce_windows):
                        (index, repetition, seed)
                    for index, cell, repetition, seed in jobs_list
                }
                for future in as_completed(futures):
                    index, repetition, seed = futures[future]
                    metrics, error = future.result()
                    results[(index, repetition)] = (metrics, error, seed)
    except Exception as e:
        logger.error(f"Error running experiment '{matrix.name}': {str(e)}")
        raise

    for (index, repetition) in sorted(results):
        metrics, error, seed = results[(index, repetition)]
        if error is not None:
            report.failures.append({"cell": index, "label": matrix.cells[index].label,
                                    "repetition": repetition, "seed": seed, "error": error})
        else:
            report.runs.append({"cell": index, **metrics})
    report.elapsed_s = time.perf_counter() - start_time
    logger.info(f"Experiment '{matrix.name}' finished {len(report.runs)} runs with "
                f"{len(report.failures)} failures in {report.elapsed_s:.2f}s")
    return report
