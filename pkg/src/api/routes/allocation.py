from fastapi import APIRouter, BackgroundTasks, HTTPException
import logging
import uuid

from src.allocation.service import AllocationOptions
from src.bench.experiment import run_single
from src.core.exceptions import ConfigError, GcbhaError
from src.data.loader import allocation_to_file
from src.models.domain import Scenario, validate_scenario
from src.models.schemas import (AllocateRequest, AllocationFile, AllocationOptionsModel, RunRequest,
                                RunResponse, ScenarioFile)

router = APIRouter()

# Job statuses live in process memory
job_statuses = {}


def _options(model: AllocationOptionsModel) -> AllocationOptions:
    try:
        return AllocationOptions(kind=model.allocator, request_group=model.request_group, lam=model.lam,
                                 estimator=model.estimator, graph=model.graph, seed=model.seed)
    except (ConfigError, ValueError) as e:
        raise HTTPException(status_code=422, detail=str(e))


def _scenario(document: ScenarioFile) -> Scenario:
    scenario = document.to_domain()
    violations = validate_scenario(scenario.agents, scenario.tasks, scenario.layout)
    if violations:
        raise HTTPException(status_code=422, detail=violations)
    return scenario


def run_task(job_id: str, scenario: Scenario, options: AllocationOptions, enforce_windows: bool):
    try:
        outcome = run_single(scenario, options, plan=True, enforce_windows=enforce_windows)
        logging.info(f"Job {job_id} finished")
        job_statuses[job_id] = {
            "status": "completed",
            "metrics": outcome.metrics.as_dict(),
        }
    except Exception as e:
        logging.error(f"Error in run job {job_id}: {str(e)}")
        job_statuses[job_id] = {
            "status": "failed",
            "error_message": str(e)
        }


@router.post("/allocate", response_model=AllocationFile)
async def allocate(request: AllocateRequest):
    scenario = _scenario(request.scenario)
    options = _options(request.options)
    try:
        outcome = run_single(scenario, options, plan=False)
    except GcbhaError as e:
        raise HTTPException(status_code=400, detail=str(e))
    return allocation_to_file(scenario, options, outcome.allocation)


@router.post("/runs", response_model=RunResponse)
async def start_run(request: RunRequest, background_tasks: BackgroundTasks):
    scenario = _scenario(request.scenario)
    options = _options(request.options)
    job_id = str(uuid.uuid4())
    job_statuses[job_id] = {"status": "processing"}
    background_tasks.add_task(run_task, job_id, scenario, options, request.enforce_windows)
    return RunResponse(job_id=job_id, status="processing")


@router.get("/runs/{job_id}", response_model=RunResponse)
async def get_run_status(job_id: str):
    if job_id not in job_statuses:
        raise HTTPException(status_code=404, detail="Job not found")

    job_status = job_statuses[job_id]
    return RunResponse(
        job_id=job_id,
        status=job_status["status"],
        metrics=job_status.get("metrics"),
        error_message=job_status.get("error_message")
    )


@router.get("/health")
async def health_check():
    return {"status": "healthy"}
