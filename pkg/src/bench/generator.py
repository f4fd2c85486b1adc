"""Random warehouse scenarios for the experiment harness."""
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.exceptions import ScenarioError
from ..core.settings import (GROUP_REQUEST, LAMBDA, LARGE_AGENT_FRACTION, LARGE_CAPACITY, LARGE_REQUEST_RANGE,
                             LARGE_SPEED, LARGE_TASK_FRACTION, MAP_HEIGHT, MAP_WIDTH, ORIGIN_X, ORIGIN_Y,
                             RELEASE_HORIZON, REPETITIONS, REQUEST_RANGE, SCENARIO_STREAM, SHELF_DEPTH,
                             SHELF_GAP_H, SHELF_GAP_W, SHELF_LENGTH, SMALL_CAPACITY, SMALL_SPEED,
                             SPECIAL_TASK_FRACTION, UNIFORM_TASK_VALUE, VALUE_RATIO, WINDOW_RANGE)
from ..geometry.layout import Orientation, WarehouseLayout
from ..models.domain import Agent, CargoType, GridPoint, Scenario, Task, validate_scenario

logger = logging.getLogger(__name__)


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


class ScenarioConfig(BaseModel):
    """Parameters of one scenario family; defaults follow the reference warehouse setup."""
    model_config = ConfigDict(frozen=True, extra="forbid")

    width: int = Field(MAP_WIDTH, gt=0)
    height: int = Field(MAP_HEIGHT, gt=0)
    shelf_length: int = Field(SHELF_LENGTH, ge=1)
    shelf_depth: int = Field(SHELF_DEPTH, ge=1)
    shelf_gap_w: int = Field(SHELF_GAP_W, ge=1)
    shelf_gap_h: int = Field(SHELF_GAP_H, ge=1)
    origin: Tuple[int, int] = (ORIGIN_X, ORIGIN_Y)
    orientation: Orientation = Orientation.X_AXIS

    n_tasks: int = Field(20, ge=0)
    n_agents: int = Field(10, ge=1)
    small_speed: float = Field(SMALL_SPEED, gt=0)
    large_speed: float = Field(LARGE_SPEED, gt=0)
    small_capacity: int = Field(SMALL_CAPACITY, gt=0)
    large_capacity: int = Field(LARGE_CAPACITY, gt=0)
    large_agent_fraction: float = Field(LARGE_AGENT_FRACTION, ge=0, le=1)
    request_range: Tuple[int, int] = REQUEST_RANGE
    large_request_range: Tuple[int, int] = LARGE_REQUEST_RANGE
    large_task_fraction: float = Field(LARGE_TASK_FRACTION, ge=0, le=1)
    special_task_fraction: float = Field(SPECIAL_TASK_FRACTION, ge=0, le=1)
    group_request: int = Field(GROUP_REQUEST, gt=0)
    value_ratio: float = Field(VALUE_RATIO, ge=0)
    lam: float = Field(LAMBDA, gt=0, le=1)
    seed: int = 0
    repetitions: int = Field(REPETITIONS, ge=1)
    release_horizon: float = Field(RELEASE_HORIZON, ge=0)
    window_range: Tuple[float, float] = WINDOW_RANGE
    ignore_capacity: bool = False

    @model_validator(mode="after")
    def _check_ranges(self):
        for name in ("request_range", "large_request_range", "window_range"):
            low, high = getattr(self, name)
            if low <= 0 or low > high:
                raise ValueError(f"{name} must satisfy 0 < low <= high, got ({low}, {high})")
        return self

    def layout(self) -> WarehouseLayout:
        return WarehouseLayout(
            width=self.width,
            height=self.height,
            shelf_length_l=self.shelf_length,
            shelf_gap_w=self.shelf_gap_w,
            shelf_gap_h=self.shelf_gap_h,
            origin=GridPoint(*self.origin),
            orientation=self.orientation,
            shelf_depth=self.shelf_depth,
        )

    def with_counts(self, n_tasks: int, n_agents: int) -> "ScenarioConfig":
        return self.model_copy(update={"n_tasks": n_tasks, "n_agents": n_agents})


def _pick(rng: np.random.Generator, cells: List[GridPoint]) -> GridPoint:
    return cells[int(rng.integers(len(cells)))]


def _make_tasks(config: ScenarioConfig, layout: WarehouseLayout, rng: np.random.Generator) -> List[Task]:
    pickups, deliveries = layout.pickup_cells(), layout.delivery_cells()
    if not pickups or not deliveries:
        raise ScenarioError("Layout has no pickup or delivery cells")
    n = config.n_tasks
    large = set(rng.permutation(n)[:round_half_up(n * config.large_task_fraction)].tolist())
    special = set(rng.permutation(n)[:round_half_up(n * config.special_task_fraction)].tolist())

    tasks = []
    for task_id in range(n):
        low, high = config.large_request_range if task_id in large else config.request_range
        request = int(rng.integers(low, high + 1))
        start = _pick(rng, pickups)
        end = _pick(rng, deliveries)
        while end == start:
            end = _pick(rng, deliveries)
        release = round(float(rng.uniform(0, config.release_horizon)), 3)
        window = round(float(rng.uniform(*config.window_range)), 3)
        value = UNIFORM_TASK_VALUE if config.ignore_capacity else config.value_ratio * request
        tasks.append(Task(
            id=task_id,
            position_start=start,
            position_end=end,
            time_start=release,
            time_end=round(release + window, 3),
            request=request,
            cargo_type=CargoType.SPECIAL if task_id in special else CargoType.GENERAL,
            value=value,
        ))
    return tasks


def _make_agents(config: ScenarioConfig, layout: WarehouseLayout, tasks: List[Task],
                 rng: np.random.Generator) -> List[Agent]:
    n = config.n_agents
    endpoints = {t.position_start for t in tasks} | {t.position_end for t in tasks}
    homes = [c for c in layout.aisle_cells() if c not in endpoints]
    if n > len(homes):
        raise ScenarioError(f"Cannot place {n} agents on {len(homes)} free aisle cells")

    large = set(rng.permutation(n)[:round_half_up(n * config.large_agent_fraction)].tolist())
    n_special = 0
    if any(t.cargo_type == CargoType.SPECIAL for t in tasks):
        n_special = min(n, max(1, round_half_up(n * config.special_task_fraction)))
    special = set(rng.permutation(n)[:n_special].tolist())
    chosen = rng.choice(len(homes), size=n, replace=False)
    total_demand = sum(t.request for t in tasks)

    agents = []
    for agent_id in range(n):
        is_large = agent_id in large
        capacity = config.large_capacity if is_large else config.small_capacity
        if config.ignore_capacity:
            capacity = max(capacity, total_demand)
        agents.append(Agent(
            id=agent_id,
            position=homes[int(chosen[agent_id])],
            capacity=capacity,
            cargo_type=CargoType.SPECIAL if agent_id in special else CargoType.GENERAL,
            velocity=config.large_speed if is_large else config.small_speed,
        ))
    return agents


def scenario_seed(config: ScenarioConfig, seed: Optional[int] = None) -> np.random.SeedSequence:
    return np.random.SeedSequence([config.seed if seed is None else seed, SCENARIO_STREAM])


def generate(config: ScenarioConfig, seed: Optional[int] = None) -> Scenario:
    """Draw a reproducible scenario; the same (config, seed) always yields the same scenario."""
    seed = config.seed if seed is None else seed
    try:
        layout = config.layout()
        rng = np.random.default_rng(scenario_seed(config, seed))
        tasks = _make_tasks(config, layout, rng)
        agents = _make_agents(config, layout, tasks, rng)
        violations = validate_scenario(agents, tasks, layout)
        if violations:
            raise ScenarioError(f"Generated scenario is invalid: {violations[:5]}")
        logger.info(f"Generated scenario with {len(tasks)} tasks and {len(agents)} agents (seed {seed})")
        return Scenario(layout=layout, agents=tuple(agents), tasks=tuple(tasks), seed=seed)
    except Exception as e:
        logger.error(f"Error generating scenario: {str(e)}")
        raise
