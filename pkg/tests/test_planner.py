import pytest

from src.allocation.baselines import AllocatorKind
from src.allocation.service import AllocationOptions
from src.bench.experiment import run_single
from src.bench.generator import ScenarioConfig, generate
from src.geometry.oracle import bfs_oracle
from src.models.domain import GridPoint, OrderedTargetQueue, Target, TargetKind
from src.planning.lifelong import LifelongPlanner, TimedPath, plan_all
from src.planning.reservation import ReservationTable
from src.planning.search import find_path, unit_moves
from src.planning.validation import find_conflicts, path_violations
from tests.factories import make_agent, make_task


def queue_for(agent_id, *tasks):
    targets = []
    for task in tasks:
        targets += [Target.pickup(task), Target.delivery(task)]
    return OrderedTargetQueue(agent_id, tuple(targets))


def test_single_agent_on_empty_map(open_layout):
    agent = make_agent(0, (0, 0))
    task = make_task(0, (3, 0), (3, 5))
    plan = plan_all([agent], [queue_for(0, task)], open_layout)
    assert plan.actual_lengths == [8]
    assert plan.makespan == 8
    assert plan.replans == 2
    assert plan.failures == []
    assert [v.timestep for v in plan.visits] == [3, 8]
    # home leg follows the queue
    assert plan.paths[0].end_position == agent.position


def test_fast_agent_covers_two_cells_per_step(open_layout):
    agent = make_agent(0, (0, 0), velocity=2.0)
    task = make_task(0, (10, 0), (10, 4))
    plan = plan_all([agent], [queue_for(0, task)], open_layout, return_home=False)
    assert plan.visits[0].timestep == 5
    assert plan.legs[0].length == 10
    assert plan.visits[1].timestep == 7
    assert path_violations(plan.paths[0], agent, open_layout) == []


def test_pickup_waits_for_release(open_layout):
    agent = make_agent(0, (0, 0))
    task = make_task(0, (3, 0), (3, 5), time_start=12.5)
    held = plan_all([agent], [queue_for(0, task)], open_layout, return_home=False)
    assert [v.timestep for v in held.visits] == [13, 18]
    free = plan_all([agent], [queue_for(0, task)], open_layout, enforce_windows=False, return_home=False)
    assert [v.timestep for v in free.visits] == [3, 8]


def test_replan_starts_after_remaining_steps(open_layout):
    agent = make_agent(0, (0, 0))
    task = make_task(0, (3, 0), (3, 5))
    planner = LifelongPlanner([agent], [queue_for(0, task)], open_layout)
    assert planner.lifelong_step(0, 0) == 3
    assert planner.remaining_steps(0, 0) == 3
    planner.lifelong_step(0, 0)
    assert planner.legs[1].depart == 3
    assert planner.legs[1].arrive == 8


def test_replan_touches_only_one_agent(open_layout):
    agents = [make_agent(0, (0, 0)), make_agent(1, (10, 10)), make_agent(2, (19, 19))]
    tasks = [make_task(0, (3, 0), (3, 5)), make_task(1, (12, 10), (12, 15)), make_task(2, (17, 19), (17, 14))]
    planner = LifelongPlanner(agents, [queue_for(i, tasks[i]) for i in range(3)], open_layout)
    planner.lifelong_step(0, 0)
    assert planner.replans == 1
    assert planner.paths[1].steps == [(0, GridPoint(10, 10))]
    assert planner.paths[2].steps == [(0, GridPoint(19, 19))]


def test_full_episode_is_conflict_free(small_layout):
    agents = [make_agent(0, (0, 0)), make_agent(1, (29, 0)), make_agent(2, (0, 19), velocity=2.0)]
    tasks = [make_task(0, (2, 2), (26, 5)), make_task(1, (13, 2), (1, 9)), make_task(2, (5, 4), (27, 17))]
    queues = [queue_for(i, tasks[i]) for i in range(3)]
    plan = plan_all(agents, queues, small_layout)

    assert plan.failures == []
    assert find_conflicts(plan.paths) == []
    for agent, path in zip(agents, plan.paths):
        assert path_violations(path, agent, small_layout) == []
    assert plan.replans == 6
    assert plan.replans <= plan.n_targets
    for leg in plan.legs:
        assert leg.length >= bfs_oracle(leg.start, leg.goal, small_layout)
    assert plan.total_length == sum(leg.length for leg in plan.legs)


def test_crossing_agents_avoid_each_other(open_layout):
    agents = [make_agent(0, (0, 5)), make_agent(1, (10, 5))]
    tasks = [make_task(0, (9, 5), (9, 8)), make_task(1, (1, 5), (1, 8))]
    plan = plan_all(agents, [queue_for(0, tasks[0]), queue_for(1, tasks[1])], open_layout)
    assert plan.failures == []
    assert find_conflicts(plan.paths) == []


def test_blocked_target_is_dropped(open_layout):
    agents = [make_agent(0, (0, 0)), make_agent(1, (5, 0))]
    task = make_task(0, (5, 0), (5, 5))
    plan = plan_all(agents, [queue_for(0, task)], open_layout)
    assert len(plan.failures) == 1
    assert plan.failures[0].kind == TargetKind.PICKUP
    assert plan.visits == []
    assert plan.retries == 10
    assert find_conflicts(plan.paths) == []


def test_find_path_returns_none_for_parked_goal(open_layout):
    table = ReservationTable()
    goal = GridPoint(5, 5)
    table.park(1, goal, 0)
    assert find_path(0, 1.0, GridPoint(0, 0), 0, goal, open_layout, table, horizon=20) is None


def test_find_path_avoids_reserved_cell(open_layout):
    table = ReservationTable()
    table.reserve_path(1, [(0, GridPoint(1, 1)), (1, GridPoint(1, 0)), (2, GridPoint(1, 1))])
    steps = find_path(0, 1.0, GridPoint(0, 0), 0, GridPoint(2, 0), open_layout, table)
    assert (1, GridPoint(1, 0)) not in steps
    assert steps[0] == (0, GridPoint(0, 0))
    assert steps[-1][1] == GridPoint(2, 0)
    assert unit_moves(steps) >= 2


def test_reservation_parking_rules():
    table = ReservationTable()
    cell = GridPoint(2, 2)
    table.park(0, cell, 5)
    assert table.is_free(4, cell, 1)
    assert not table.is_free(5, cell, 1)
    assert table.is_free(9, cell, 0)
    assert table.parked_by(cell) == 0
    assert table.unpark(1, cell) is None
    assert table.unpark(0, cell).since == 5

    table.reserve(7, cell, 1)
    assert not table.can_park(cell, 7, 0)
    assert table.can_park(cell, 8, 0)


def test_conflict_detection():
    swap = [TimedPath(0, [(0, GridPoint(0, 0)), (1, GridPoint(1, 0))]),
            TimedPath(1, [(0, GridPoint(1, 0)), (1, GridPoint(0, 0))])]
    conflicts = find_conflicts(swap)
    assert [c.kind for c in conflicts] == ["edge"]

    parked = [TimedPath(0, [(0, GridPoint(2, 0)), (1, GridPoint(3, 0))]),
              TimedPath(1, [(0, GridPoint(5, 0)), (1, GridPoint(4, 0)), (2, GridPoint(3, 0))])]
    conflicts = find_conflicts(parked)
    assert len(conflicts) == 1
    assert conflicts[0].kind == "vertex"
    assert conflicts[0].timestep == 2


@pytest.mark.parametrize("steps, fragment", [
    ([(0, GridPoint(0, 0)), (1, GridPoint(2, 0))], "non-unit"),
    ([(0, GridPoint(0, 0)), (1, GridPoint(1, 0)), (1, GridPoint(2, 0))], "exceed speed"),
    ([(0, GridPoint(0, 0)), (3, GridPoint(0, 0))], "jumps"),
])
def test_path_violations(open_layout, steps, fragment):
    violations = path_violations(TimedPath(0, steps), make_agent(0, (0, 0)), open_layout)
    assert any(fragment in v for v in violations)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(50))
def test_generated_episodes_replan_once_per_target(seed):
    scenario = generate(ScenarioConfig(width=40, height=20, n_tasks=10, n_agents=4), seed)
    kind = AllocatorKind.GCBHA if seed % 2 == 0 else AllocatorKind.CBGA
    plan = run_single(scenario, AllocationOptions(kind=kind, seed=seed)).plan
    assert plan.replans <= plan.n_targets
    assert find_conflicts(plan.paths) == []
