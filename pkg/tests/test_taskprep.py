import pytest

from src.allocation.taskprep import (GroupingConfig, all_tasks_cycle, decompose, group, nearest_group,
                                     single_task_cycle, singleton_groups)
from src.core.exceptions import ConfigError, ScenarioError
from src.models.domain import CargoType
from tests.factories import make_agent, make_task


@pytest.mark.parametrize("request_size, capacities, expected", [
    (250, [100, 200], [100, 100, 50]),
    (300, [100, 100], [100, 100, 100]),
    (150, [100, 200], [150]),
])
def test_decompose_requests(request_size, capacities, expected):
    agents = [make_agent(i, (0, i), capacity=c) for i, c in enumerate(capacities)]
    tasks = [make_task(0, (1, 1), (5, 5), request=request_size)]
    pieces = decompose(tasks, agents)
    assert [t.request for t in pieces] == expected
    assert [t.id for t in pieces] == list(range(len(expected)))
    assert sum(t.request for t in pieces) == request_size


def test_decompose_splits_value_by_demand():
    agents = [make_agent(0, (0, 0), capacity=100), make_agent(1, (0, 1), capacity=200)]
    tasks = [make_task(0, (1, 1), (5, 5), request=20), make_task(1, (2, 2), (6, 6), request=250, value=25.0)]
    pieces = decompose(tasks, agents)
    assert [t.id for t in pieces] == [0, 1, 2, 3]
    assert pieces[0] == tasks[0]
    assert [t.value for t in pieces[1:]] == pytest.approx([10.0, 10.0, 5.0])
    assert all(t.position_start == tasks[1].position_start for t in pieces[1:])


def test_decompose_without_agents():
    with pytest.raises(ScenarioError):
        decompose([make_task(0, (1, 1), (5, 5))], [])


def test_grouping_config_rejects_non_positive_cap():
    with pytest.raises(ConfigError):
        GroupingConfig(0)


def test_single_task_forms_its_own_group(manhattan_ctx):
    task = make_task(0, (2, 3), (9, 4))
    meta_tasks, group_list = group([task], GroupingConfig(50), manhattan_ctx.layout, manhattan_ctx.cost)
    assert meta_tasks == [task]
    assert group_list == {0: [task]}


def test_small_cap_keeps_singletons(manhattan_ctx):
    tasks = [make_task(0, (2, 2), (8, 2), request=30), make_task(1, (2, 2), (8, 2), request=30),
             make_task(2, (3, 2), (8, 3), request=40)]
    config = GroupingConfig(50)
    assert not config.enables_grouping(tasks)
    grouped = group(tasks, config, manhattan_ctx.layout, manhattan_ctx.cost)
    assert grouped == singleton_groups(tasks, manhattan_ctx.layout)
    assert grouped[0] == tasks


def test_collocated_tasks_pair_up(manhattan_ctx):
    tasks = [make_task(i, (2, 2), (8, 2), request=20) for i in range(3)]
    meta_tasks, group_list = group(tasks, GroupingConfig(50), manhattan_ctx.layout, manhattan_ctx.cost)
    assert [[t.id for t in group_list[g]] for g in sorted(group_list)] == [[0, 1], [2]]
    assert meta_tasks[0].request == 40
    assert meta_tasks[0].value == pytest.approx(4.0)
    assert meta_tasks[1].request == 20


def test_meta_task_aggregates_members(manhattan_ctx):
    a = make_task(0, (2, 2), (8, 2), request=20, time_start=5.0, time_end=400.0)
    b = make_task(1, (4, 2), (8, 4), request=25, time_start=2.0, time_end=300.0)
    meta_tasks, _ = group([a, b], GroupingConfig(50), manhattan_ctx.layout, manhattan_ctx.cost)
    assert len(meta_tasks) == 1
    meta = meta_tasks[0]
    assert meta.request == 45
    assert (meta.time_start, meta.time_end) == (2.0, 300.0)
    assert meta.position_start.as_tuple() == (3, 2)
    assert meta.position_end.as_tuple() == (8, 3)


def test_far_apart_tasks_stay_apart(manhattan_ctx):
    near = make_task(0, (0, 0), (1, 0), request=10)
    far = make_task(1, (19, 19), (18, 19), request=10)
    members, rest = nearest_group([near, far], 50, manhattan_ctx.layout, manhattan_ctx.cost)
    assert members == [near]
    assert rest == [far]


def test_shared_endpoints_merge(manhattan_ctx):
    tasks = [make_task(0, (5, 5), (12, 5), request=10), make_task(1, (5, 5), (12, 5), request=10)]
    members, rest = nearest_group(tasks, 50, manhattan_ctx.layout, manhattan_ctx.cost)
    assert [t.id for t in members] == [0, 1]
    assert rest == []
    assert all_tasks_cycle(members, manhattan_ctx.cost) < single_task_cycle(members, manhattan_ctx.cost)


def test_equal_cost_groups_keep_the_earlier_seed(manhattan_ctx):
    # two translated copies of the same pair
    tasks = [make_task(0, (0, 0), (0, 10)), make_task(1, (1, 0), (1, 10)),
             make_task(2, (10, 0), (10, 10)), make_task(3, (11, 0), (11, 10))]
    members, rest = nearest_group(tasks, 20, manhattan_ctx.layout, manhattan_ctx.cost)
    assert [t.id for t in members] == [0, 1]
    assert [t.id for t in rest] == [2, 3]


def test_grouping_partitions_tasks(manhattan_ctx):
    specs = [((1, 1), (15, 2), 20), ((2, 1), (15, 3), 15), ((10, 10), (1, 18), 30), ((11, 9), (2, 18), 25),
             ((18, 4), (6, 6), 60), ((3, 14), (16, 15), 10), ((2, 2), (14, 2), 35)]
    tasks = [make_task(i, s, e, request=r) for i, (s, e, r) in enumerate(specs)]
    tasks.append(make_task(len(tasks), (1, 2), (15, 2), request=10, cargo_type=CargoType.SPECIAL))
    config = GroupingConfig(50)
    meta_tasks, group_list = group(tasks, config, manhattan_ctx.layout, manhattan_ctx.cost)

    assert [m.id for m in meta_tasks] == list(range(len(meta_tasks)))
    members = sorted(t.id for g in group_list.values() for t in g)
    assert members == [t.id for t in tasks]
    for meta in meta_tasks:
        group_members = group_list[meta.id]
        assert len({t.cargo_type for t in group_members}) == 1
        assert meta.request == sum(t.request for t in group_members)
        if len(group_members) > 1:
            assert meta.request <= config.request_group
    # oversized task is auctioned alone
    assert any(group_list[g] == [tasks[4]] for g in group_list)
