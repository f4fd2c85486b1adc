from collections import Counter

import pytest

from src.allocation.auction import release_from
from src.allocation.netsim import GraphKind, make_graph, run_consensus
from src.allocation.scoring import ScoreParams, ScoringContext, evaluate_bundle
from src.allocation.service import AllocationOptions, AllocationService
from src.allocation.taskprep import GroupingConfig, decompose, group
from src.bench.generator import ScenarioConfig, generate
from src.models.domain import validate_queues
from src.planning.lifelong import plan_all
from src.planning.validation import find_conflicts, path_violations

GRAPHS = [GraphKind.FULL, GraphKind.RING, GraphKind.RANDOM]


def small_scenario(seed):
    config = ScenarioConfig(width=40, height=20, n_tasks=6 + seed % 3, n_agents=3)
    return generate(config, seed)


def demand_by_type(tasks):
    totals = Counter()
    for task in tasks:
        totals[task.cargo_type] += task.request
    return totals


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(200))
def test_pipeline_invariants(seed):
    scenario = small_scenario(seed)
    agents = list(scenario.agents)

    tasks = decompose(scenario.tasks, agents)
    assert demand_by_type(tasks) == demand_by_type(scenario.tasks)
    assert [t.id for t in tasks] == list(range(len(tasks)))
    assert max(t.request for t in tasks) <= max(a.capacity for a in agents)

    ctx = ScoringContext(ScoreParams(), scenario.layout)
    cap = 50
    meta_tasks, group_list = group(tasks, GroupingConfig(cap), scenario.layout, ctx.cost)
    assert sorted(t.id for members in group_list.values() for t in members) == list(range(len(tasks)))
    for meta in meta_tasks:
        members = group_list[meta.id]
        assert len({t.cargo_type for t in members}) == 1
        assert meta.request == sum(t.request for t in members)
        assert len(members) == 1 or meta.request <= cap

    graph = make_graph(GRAPHS[seed % 3], len(agents), seed=seed, p=0.3)
    result = run_consensus(agents, meta_tasks, graph, ctx)
    for agent, state in zip(agents, result.states):
        assert sum(meta_tasks[j].request for j in state.bundle) <= agent.capacity
        if not state.bundle:
            continue
        # releasing a suffix leaves the prefix scores untouched
        cut = len(state.bundle) // 2
        kept = release_from(state, state.bundle[cut], meta_tasks)
        assert kept.bundle == state.bundle[:cut]
        evaluation = evaluate_bundle(agent, [meta_tasks[j] for j in kept.bundle], ctx)
        assert evaluation is not None
        assert evaluation.scores == pytest.approx(tuple(kept.scores))

    allocation = AllocationService(AllocationOptions(seed=seed)).allocate(scenario)
    assert validate_queues(allocation.queues, allocation.tasks, agents) == []

    plan = plan_all(agents, allocation.queues, scenario.layout)
    assert find_conflicts(plan.paths) == []
    agents_by_id = {a.id: a for a in agents}
    for path in plan.paths:
        assert path_violations(path, agents_by_id[path.agent_id], scenario.layout) == []
