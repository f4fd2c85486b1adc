"""Command-line entry point: gen, allocate, plan, run, bench and validate."""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from pydantic import ValidationError

from .allocation.baselines import AllocatorKind
from .allocation.service import AllocationOptions
from .bench.experiment import PRESETS, ExperimentMatrix, run_experiment, run_single
from .bench.generator import ScenarioConfig, generate
from .core.config import settings
from .core.exceptions import ConfigError, GcbhaError, PlanningError, ScenarioError
from .core.logging import setup_logging
from .data.loader import ArtifactStore, allocation_to_file, plan_to_file
from .geometry.estimators import Estimator
from .models.domain import GridPoint, validate_queues, validate_scenario
from .models.schemas import (ALLOCATION_FORMAT, PLAN_FORMAT, SCENARIO_FORMAT, AllocationFile, PlanFile,
                             ScenarioFile)
from .planning.lifelong import TimedPath, plan_all
from .planning.validation import find_conflicts, path_violations

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports usage problems as ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _on_off(value: str) -> bool:
    lowered = value.lower()
    if lowered not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on or off, got '{value}'")
    return lowered == "on"


def _add_allocation_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--alloc', type=AllocatorKind, default=AllocatorKind.GCBHA,
                        choices=list(AllocatorKind), metavar='{gcbha,cbga,central,ta-priority}',
                        help='Allocation algorithm')
    parser.add_argument('--group-request', type=int, default=settings.DEFAULT_GROUP_REQUEST,
                        help='Demand cap of one task group')
    parser.add_argument('--lambda', dest='lam', type=float, default=settings.DEFAULT_LAMBDA,
                        help='Time discount factor in (0, 1]')
    parser.add_argument('--estimator', type=Estimator, default=Estimator(settings.DEFAULT_ESTIMATOR),
                        choices=list(Estimator), metavar='{warehouse,euclidean,manhattan}',
                        help='Path cost estimator used while bidding')
    parser.add_argument('--graph', default=settings.DEFAULT_GRAPH,
                        help='Communication graph: full, line, ring or random:<p>')
    parser.add_argument('--seed', type=int, default=0, help='Seed for everything random')


def _add_windows_flag(parser: argparse.ArgumentParser):
    parser.add_argument('--enforce-windows', type=_on_off, default=settings.ENFORCE_WINDOWS,
                        metavar='{on,off}', help='Hold pickups until the task is released')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='gcbha', description='Heterogeneous warehouse task allocation and path planning')
    parser.add_argument('--log-level', default=settings.LOG_LEVEL, help='Logging level')
    parser.add_argument('--log-file', default=settings.LOG_FILE, help='Rotating log file; empty to disable')
    sub = parser.add_subparsers(dest='verb', required=True, parser_class=_Parser)

    gen = sub.add_parser('gen', help='Generate a random scenario')
    gen.add_argument('--config', type=Path, help='ScenarioConfig JSON file')
    gen.add_argument('--tasks', type=int, help='Number of tasks')
    gen.add_argument('--agents', type=int, help='Number of agents')
    gen.add_argument('--ignore-capacity', action='store_true',
                     help='Give every agent the whole demand and every task value 100')
    gen.add_argument('--seed', type=int, default=0, help='Scenario seed')
    gen.add_argument('-o', '--output', type=Path, required=True, help='Scenario JSON to write')

    allocate = sub.add_parser('allocate', help='Allocate the tasks of a scenario')
    allocate.add_argument('scenario', type=Path)
    _add_allocation_flags(allocate)
    allocate.add_argument('-o', '--output', type=Path, required=True, help='Allocation JSON to write')

    plan = sub.add_parser('plan', help='Plan collision-free paths for an allocation')
    plan.add_argument('allocation', type=Path)
    _add_windows_flag(plan)
    plan.add_argument('-o', '--output', type=Path, required=True, help='Output directory')

    run = sub.add_parser('run', help='Allocate and plan a scenario, then report metrics')
    run.add_argument('scenario', type=Path)
    _add_allocation_flags(run)
    _add_windows_flag(run)
    run.add_argument('-o', '--output', type=Path, required=True, help='Output directory')

    bench = sub.add_parser('bench', help='Run an experiment matrix')
    bench.add_argument('matrix', nargs='?', type=Path, help='ExperimentMatrix JSON file')
    bench.add_argument('--preset', choices=sorted(PRESETS), help='Built-in experiment matrix')
    bench.add_argument('--seed', type=int, default=0, help='Matrix seed for presets')
    bench.add_argument('--repetitions', type=int, help='Override repetitions of every cell')
    bench.add_argument('--jobs', type=int, default=settings.N_JOBS, help='Worker processes; -1 for all cores')
    bench.add_argument('--skip-slow', action='store_true', help='Skip cells flagged as slow')
    bench.add_argument('-o', '--output', type=Path, default=settings.OUTPUT_DIR / 'bench', help='Output directory')

    validate = sub.add_parser('validate', help='Check a scenario, allocation or plan file')
    validate.add_argument('artifact', type=Path)
    validate.add_argument('--allocation', type=Path, help='Allocation the plan was made from')
    return parser


def _options(args) -> AllocationOptions:
    return AllocationOptions(kind=args.alloc, request_group=args.group_request, lam=args.lam,
                             estimator=args.estimator, graph=args.graph, seed=args.seed)


def _load_valid_scenario(store: ArtifactStore, path: Path):
    scenario = store.load_scenario(path)
    violations = validate_scenario(scenario.agents, scenario.tasks, scenario.layout)
    if violations:
        raise ScenarioError(f"{path} is not a valid scenario: " + "; ".join(violations))
    return scenario


def _conflict_messages(paths: Sequence[TimedPath]) -> List[str]:
    return [c.describe() for c in find_conflicts(paths)]


def cmd_gen(args, store: ArtifactStore) -> int:
    config = ScenarioConfig()
    if args.config:
        config = store.read_model(args.config, ScenarioConfig)
    updates = {}
    if args.tasks is not None:
        updates['n_tasks'] = args.tasks
    if args.agents is not None:
        updates['n_agents'] = args.agents
    if args.ignore_capacity:
        updates['ignore_capacity'] = True
    config = ScenarioConfig.model_validate({**config.model_dump(), **updates})
    store.save_scenario(args.output, generate(config, args.seed))
    return 0


def cmd_allocate(args, store: ArtifactStore) -> int:
    scenario = _load_valid_scenario(store, args.scenario)
    options = _options(args)
    outcome = run_single(scenario, options, plan=False)
    store.write_model(args.output, allocation_to_file(scenario, options, outcome.allocation))
    return 0


def _write_plan(store: ArtifactStore, output: Path, plan, enforce_windows: bool) -> List[str]:
    conflicts = _conflict_messages(plan.paths)
    store.write_model(output / 'plan.json', plan_to_file(plan, enforce_windows, conflicts))
    store.export_paths(plan.paths, output / 'paths')
    return conflicts


def _plan_exit_code(plan, conflicts: List[str]) -> int:
    if conflicts:
        logger.error(f"Planned paths collide: {conflicts[:5]}")
        return PlanningError.exit_code
    if plan.failures:
        logger.error(f"{len(plan.failures)} targets could not be planned")
        return PlanningError.exit_code
    return 0


def cmd_plan(args, store: ArtifactStore) -> int:
    document = store.read_model(args.allocation, AllocationFile)
    scenario = document.scenario.to_domain()
    plan = plan_all(list(scenario.agents), document.domain_queues(), scenario.layout,
                    enforce_windows=args.enforce_windows)
    conflicts = _write_plan(store, args.output, plan, args.enforce_windows)
    store.write_json(args.output / 'timings.json', {'planning_time_s': plan.planning_time_s})
    return _plan_exit_code(plan, conflicts)


def cmd_run(args, store: ArtifactStore) -> int:
    scenario = _load_valid_scenario(store, args.scenario)
    options = _options(args)
    outcome = run_single(scenario, options, plan=True, enforce_windows=args.enforce_windows)
    output = args.output
    store.save_scenario(output / 'scenario.json', scenario)
    store.write_model(output / 'allocation.json', allocation_to_file(scenario, options, outcome.allocation))
    conflicts = _write_plan(store, output, outcome.plan, args.enforce_windows)
    store.write_metrics(output / 'metrics.csv', [outcome.metrics])
    store.write_timings(output / 'timings.json', [outcome.metrics])
    return _plan_exit_code(outcome.plan, conflicts)


def cmd_bench(args, store: ArtifactStore) -> int:
    if args.preset and args.matrix:
        raise ConfigError("Give either a matrix file or --preset, not both")
    if args.preset:
        matrix = PRESETS[args.preset](args.seed)
    elif args.matrix:
        matrix = store.read_model(args.matrix, ExperimentMatrix)
    else:
        raise ConfigError("bench needs a matrix file or --preset")
    if args.repetitions is not None:
        if args.repetitions < 1:
            raise ConfigError(f"--repetitions must be positive, got {args.repetitions}")
        cells = [cell.model_copy(update={'config': cell.config.model_copy(update={'repetitions': args.repetitions})})
                 for cell in matrix.cells]
        matrix = matrix.model_copy(update={'cells': cells})
    report = run_experiment(matrix, jobs=args.jobs, include_slow=not args.skip_slow)
    report.write(args.output)
    return 0


def cmd_validate(args, store: ArtifactStore) -> int:
    kind = json.loads(args.artifact.read_text()).get('format')
    if kind == SCENARIO_FORMAT:
        scenario = store.read_model(args.artifact, ScenarioFile).to_domain()
        violations = validate_scenario(scenario.agents, scenario.tasks, scenario.layout)
    elif kind == ALLOCATION_FORMAT:
        document = store.read_model(args.artifact, AllocationFile)
        scenario = document.scenario.to_domain()
        violations = validate_scenario(scenario.agents, scenario.tasks, scenario.layout)
        violations += validate_queues(document.domain_queues(), document.domain_tasks(), scenario.agents)
    elif kind == PLAN_FORMAT:
        document = store.read_model(args.artifact, PlanFile)
        paths = [TimedPath(p.agent_id, [(t, GridPoint(x, y)) for t, x, y in p.steps]) for p in document.paths]
        violations = _conflict_messages(paths)
        if args.allocation:
            scenario = store.read_model(args.allocation, AllocationFile).scenario.to_domain()
            agents = {a.id: a for a in scenario.agents}
            for path in paths:
                if path.agent_id not in agents:
                    violations.append(f"path of unknown agent {path.agent_id}")
                    continue
                violations += path_violations(path, agents[path.agent_id], scenario.layout)
    else:
        raise ScenarioError(f"{args.artifact} has unknown format '{kind}'")

    if violations:
        for message in violations:
            logger.error(message)
        raise ScenarioError(f"{args.artifact} has {len(violations)} violations; first: {violations[0]}")
    logger.info(f"{args.artifact} is valid")
    return 0


COMMANDS = {
    'gen': cmd_gen,
    'allocate': cmd_allocate,
    'plan': cmd_plan,
    'run': cmd_run,
    'bench': cmd_bench,
    'validate': cmd_validate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one verb; returns 0 on success, 1 on usage errors, 2 on data errors, 3 on consensus or planning failure."""
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(str(e), file=sys.stderr)
        return e.exit_code
    setup_logging(args.log_level, args.log_file or None)
    store = ArtifactStore()
    try:
        return COMMANDS[args.verb](args, store)
    except GcbhaError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        return e.exit_code
    except ValidationError as e:
        logger.error(f"Invalid input: {str(e)}")
        return 2
    except (OSError, ValueError) as e:
        logger.error(f"Error: {str(e)}")
        return 2
