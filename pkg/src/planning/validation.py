"""Post-hoc checks over executed paths."""
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from ..geometry.layout import WarehouseLayout
from ..models.domain import Agent, GridPoint
from .lifelong import TimedPath
from .search import steps_per_timestep


@dataclass(frozen=True)
class Conflict:
    kind: str
    timestep: int
    agents: Tuple[int, int]
    cell: GridPoint

    def describe(self) -> str:
        return (f"{self.kind} conflict between agents {self.agents[0]} and {self.agents[1]} "
                f"at ({self.cell.x},{self.cell.y}) t={self.timestep}")


def find_conflicts(paths: Sequence[TimedPath]) -> List[Conflict]:
    """Vertex collisions and edge swaps across all paths.

    Every path is extended with its final cell up to the last timestep of
    the longest path, so parked agents count as obstacles.
    """
    horizon = max((p.end_time for p in paths if p.steps), default=0)
    vertices: Dict[Tuple[int, int, int], int] = {}
    edges: Dict[Tuple[int, GridPoint, GridPoint], int] = {}
    conflicts: List[Conflict] = []

    def claim(t: int, cell: GridPoint, agent_id: int):
        owner = vertices.setdefault((t, cell.x, cell.y), agent_id)
        if owner != agent_id:
            conflicts.append(Conflict("vertex", t, (owner, agent_id), cell))

    for path in paths:
        if not path.steps:
            continue
        for t, cell in path.steps:
            claim(t, cell, path.agent_id)
        for t in range(path.end_time + 1, horizon + 1):
            claim(t, path.end_position, path.agent_id)
        for (_, p), (t, q) in zip(path.steps, path.steps[1:]):
            if p != q:
                edges[(t, p, q)] = path.agent_id

    for (t, p, q), agent_id in edges.items():
        other = edges.get((t, q, p))
        if other is not None and other != agent_id and agent_id < other:
            conflicts.append(Conflict("edge", t, (agent_id, other), p))
    return sorted(conflicts, key=lambda c: (c.timestep, c.kind, c.agents, c.cell))


def path_violations(path: TimedPath, agent: Agent, layout: WarehouseLayout) -> List[str]:
    """Motion rules of one path: unit moves, speed limit, aisle cells, monotone time."""
    violations: List[str] = []
    speed = steps_per_timestep(agent.velocity)
    moves_in_step: Dict[int, int] = {}
    for t, cell in path.steps:
        if not layout.is_aisle(cell):
            violations.append(f"agent {agent.id}: ({cell.x},{cell.y}) at t={t} is not an aisle cell")
    for (t0, p), (t1, q) in zip(path.steps, path.steps[1:]):
        if t1 < t0 or t1 > t0 + 1:
            violations.append(f"agent {agent.id}: timestep jumps from {t0} to {t1}")
            continue
        distance = abs(p.x - q.x) + abs(p.y - q.y)
        if distance > 1:
            violations.append(f"agent {agent.id}: non-unit move at t={t1}")
        if distance == 0 and t1 == t0:
            violations.append(f"agent {agent.id}: repeated entry at t={t1}")
        if distance:
            moves_in_step[t1] = moves_in_step.get(t1, 0) + 1
    for t, count in sorted(moves_in_step.items()):
        if count > speed:
            violations.append(f"agent {agent.id}: {count} moves at t={t} exceed speed {speed}")
    return violations
