"""Simulated communication network and the round-based consensus driver."""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from ..core.exceptions import ConfigError, ConsensusError
from ..core.settings import EPS, NONE, ROUND_CAP_FACTOR
from ..models.domain import Agent, BidState, Task
from .auction import build_bundle, exchange
from .scoring import ScoringContext

logger = logging.getLogger(__name__)


class GraphKind(str, Enum):
    FULL = "full"
    LINE = "line"
    RING = "ring"
    RANDOM = "random"


@dataclass
class CommGraph:
    n: int
    adjacency: np.ndarray
    schedule: Optional[Tuple[np.ndarray, ...]] = None

    def __post_init__(self):
        for matrix in (self.adjacency,) + tuple(self.schedule or ()):
            if matrix.shape != (self.n, self.n):
                raise ConfigError(f"Adjacency must be {self.n}x{self.n}, got {matrix.shape}")
            if not np.array_equal(matrix, matrix.T):
                raise ConfigError("Adjacency matrix must be symmetric")
            if not np.all(np.diag(matrix)):
                raise ConfigError("Every agent must be adjacent to itself")

    def adjacency_at(self, round_index: int) -> np.ndarray:
        if self.schedule:
            return self.schedule[(round_index - 1) % len(self.schedule)]
        return self.adjacency

    def neighbors(self, agent: int, round_index: int = 1) -> List[int]:
        row = self.adjacency_at(round_index)[agent]
        return [k for k in np.nonzero(row)[0].tolist() if k != agent]

    def to_networkx(self) -> nx.Graph:
        graph = nx.from_numpy_array(self.adjacency.astype(int))
        graph.remove_edges_from(nx.selfloop_edges(graph))
        return graph

    def components(self) -> List[List[int]]:
        return sorted(sorted(c) for c in nx.connected_components(self.to_networkx()))

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def diameter(self) -> int:
        graph = self.to_networkx()
        return max(nx.diameter(graph.subgraph(c)) for c in nx.connected_components(graph))


def parse_graph_spec(spec: str) -> Tuple[GraphKind, float]:
    """Parse ``full``, ``line``, ``ring`` or ``random:<p>``."""
    name, _, param = spec.partition(":")
    try:
        kind = GraphKind(name.strip().lower())
    except ValueError:
        raise ConfigError(f"Unknown graph kind '{spec}'")
    p = 0.5
    if kind == GraphKind.RANDOM and param:
        try:
            p = float(param)
        except ValueError:
            raise ConfigError(f"Invalid edge probability in '{spec}'")
    if not 0 < p <= 1:
        raise ConfigError(f"Edge probability must lie in (0, 1], got {p}")
    return kind, p


def make_graph(kind: GraphKind, n: int, seed: Optional[int] = None, p: float = 0.5) -> CommGraph:
    kind = GraphKind(kind)
    if n < 1:
        raise ConfigError(f"Graph needs at least one agent, got {n}")
    if kind == GraphKind.FULL:
        graph = nx.complete_graph(n)
    elif kind == GraphKind.LINE:
        graph = nx.path_graph(n)
    elif kind == GraphKind.RING:
        graph = nx.cycle_graph(n) if n >= 3 else nx.path_graph(n)
    else:
        if not 0 < p <= 1:
            raise ConfigError(f"Edge probability must lie in (0, 1], got {p}")
        rng = np.random.default_rng(seed)
        attempts = 0
        while True:
            attempts += 1
            graph = nx.gnp_random_graph(n, p, seed=int(rng.integers(2 ** 31)))
            if nx.is_connected(graph):
                break
        logger.info(f"Random graph (n={n}, p={p}) connected after {attempts} draws")
    adjacency = nx.to_numpy_array(graph, nodelist=range(n), dtype=bool) | np.eye(n, dtype=bool)
    return CommGraph(n=n, adjacency=adjacency)


@dataclass
class ConsensusResult:
    states: List[BidState]
    rounds: int
    messages: int
    components: List[List[int]] = field(default_factory=list)
    conflicts: List[int] = field(default_factory=list)


def _agreed(states: Sequence[BidState], component: Sequence[int]) -> bool:
    ref = states[component[0]]
    return all(np.array_equal(states[i].z, ref.z) and np.allclose(states[i].y, ref.y, atol=EPS, rtol=0)
               for i in component[1:])


def _disagreements(states: Sequence[BidState], components: Sequence[Sequence[int]]) -> Dict[int, List[tuple]]:
    dump: Dict[int, List[tuple]] = {}
    for component in components:
        for j in range(len(states[component[0]].z)):
            beliefs = [(i, int(states[i].z[j]), float(states[i].y[j])) for i in component]
            if len({(z, round(y, 9)) for _, z, y in beliefs}) > 1:
                dump.setdefault(j, []).extend(beliefs)
    return dump


def _cross_component_claims(states: Sequence[BidState], components: Sequence[Sequence[int]]) -> List[int]:
    claims: Dict[int, set] = {}
    for c_index, component in enumerate(components):
        for i in component:
            for j in np.nonzero(states[i].z == i)[0].tolist():
                claims.setdefault(j, set()).add(c_index)
    return sorted(j for j, owners in claims.items() if len(owners) > 1)


def run_consensus(agents: Sequence[Agent], tasks: Sequence[Task], graph: CommGraph, ctx: ScoringContext,
                  max_rounds: Optional[int] = None) -> ConsensusResult:
    """Alternate bundle building and neighbour exchanges until the winners settle.

    A round rebuilds the bundles of agents whose state changed, snapshots
    every state and lets each agent apply its neighbours' snapshots in
    ascending id order. The loop stops once no (y, z) entry changed for
    ``diameter`` consecutive rounds and every component agrees.
    """
    n, m = len(agents), len(tasks)
    if graph.n != n:
        raise ConfigError(f"Graph has {graph.n} nodes for {n} agents")
    states = [BidState.initial(a.id, n, m) for a in agents]
    components = graph.components()
    quiet_needed = max(graph.diameter(), 1)
    cap = max_rounds or max(ROUND_CAP_FACTOR * n * m, quiet_needed + 2)
    dirty = [True] * n
    quiet = 0
    last_change = 0
    messages = 0

    for round_index in range(1, cap + 1):
        changed = False
        for agent in agents:
            if not dirty[agent.id]:
                continue
            before = states[agent.id]
            states[agent.id] = build_bundle(agent, before, tasks, ctx)
            if states[agent.id].bundle != before.bundle:
                changed = True
        dirty = [False] * n

        snapshots = [s.copy() for s in states]
        for agent in agents:
            state = states[agent.id]
            for k in graph.neighbors(agent.id, round_index):
                state, modified = exchange(state, snapshots[k], k, round_index, tasks)
                messages += 1
                if modified:
                    dirty[agent.id] = True
                    changed = True
            states[agent.id] = state

        if changed:
            last_change = round_index
            quiet = 0
        else:
            quiet += 1
        if quiet >= quiet_needed and all(_agreed(states, c) for c in components):
            conflicts = _cross_component_claims(states, components)
            if conflicts:
                logger.warning(f"Disconnected network: tasks {conflicts} are claimed in several components")
            logger.info(f"Consensus reached after {last_change} rounds and {messages} messages")
            return ConsensusResult(states, last_change, messages, components, conflicts)

    dump = _disagreements(states, components)
    logger.error(f"Consensus did not converge within {cap} rounds; {len(dump)} tasks disputed")
    raise ConsensusError(f"No consensus after {cap} rounds on tasks {sorted(dump)}", dump)
