"""Space-time claims of committed paths and parked agents."""
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Tuple

from ..models.domain import GridPoint

Cell = Tuple[int, int]


@dataclass(frozen=True)
class ParkingClaim:
    agent_id: int
    since: int


class ReservationTable:
    """Vertex, edge and parking reservations.

    A vertex claim ``(t, cell)`` holds the cell at timestep ``t``; an edge
    claim ``(t, p, q)`` records a unit move from ``p`` to ``q`` arriving at
    ``t``. A parking claim holds a cell from ``since`` onwards until the
    agent leaves.
    """

    def __init__(self):
        self._vertices: Dict[Tuple[int, int, int], int] = {}
        self._edges: Dict[Tuple[int, Cell, Cell], int] = {}
        self._parked: Dict[Cell, ParkingClaim] = {}
        self._last_use: Dict[Cell, Dict[int, int]] = {}
        self.latest_time = 0

    def is_free(self, t: int, cell: GridPoint, agent_id: int) -> bool:
        owner = self._vertices.get((t, cell.x, cell.y))
        if owner is not None and owner != agent_id:
            return False
        claim = self._parked.get((cell.x, cell.y))
        return claim is None or claim.agent_id == agent_id or t < claim.since

    def edge_free(self, t: int, p: GridPoint, q: GridPoint, agent_id: int) -> bool:
        """True unless another agent moves ``q -> p`` arriving at ``t``."""
        owner = self._edges.get((t, (q.x, q.y), (p.x, p.y)))
        return owner is None or owner == agent_id

    def reserve(self, t: int, cell: GridPoint, agent_id: int):
        self._vertices[(t, cell.x, cell.y)] = agent_id
        uses = self._last_use.setdefault((cell.x, cell.y), {})
        uses[agent_id] = max(t, uses.get(agent_id, t))
        self.latest_time = max(self.latest_time, t)

    def reserve_path(self, agent_id: int, steps: Iterable[Tuple[int, GridPoint]]):
        previous: Optional[GridPoint] = None
        for t, cell in steps:
            self.reserve(t, cell, agent_id)
            if previous is not None and previous != cell:
                self._edges[(t, (previous.x, previous.y), (cell.x, cell.y))] = agent_id
            previous = cell

    def park(self, agent_id: int, cell: GridPoint, since: int):
        self._parked[(cell.x, cell.y)] = ParkingClaim(agent_id, since)

    def unpark(self, agent_id: int, cell: GridPoint) -> Optional[ParkingClaim]:
        claim = self._parked.get((cell.x, cell.y))
        if claim is not None and claim.agent_id == agent_id:
            return self._parked.pop((cell.x, cell.y))
        return None

    def parked_by(self, cell: GridPoint) -> Optional[int]:
        claim = self._parked.get((cell.x, cell.y))
        return None if claim is None else claim.agent_id

    def can_park(self, cell: GridPoint, t: int, agent_id: int) -> bool:
        """The cell can be held by ``agent_id`` from ``t`` on without meeting a later claim."""
        claim = self._parked.get((cell.x, cell.y))
        if claim is not None and claim.agent_id != agent_id:
            return False
        uses = self._last_use.get((cell.x, cell.y), {})
        return all(last < t for owner, last in uses.items() if owner != agent_id)
