"""Bundle construction, pairwise consensus and unpacking of won groups."""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..core.exceptions import AllocationError, ScenarioError
from ..core.settings import EPS, NONE
from ..models.domain import Agent, BidState, OrderedTargetQueue, Target, TargetKind, Task
from .scoring import ScoringContext, best_insertion, evaluate_targets

logger = logging.getLogger(__name__)


class ActionKind(str, Enum):
    UPDATE = "update"
    RESET = "reset"
    LEAVE = "leave"


@dataclass(frozen=True)
class ConsensusAction:
    kind: ActionKind
    task_index: int


def beats_winner(marginal: float, agent_id: int, winning_bid: float, winner: int) -> bool:
    """Whether a bid would survive consensus against the known winner (ties within EPS go to the lower id)."""
    if winner == NONE:
        return marginal > winning_bid
    if marginal > winning_bid + EPS:
        return True
    return abs(marginal - winning_bid) <= EPS and agent_id < winner


def build_bundle(agent: Agent, bid_state: BidState, tasks: Sequence[Task], ctx: ScoringContext) -> BidState:
    """Greedily add the task with the largest marginal score until no bid beats the known winner.

    Marginals within EPS of each other count as equal; the lower task id is taken first.
    """
    state = bid_state.copy()
    while True:
        remaining = agent.capacity - state.bundle_request
        bundle_tasks = [tasks[j] for j in state.bundle]
        best = None
        for task in tasks:
            j = task.id
            if state.x[j] or task.cargo_type != agent.cargo_type or task.request > remaining:
                continue
            insertion = best_insertion(agent, task, bundle_tasks, ctx)
            if insertion is None or not beats_winner(insertion.marginal, agent.id, float(state.y[j]), int(state.z[j])):
                continue
            if best is None or insertion.marginal > best[1].marginal + EPS:
                best = (j, insertion)
        if best is None:
            return state

        j, insertion = best
        state.bundle.insert(insertion.index, j)
        state.scores = list(insertion.scores)
        state.x[j] = 1
        state.y[j] = insertion.marginal
        state.z[j] = agent.id
        state.bundle_request += tasks[j].request


def consensus_action(task_index: int, receiver: BidState, sender: BidState, sender_id: int) -> ConsensusAction:
    """Decide what the receiver does with its entry for one task after hearing from the sender.

    Equal bids (within EPS) go to the lower agent id. Among the conditional
    actions for a third-party disagreement the first satisfied one applies.
    """
    j, i, k = task_index, receiver.agent_id, sender_id
    zk, zi = int(sender.z[j]), int(receiver.z[j])
    yk, yi = float(sender.y[j]), float(receiver.y[j])
    tk, ti = sender.t, receiver.t

    def newer(m: int) -> bool:
        return tk[m] > ti[m]

    def outbids(winner: int, incumbent: int) -> bool:
        return yk > yi + EPS or (abs(yk - yi) <= EPS and winner < incumbent)

    update, reset, leave = (ConsensusAction(kind, j) for kind in ActionKind)

    if zk == k:
        if zi == i:
            return update if outbids(k, i) else leave
        if zi == k or zi == NONE:
            return update
        return update if newer(zi) or outbids(k, zi) else leave

    if zk == i:
        if zi == k:
            return reset
        if zi == i or zi == NONE:
            return leave
        return reset if newer(zi) else leave

    if zk == NONE:
        if zi == k:
            return update
        if zi == i or zi == NONE:
            return leave
        return update if newer(zi) else leave

    m = zk
    if zi == i:
        return update if newer(m) and outbids(m, i) else leave
    if zi == k:
        return update if newer(m) else reset
    if zi == m or zi == NONE:
        return update if newer(m) else leave
    n = zi
    if newer(m) and newer(n):
        return update
    if newer(m) and outbids(m, n):
        return update
    if newer(n) and ti[m] > tk[m]:
        return reset
    if newer(m):
        return update
    return leave


def _check_winners(state: BidState, label: str):
    n_agents = len(state.t)
    bad = state.z[(state.z != NONE) & ((state.z < 0) | (state.z >= n_agents))]
    if bad.size:
        raise ScenarioError(f"{label} names unknown winning agents {sorted(set(bad.tolist()))}")


def resolve(receiver_state: BidState, sender_state: BidState, sender_id: int,
            now: int) -> Tuple[BidState, List[int]]:
    """Apply the consensus rules for every task and merge timestamps.

    Returns the updated receiver state and the task indices whose winning bid
    or winning agent changed.
    """
    _check_winners(sender_state, f"message from agent {sender_id}")
    state = receiver_state.copy()
    differs = np.nonzero((sender_state.z != receiver_state.z)
                         | (np.abs(sender_state.y - receiver_state.y) > EPS))[0]
    modified = []
    for j in differs.tolist():
        action = consensus_action(j, receiver_state, sender_state, sender_id)
        if action.kind == ActionKind.UPDATE:
            state.y[j] = sender_state.y[j]
            state.z[j] = sender_state.z[j]
        elif action.kind == ActionKind.RESET:
            state.y[j] = 0.0
            state.z[j] = NONE
        if state.z[j] != receiver_state.z[j] or state.y[j] != receiver_state.y[j]:
            modified.append(j)

    state.t = np.maximum(state.t, sender_state.t)
    state.t[sender_id] = now
    state.t[state.agent_id] = now
    return state, modified


def release_from(bid_state: BidState, task_index: int, tasks: Sequence[Task]) -> BidState:
    """Drop ``task_index`` and every later bundle entry; clear claims this agent still holds on them."""
    state = bid_state.copy()
    if task_index not in state.bundle:
        return state
    position = state.bundle.index(task_index)
    removed = state.bundle[position:]
    state.bundle = state.bundle[:position]
    state.scores = state.scores[:position]
    for j in removed:
        state.x[j] = 0
        if state.z[j] == state.agent_id:
            state.y[j] = 0.0
            state.z[j] = NONE
    state.bundle_request = sum(tasks[j].request for j in state.bundle)
    return state


def exchange(receiver_state: BidState, sender_state: BidState, sender_id: int, now: int,
             tasks: Sequence[Task]) -> Tuple[BidState, List[int]]:
    """Resolve one message, then release the bundle from its first entry claimed by someone else."""
    state, _ = resolve(receiver_state, sender_state, sender_id, now)
    lost = [j for j in state.bundle if state.z[j] != state.agent_id]
    if lost:
        state = release_from(state, lost[0], tasks)
    modified = np.nonzero((state.z != receiver_state.z) | (state.y != receiver_state.y))[0]
    return state, modified.tolist()


def _order_key(targets: Sequence[Target]) -> Tuple[Tuple[int, int], ...]:
    return tuple((t.task_id, 0 if t.kind == TargetKind.PICKUP else 1) for t in targets)


def unpack_and_sort(bundle: Sequence[int], group_list: Dict[int, List[Task]], agent: Agent,
                    ctx: ScoringContext) -> OrderedTargetQueue:
    """Expand won groups into their tasks and order the pickup/delivery targets.

    Each iteration inserts the remaining target, at the index, that gives the
    highest summed position score; a delivery can only follow its pickup.
    Equal scores resolve to the lexicographically smallest (task id, kind) order.
    """
    unknown = [gid for gid in bundle if gid not in group_list]
    if unknown:
        raise AllocationError(f"Agent {agent.id} bundle references unknown groups {unknown}")

    members = [task for gid in bundle for task in group_list[gid]]
    values = {t.id: t.value for t in members}
    pending = [Target.pickup(t) for t in members] + [Target.delivery(t) for t in members]
    queue: List[Target] = []
    while pending:
        best = None
        for target in pending:
            low = 0
            if target.kind == TargetKind.DELIVERY:
                placed = [idx for idx, q in enumerate(queue)
                          if q.task_id == target.task_id and q.kind == TargetKind.PICKUP]
                if not placed:
                    continue
                low = placed[0] + 1
            for index in range(low, len(queue) + 1):
                candidate = queue[:index] + [target] + queue[index:]
                total = evaluate_targets(agent, candidate, values, ctx)
                key = _order_key(candidate)
                if best is None or total > best[0] + EPS \
                        or (abs(total - best[0]) <= EPS and key < best[1]):
                    best = (total, key, target, candidate)
        _, _, chosen, queue = best
        pending.remove(chosen)
    return OrderedTargetQueue(agent.id, tuple(queue))
