"""Decentralised group auction: grouping, consensus, then unpacking per agent."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

from ..models.domain import Agent, OrderedTargetQueue, Task
from .auction import unpack_and_sort
from .netsim import CommGraph, run_consensus
from .scoring import ScoringContext
from .taskprep import GroupingConfig, group

logger = logging.getLogger(__name__)


@dataclass
class ConsensusAllocation:
    queues: List[OrderedTargetQueue]
    rounds: int
    messages: int
    n_items: int
    conflicts: List[int] = field(default_factory=list)


def consensus_allocate(agents: Sequence[Agent], meta_tasks: Sequence[Task], group_list: Dict[int, List[Task]],
                       graph: CommGraph, ctx: ScoringContext) -> ConsensusAllocation:
    """Auction the given items and unpack every agent's winnings into a target queue."""
    result = run_consensus(agents, meta_tasks, graph, ctx)
    queues = [unpack_and_sort(result.states[a.id].bundle, group_list, a, ctx) for a in agents]
    return ConsensusAllocation(queues, result.rounds, result.messages, len(meta_tasks), result.conflicts)


def gcbha_allocate(agents: Sequence[Agent], tasks: Sequence[Task], graph: CommGraph, ctx: ScoringContext,
                   grouping: GroupingConfig) -> ConsensusAllocation:
    meta_tasks, group_list = group(tasks, grouping, ctx.layout, ctx.cost)
    return consensus_allocate(agents, meta_tasks, group_list, graph, ctx)
