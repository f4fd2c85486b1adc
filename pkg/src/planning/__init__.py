from .lifelong import LifelongPlanner, PlanResult, TimedPath, plan_all
from .reservation import ReservationTable
from .validation import find_conflicts, path_violations

__all__ = [
    "LifelongPlanner",
    "PlanResult",
    "ReservationTable",
    "TimedPath",
    "find_conflicts",
    "path_violations",
    "plan_all",
]
