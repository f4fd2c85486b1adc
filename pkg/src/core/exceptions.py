"""Error hierarchy. Each error carries the process exit code the CLI reports."""
from typing import Dict, List, Optional


class GcbhaError(Exception):
    exit_code = 2


class ConfigError(GcbhaError):
    """Bad flags or parameters."""
    exit_code = 1


class ScenarioError(GcbhaError):
    """Malformed or inconsistent scenario data."""
    exit_code = 2


class GeometryError(ScenarioError):
    """A point is outside the grid or inside a shelf."""


class AllocationError(GcbhaError):
    exit_code = 2


class ConsensusError(GcbhaError):
    exit_code = 3

    def __init__(self, message: str, disagreements: Optional[Dict[int, List[tuple]]] = None):
        super().__init__(message)
        self.disagreements = disagreements or {}


class PlanningError(GcbhaError):
    exit_code = 3
