import sys
from pathlib import Path

import pytest

# Make the repository root importable
root_path = str(Path(__file__).parent.parent)
if root_path not in sys.path:
    sys.path.append(root_path)

from src.allocation.scoring import ScoreParams, ScoringContext
from src.geometry.estimators import Estimator
from src.geometry.layout import WarehouseLayout
from src.models.domain import GridPoint


@pytest.fixture
def open_layout():
    """20x20 grid without shelves."""
    return WarehouseLayout(width=20, height=20, origin=GridPoint(100, 100))


@pytest.fixture
def small_layout():
    """30x20 warehouse with two shelf columns and four shelf rows."""
    return WarehouseLayout(width=30, height=20, shelf_length_l=10, shelf_gap_w=2, shelf_gap_h=2,
                           origin=GridPoint(3, 2), shelf_depth=2)


@pytest.fixture
def manhattan_ctx(open_layout):
    return ScoringContext(ScoreParams(lam=0.1, estimator=Estimator.MANHATTAN), open_layout)
