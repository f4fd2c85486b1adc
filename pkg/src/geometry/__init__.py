from .estimators import Estimator, euclidean_cost, make_cost_fn, manhattan_cost, warehouse_cost
from .layout import Orientation, WarehouseLayout
from .oracle import UNREACHABLE, bfs_distances, bfs_oracle
