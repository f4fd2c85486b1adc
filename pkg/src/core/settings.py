
# Warehouse defaults
MAP_WIDTH = 80
MAP_HEIGHT = 80
SHELF_LENGTH = 10
SHELF_DEPTH = 2
SHELF_GAP_W = 2
SHELF_GAP_H = 2
ORIGIN_X = 6
ORIGIN_Y = 2

# Fleet and task defaults
SMALL_SPEED = 1.0
LARGE_SPEED = 2.0
SMALL_CAPACITY = 100
LARGE_CAPACITY = 200
LARGE_AGENT_FRACTION = 0.1
REQUEST_RANGE = (10, 50)
LARGE_REQUEST_RANGE = (201, 300)
LARGE_TASK_FRACTION = 0.1
SPECIAL_TASK_FRACTION = 0.1
VALUE_RATIO = 0.1
UNIFORM_TASK_VALUE = 100.0
RELEASE_HORIZON = 100.0
WINDOW_RANGE = (500.0, 1000.0)
REPETITIONS = 10

# Auction settings
LAMBDA = 0.1
GROUP_REQUEST = 50
EPS = 1e-9
NONE = -1
ROUND_CAP_FACTOR = 4

# Planner settings
HORIZON_FACTOR = 4
PLAN_RETRY_CAP = 10
MAX_EXPANSIONS = 200_000

# Seed streams
SCENARIO_STREAM = 0
GRAPH_STREAM = 1
