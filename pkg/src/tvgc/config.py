"""Default settings shared by the library and the command line.

Three months is pinned to 90 calendar days; with daily data that is 90
observations.
"""

MAX_LAG = 12
MIN_WINDOW = 90
CONTROL_WINDOW = 90
REPLICATIONS = 499
SIZE = 0.05
MAX_GAP_DAYS = 3
MIN_DURATION = 1

# Condition-number ceiling for equilibrated normal-equation and Wald matrices.
CONDITION_LIMIT = 1e12

# |value| above this in a simulated path marks the replication as explosive.
EXPLOSIVE_BOUND = 1e8
MAX_DISCARD_FRACTION = 0.10

DEFAULT_SEED = 20200211
SEED_ENV = "TVGC_SEED"

ALGORITHMS = ("forward", "rolling", "recursive-evolving")
SCHEMES = ("iid-residual", "wild-rademacher")
