"""Numerical defaults shared across modules.

Everything tunable lives here so the CLI config layer can override it in one
place.
"""

# quadrature
GAUSS_ORDER = 8
ADAPTIVE_TOL = 1e-10
ADAPTIVE_MAX_PANELS = 4000
MC_SAMPLES = 50_000
MC_MIN_SAMPLES = 100
MC_MAX_EXACT_DIM = 3  # monte-carlo only above this dimension unless forced

# zero scanning
SCAN_GRID = 2048
MIN_SCAN_GRID = 128
DEADBAND_REL = 1e-12
BISECT_REL_WIDTH = 1e-10
H_GRID_POINTS = 16

# extrema oracles
EQUAL_VALUE_TOL = 1e-9
MIN_ORACLE_GRID = 64

# critical scale search
H0_REL_TOL = 1e-3
H0_SWEEP_POINTS = 200

# continuation
RHO = 0.5
H_MIN_FRACTION = 1e-3  # of the shortest box edge

# descent
ARMIJO_C = 1e-4
STEP0 = 1.0
MAX_BACKTRACKS = 60
MAX_MOVE_FRACTION = 0.1
STAGE_MAX_ITERS = 500
GRAD_TOL = 1e-8

# line decomposition
LINE_MAX = 1000
LINE_MOVE_TOL = 1e-9
LINE_STILL_COUNT = 3
LINE_SCAN_POINTS = 64

# benchmarking
BENCH_RUNS = 20
SUCCESS_TOL = 1e-3
