"""Every numeric default in one place.

=====================  ==========  =============================================
name                   value       meaning
=====================  ==========  =============================================
STEADY_TOL             1e-9        max |dx/dt| accepted as a steady state
T_MAX                  1e4         integration horizon
DT_INIT                1e-2        first step size
DT_MIN / DT_MAX        1e-10 / 10  step-size bounds
STEP_RTOL              0.02        step-doubling error / predicted displacement
OVERFLOW               1e12        divergence guard on |x|
FP_TOL                 1e-6        relative change of beta and x_eff at convergence
MAX_ITERS              100         fixed-point iteration cap
DAMPING                0.5         beta relaxation once updates oscillate
ROUND_MAX_SWEEPS       50          Round sweep cap
ROUND_CYCLE_WINDOW     8           Round cycle detection window (past d vectors)
DEAD_TOL               1e-6        state at or below this is the absorbing zero
DEGENERACY_FLOOR       1e-12       min |g(x*, x_eff)| for an identifiable degree
ACCURACY_THRESHOLD     0.05        |ln(est/true)| bound for an accurate vertex
RW_BUDGET_FACTOR       50          random-walk steps per walk, times m
RW_MAX_WALKS           32          random-walk restarts before shortfall
AUC_EXACT_LIMIT        1e7         |pos|*|neg| above which AUC is Monte Carlo
AUC_COMPARISONS        1e6         Monte Carlo AUC draws
=====================  ==========  =============================================

Dynamics parameter defaults (``DYNAMICS_PARAMS``) and ground-truth initial
states (``INITIAL_STATE``) follow.
"""

STEADY_TOL = 1e-9
T_MAX = 1e4
DT_INIT = 1e-2
DT_MIN = 1e-10
DT_MAX = 10.0
STEP_RTOL = 0.02
OVERFLOW = 1e12

FP_TOL = 1e-6
MAX_ITERS = 100
DAMPING = 0.5
ROUND_MAX_SWEEPS = 50
ROUND_CYCLE_WINDOW = 8
DEAD_TOL = 1e-6
DEGENERACY_FLOOR = 1e-12

ACCURACY_THRESHOLD = 0.05
RW_BUDGET_FACTOR = 50
RW_MAX_WALKS = 32
AUC_EXACT_LIMIT = 10**7
AUC_COMPARISONS = 10**6

DYNAMICS_PARAMS = {
    "ecological": {"B": 0.1, "K": 5.0, "C": 1.0, "D": 5.0, "E": 0.9, "H": 0.1},
    "regulatory": {"B": 1.0, "f_exp": 1.0, "R": 1.0, "h": 2.0},
    "epidemic": {"B": 1.0, "R": 1.0},
}

# ecological ground truth starts at K + 1 (above the Allee threshold); 6.0 matches K = 5
INITIAL_STATE = {"ecological": 6.0, "regulatory": 1.0, "epidemic": 0.5}
