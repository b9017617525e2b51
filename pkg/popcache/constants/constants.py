# numerical tolerances
NORMALIZATION_TOLERANCE = 1E-12 # |sum(p) - 1|
PREFIX_BITS = 62 # popularity prefix sums are integers in units of 2^-PREFIX_BITS
BUDGET_TOLERANCE = 1E-9 # relative, on the memory budget
CLAMP_TOLERANCE = 1E-9 # relative, on 1 <= L_q <= U_q
STATIONARITY_TOLERANCE = 1E-8 # relative spread of pi_q/(L_q^2 w_q) on chi
DELAY_RELATIVE_TOLERANCE = 1E-12 # strict improvement between Q values
DOMINANCE_TOLERANCE = 1E-9 # relative, consecutive vs general segmentations
INTEGER_SNAP_TOLERANCE = 1E-9 # redundancies this close to an integer are integers
GAMMA_MAX_DENOMINATOR = 10**6 # cache fractions are read as rationals

# search
DEFAULT_Q_MAX = 8
PLATEAU_PATIENCE = 2 # non-improving Q values before the scan stops

# placement
PLACEMENT_MAX_PIECES = 1000 # equal pieces per file when the transmitter capacity is fractional

# exhaustive enumeration limits
ORACLE_MAX_N = 20
GENERAL_ENUMERATION_MAX_N = 12

# memory sharing worst case, reached at L = 1.5
MEMORY_SHARING_MAX_LOSS = 1.125

# allocation labels
BROADCAST = "broadcast"
UNIFORM = "uniform"
PHI = "phi" # clamped at 1
PSI = "psi" # clamped at U_q
CHI = "chi" # interior
FREE = "free" # user supplied, not solved

# reference scenarios
SCENARIO_1 = {
    "N": 6000,
    "K": [300, 500, 1000, 2000],
    "K_T": 50,
    "gamma": 0.1,
    "gamma_T": 0.1,
    "F": 100000,
    "alpha": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
}

SCENARIO_2 = {
    "N": 3000,
    "K": [500, 1000, 2000],
    "K_T": 20,
    "gamma": 0.02,
    "gamma_T": 0.1,
    "F": 1000000,
    "alpha": [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0],
}

SCENARIOS = {1: SCENARIO_1, 2: SCENARIO_2}
