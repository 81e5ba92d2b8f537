# ---- Lanczos approximation (g=7, n=9) ----
LANCZOS_G = 7.0
LANCZOS_COEF = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
)
POLE_GUARD = 1e-8

# ---- Model ----
C_AGREE_RTOL   = 1e-8     # quadrature vs closed-form c
C_POLE_BAND    = 1e-3     # closed form skipped this close to alpha in {0, 1/2} or 2*alpha == gamma

# ---- Simulation ----
JITTER_LADDER  = (1e-12, 1e-10, 1e-8)
SHOT_WINDOW_TOL = 0.01    # relative variance change allowed when the window doubles

# ---- Wiener-Hopf ----
WH_MIN_NODES   = 16
WH_COND_MAX    = 1e12

# ---- Bergomi / VVIX table ----
TABLE1_H     = 0.05
TABLE1_T     = 1.0
TABLE1_DELTA = 1.0 / 12.0
TABLE1_ETA   = 2.0
TABLE1_TIMES = {"a": 0.5, "b": 0.75}
TABLE1_ROWS  = ((-0.45, 0.0), (-0.4, 0.1), (-0.325, 0.25), (-0.2, 0.5), (0.0, 0.9), (0.03, 0.96))

# published (f, v) pairs
TABLE1_PUBLISHED = {
    "a": ((0.2413, 0.2251), (0.3930, 0.3666), (0.4856, 0.4531), (0.4043, 0.3772), (0.0718, 0.0670), (0.0272, 0.0254)),
    "b": ((0.1936, 0.2100), (0.3008, 0.3421), (0.3434, 0.4227), (0.2455, 0.3520), (0.0326, 0.0625), (0.0118, 0.0237)),
}
SURFACE_GAMMAS = tuple(round(0.01 * k, 2) for k in range(100))   # 0.00 .. 0.99
MC_SIGMA_POINTS = 33      # trapezoid nodes over [T, T+delta]

# ---- CLI ----
EXIT_OK        = 0
EXIT_FAILURE   = 1
EXIT_DOMAIN    = 2
EXIT_NUMERICAL = 3
