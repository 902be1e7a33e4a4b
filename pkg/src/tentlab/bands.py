"""Frozen tolerances and corpus bands used by the acceptance suite.

Corpus constants were measured on calibration seeds 1000-1004 by
``scripts/calibrate_bands.py``; the acceptance suite evaluates on disjoint seeds.
An upper band is 1.5x the calibrated maximum unless stated otherwise.
"""

CALIBRATION_SEEDS = tuple(range(1000, 1005))
TEST_SEEDS = (0, 1)
HEADROOM = 1.5

# normalizers and reproducing formula
NORMALIZER_RTOL = 1e-8
CALDERON_RTOL = 1e-3
CALDERON_J = 128

# tent atoms
RECONSTRUCTION_ATOL = 1e-12
ATOM_SLACK = 0.1
POWER_IDENTITY_RTOL = 1e-10
# max Lambda / ||F||_{T_w} on a 50-field corpus, compared within +-20%
LAMBDA_RATIO_REF = {"power0.8": 125.9, "power_log": 1441.8}
LAMBDA_RATIO_TOL = 0.2

# apertures: (1/2, 2) ratio of the Orlicz area integrals
APERTURE_BAND = (1.0, 3.75)

# molecules
MOLECULE_MULTIPLE = 2.0
MOLECULE_SLACK = 0.1
MOLECULE_RESIDUAL = 5e-3
MOLECULE_BOUND_MAX = 1.25
MOLECULE_BOUND_PAIRS = 100
MOLECULE_BOUND_SPAN = 1e6

# Gaffney fitted exponents
GAFFNEY_BETA = {"heat": (0.8, 1.2), "resolvent": (0.35, 0.65)}
GAFFNEY_R2 = 0.9
GAFFNEY_N = 128

RIESZ_ORACLE_ATOL = 1e-8

# classical atoms
CLASSICAL_RESIDUAL = 1e-10
CLASSICAL_MEAN = 1e-12
CLASSICAL_RATIO_MAX = {"p0.8": 9.0, "p1.0": 5.75}
EMBEDDING_RATIO_MAX = 8.25

# BMO family
JN_RATIO_MAX = 1.75
RESOLVENT_OVER_SEMIGROUP = (0.5, 1.3)
CARLESON_OVER_BMO2 = (0.05, 0.15)

# duality
DUALITY_RTOL = 1e-3
DUALITY_C_MAX = 1.25

# fractional integration
FRAC_SPREAD = 0.25
FRAC_INDEX_TOL = 0.02
FRAC_SEEDS = tuple(range(20))

# square and maximal functions
SL_L2_BAND = (0.45, 0.55)
GL_L2 = 0.5 ** 1.5
GL_L2_RTOL = 5e-3
NHALF_OVER_R_MAX = 1.5
RIESZ_HARDY_MAX = 2.7
GFUN_HARDY_MAX = 1.0
OFFDIAG_EXPONENT_FRACTION = 0.8
