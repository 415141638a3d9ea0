"""Numerical tolerances used across the package.

All functions that check an identity take the relevant value as a keyword
argument defaulting to the constant defined here.
"""

# density matrices
HERMITIAN_TOL = 1e-12  # relative to the Frobenius norm
PSD_TOL = 1e-12
TRACE_TOL = 1e-12
PROB_SUM_TOL = 1e-12

# operator functions
SQRT_HERMITIAN_TOL = 1e-10  # relative
POSITIVITY_FLOOR = 1e-12  # relative to the largest eigenvalue
COMPLETENESS_TOL = 1e-10
BASIS_TOL = 1e-12

# bridge
SINKHORN_TOL = 1e-12
SINKHORN_MAX_ITER = 10_000
SYSTEM_TOL = 1e-10
BRIDGING_TOL = 1e-9
PRIOR_FLOOR = 1e-12

# reversal
EQUIVALENCE_OP_TOL = 1e-9
EQUIVALENCE_STATE_TOL = 1e-10
REVERSE_CROSSCHECK_TOL = 1e-9

# inference
DISINTEGRATION_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
GENERALIZED_NORM_TOL = 1e-8
QUADRATURE_TOL = 1e-6
QUADRATURE_NODES = 2001
QUADRATURE_SIGMAS = 8.0
OVERLAP_FLOOR = 1e-12
WEAK_AGREEMENT_TOL = 1e-9
TRACE_FORM_TOL = 1e-8

# tau grids avoid the endpoints where a segment collapses to the identity
TAU_EDGE = 1e-8
