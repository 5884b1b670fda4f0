"""
qcore/constants.py

Behavior:
    - Numerical tolerances shared by every package. Keep them here only.
"""

# Algebraic identities (completeness, reconstruction, probability sums)
ALGEBRAIC_TOL = 1e-10

# Checks that involve quadrature over phase space
QUADRATURE_TOL = 1e-6

# Norm after normalize(), unitarity of a single step
NORM_TOL = 1e-12

# Entrywise |A - A^dagger| allowed for a hermitian operator (scaled by max|A| when that exceeds 1)
HERMITIAN_TOL = 1e-12

# Born probabilities below -NEGATIVE_PROB_TOL are a POVM violation; above it they are clamped
NEGATIVE_PROB_TOL = 1e-12

# Branch norms below this are treated as zero
ZERO_NORM_TOL = 1e-14

# Number of random probe states used by positivity checks
POSITIVITY_PROBES = 64
