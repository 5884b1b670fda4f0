"""
modal/constants.py

Behavior:
    - Thresholds of the Bell-rate jump process.
"""

# Local states with p_i below this have their exit rates zeroed and flagged
OCCUPATION_FLOOR = 1e-14

# Completeness required of a cut's effects
CUT_COMPLETENESS_TOL = 1e-8

# Default tolerance for flagging |p_i - p_j| as degenerate
DEGENERATE_TOL = 1e-9

# F is nudged by this amount when the two pointer weights coincide
DEGENERACY_NUDGE = 1e-9

# Per-step jump probability above which first-order sampling is only warned about
JUMP_PROB_WARN = 0.1

# Per-step jump probability at which first-order sampling breaks down
JUMP_PROB_MAX = 1.0
