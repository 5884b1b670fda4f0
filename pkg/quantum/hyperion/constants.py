# This file contains constants used in the hyperion package.

TWO_PI = 6.283185307179586

# Kepler solver
KEPLER_MAX_ITER = 50
KEPLER_TOL = 1e-12

# Classical integration: fastest libration must be resolved by dt <= period / MIN_STEPS_PER_ORBIT
MIN_STEPS_PER_ORBIT = 500

# Tangent vectors are renormalized after this many integration steps
RENORM_EVERY = 10

# Initial separation of the two-trajectory divergence estimate
DIVERGENCE_SEPARATION = 1e-8

# Truncation adequacy: tail mass outside |m| > TAIL_FRACTION * M
TAIL_FRACTION = 0.9
TAIL_MASS_MAX = 1e-8
# evolve_rotor stops when the edge mass grows past this
EVOLUTION_TAIL_MAX = 1e-6
# coherent states must be centered within this fraction of the truncation
CENTER_FRACTION = 0.8

# Truncation margin, in momentum widths, around the configured momentum window
TRUNCATION_MARGIN = 12.0

# Cells must be at least this many coherence lengths across
MIN_CUT_RATIO = 10.0

# Retained block: basis states at least this many momentum widths from the grid's edges
RETAINED_MARGIN = 6.0

# Ehrenfest sweep
EHRENFEST_THRESHOLD = 0.5
EHRENFEST_MOMENTUM_WINDOW = 4.0
EHRENFEST_SAMPLES_PER_UNIT = 20

# SI adapter
SECONDS_PER_DAY = 86400.0
SECONDS_PER_YEAR = 365.25 * SECONDS_PER_DAY

# Closed-form cell operators use the continuum coherent-state normalization;
# its lattice correction 2 exp(-pi^2 / (2 dx^2)) stays below 1e-6 up to this width
MAX_POVM_DELTA_X = 0.5
