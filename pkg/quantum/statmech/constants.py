# This file contains constants used in the statmech package.

# Demonstration temperatures, in units of J / k_B, below and above the ordering transition
LOW_TEMPERATURE = 0.5
HIGH_TEMPERATURE = 5.0

# Neighbours on the periodic square lattice
COORDINATION = 4

# Default number of blocks for blocked error bars
ERROR_BLOCKS = 20

# Largest microcanonical dimension handled by dense diagonalization
MAX_MC_DIMENSION = 2000

# Bell process over sectors: dt = DT_FRACTION / ||H||
DT_FRACTION = 0.01

# Default number of jump paths per ergodicity check
ERGODICITY_PATHS = 20

# Bootstrap resamples for the occupation-fraction variance
BOOTSTRAP_RESAMPLES = 200
