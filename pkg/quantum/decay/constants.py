# This file contains constants used in the decay package.

# Small-window regime: gamma * eta must stay below this
GAMMA_ETA_MAX = 0.05

# Width of the Gaussian that stands in for tau * delta(t), as a fraction of tau
KERNEL_WIDTH_FRACTION = 1.0 / 20.0

# Kernel is truncated this many widths from the origin
KERNEL_CUTOFF_WIDTHS = 12.0

# homodyne_window keeps (sqrt(gamma) + |beta|)^2 * eta at this value
HOMODYNE_WINDOW_SCALE = 2e-3

# Uniform draws are pulled from each path's stream in blocks of this many windows
DRAW_BLOCK = 1024

# Trajectories whose full overlap series is kept in an ensemble run
KEPT_PATHS = 3

# Basis index of the excited state |psi_1>; the ground state |psi_0> is index 0
EXCITED = 1
GROUND = 0

TWO_LEVEL_LABELS = ("psi0", "psi1")
