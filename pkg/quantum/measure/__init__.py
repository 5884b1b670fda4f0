from .devices import (
    POLARIZATION_LABELS,
    decohered_interference,
    environment_overlap,
    log_environment_overlap,
    noisy_splitter_ops,
    polarization_state,
    polarizer_ops,
)
from .reduction import (
    PointerRegisterState,
    dilate,
    evolve_global,
    pointer_branch_probs,
    product_factor,
    reduce_global,
    schmidt_coefficients,
    system_branch,
)
from .trajectory import (
    BranchTag,
    MeasurementSchedule,
    MeasurementStep,
    TrajectoryRecord,
    UnitarySegment,
    born_probabilities,
    branch_weight,
    condition,
    enumerate_histories,
    run_trajectory,
    sample_outcome,
    unnormalized_branch,
)
