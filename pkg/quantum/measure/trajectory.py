"""
measure/trajectory.py

Behavior:
    - Born probabilities, inverse-CDF outcome sampling and conditioned updates.
    - MeasurementSchedule alternates unitary segments and Kraus measurements.
    - run_trajectory records outcomes, per-step probabilities and conditioned
      states; enumerate_histories gives the exhaustive joint distribution.
    - TrajectoryRecord serializes to JSON and to CSV rows.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from quantum.qcore import (
    ImpossibleOutcome,
    InvalidInputError,
    OperatorMatrix,
    PovmKind,
    PovmSet,
    RngStream,
    StateVector,
    check_povm,
    evolve_step,
)
from quantum.qcore.constants import ALGEBRAIC_TOL, NEGATIVE_PROB_TOL, ZERO_NORM_TOL

logger = logging.getLogger(__name__)

CDF_TOL = 1e-8


def born_probabilities(ops: PovmSet, psi: StateVector, tol: Optional[float] = ALGEBRAIC_TOL) -> np.ndarray:
    """
    Outcome probabilities of a measurement on a normalized state.

    Tiny negatives (above -1e-12) are clamped to zero and the vector is
    renormalized once.

    :param ops: effects or Kraus operators
    :param psi: normalized state
    :param tol: allowed deviation of the raw sum from 1; None skips the check
        (finite-window Kraus pairs that are complete only to O(eta^2))
    :return: probability vector in element order
    """
    if psi.basis_dim != ops.dim:
        raise InvalidInputError(f"state dim {psi.basis_dim} vs POVM dim {ops.dim}")
    if not psi.is_normalized(ALGEBRAIC_TOL):
        raise InvalidInputError(f"Born rule needs a normalized state, norm = {psi.norm():.15f}")

    amps = psi.amplitudes
    if ops.kind is PovmKind.KRAUS:
        raw = np.array([np.vdot(w, w).real for w in (op.entries @ amps for op in ops.elements)])
    else:
        raw = np.array([np.vdot(amps, op.entries @ amps).real for op in ops.elements])

    if np.any(raw < -NEGATIVE_PROB_TOL):
        worst = int(np.argmin(raw))
        raise InvalidInputError(f"negative probability {raw[worst]:.3e} for outcome {ops.label(worst)}")
    total = float(raw.sum())
    if tol is not None and abs(total - 1.0) > tol:
        raise InvalidInputError(f"probabilities sum to {total:.15f}; measurement set is incomplete")
    clamped = np.clip(raw, 0.0, None)
    return clamped / clamped.sum()


def sample_outcome(probs: Sequence[float], rng: RngStream) -> int:
    """
    Inverse-CDF sampling from a single uniform draw.

    :param probs: probability vector summing to 1 within 1e-8
    :param rng: the trajectory's stream
    :return: sampled index; never an index with zero probability
    """
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0.0):
        raise InvalidInputError(f"negative entries in probability vector {probs}")
    if abs(probs.sum() - 1.0) > CDF_TOL:
        raise InvalidInputError(f"probabilities sum to {probs.sum():.12f}, not 1")
    cdf = np.cumsum(probs)
    index = int(np.searchsorted(cdf, rng.uniform() * cdf[-1], side="right"))
    index = min(index, probs.size - 1)
    while probs[index] == 0.0:
        index -= 1
    return index


def condition(omega: OperatorMatrix, psi: StateVector) -> StateVector:
    """
    State after outcome omega: Omega|psi> / ||Omega|psi>||.

    :raises ImpossibleOutcome: when the branch has (numerically) zero norm
    """
    branch = omega.apply(psi)
    norm = branch.norm()
    if norm <= ZERO_NORM_TOL:
        raise ImpossibleOutcome(f"branch {omega.name or 'Omega'} has norm {norm:.3e}")
    return StateVector(branch.amplitudes / norm, psi.labels)


@dataclass(frozen=True)
class BranchTag:
    """Pointer/environment record. Immutable: appending returns a new tag."""

    outcome_history: Tuple[int, ...] = ()

    def append(self, outcome: int) -> "BranchTag":
        return BranchTag(self.outcome_history + (int(outcome),))

    def __len__(self) -> int:
        return len(self.outcome_history)

    def extends(self, other: "BranchTag") -> bool:
        return self.outcome_history[: len(other)] == other.outcome_history


@dataclass(frozen=True)
class UnitarySegment:
    H: OperatorMatrix
    duration: float
    label: str = "U"


@dataclass(frozen=True)
class MeasurementStep:
    povm: PovmSet
    label: str = "M"


ScheduleStep = Union[UnitarySegment, MeasurementStep]


@dataclass(frozen=True)
class MeasurementSchedule:
    steps: Tuple[ScheduleStep, ...]

    def __post_init__(self):
        steps = tuple(self.steps)
        for position, step in enumerate(steps):
            if isinstance(step, MeasurementStep):
                if step.povm.kind is not PovmKind.KRAUS:
                    raise InvalidInputError(f"schedule step {position} ({step.label}) must hold Kraus operators")
                report = check_povm(step.povm)
                if not report.passed:
                    raise InvalidInputError(
                        f"schedule step {position} ({step.label}) fails completeness/positivity: "
                        f"residual {report.completeness_residual:.3e}"
                    )
            elif not isinstance(step, UnitarySegment):
                raise InvalidInputError(f"unknown schedule step type {type(step).__name__}")
        object.__setattr__(self, "steps", steps)

    @property
    def measurements(self) -> List[MeasurementStep]:
        return [s for s in self.steps if isinstance(s, MeasurementStep)]


@dataclass
class TrajectoryRecord:
    outcomes: List[int] = field(default_factory=list)
    step_probs: List[float] = field(default_factory=list)
    conditioned_states: List[StateVector] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    labels: List[str] = field(default_factory=list)
    branch: BranchTag = field(default_factory=BranchTag)

    @property
    def joint_prob(self) -> float:
        return float(np.prod(self.step_probs)) if self.step_probs else 1.0

    def to_json_dict(self) -> dict:
        return {
            "outcomes": list(self.outcomes),
            "labels": list(self.labels),
            "step_probs": list(self.step_probs),
            "times": list(self.times),
            "joint_prob": self.joint_prob,
        }

    def csv_rows(self) -> Tuple[List[str], List[list]]:
        header = ["step", "time", "label", "outcome", "prob", "norm"]
        rows = [
            [k, self.times[k], self.labels[k], self.outcomes[k], self.step_probs[k], self.conditioned_states[k].norm()]
            for k in range(len(self.outcomes))
        ]
        return header, rows


def run_trajectory(schedule: MeasurementSchedule, psi0: StateVector, rng: RngStream) -> TrajectoryRecord:
    """
    Run one quantum trajectory through the schedule.

    :param schedule: unitary segments and Kraus measurements
    :param psi0: normalized initial state
    :param rng: the trajectory's own stream
    :return: TrajectoryRecord with one entry per measurement step
    """
    if not psi0.is_normalized(ALGEBRAIC_TOL):
        raise InvalidInputError(f"initial state must be normalized, norm = {psi0.norm():.15f}")

    record = TrajectoryRecord()
    psi = psi0
    clock = 0.0
    for step in schedule.steps:
        if isinstance(step, UnitarySegment):
            psi = evolve_step(step.H, psi, step.duration)
            clock += step.duration
            continue
        probs = born_probabilities(step.povm, psi)
        outcome = sample_outcome(probs, rng)
        psi = condition(step.povm.elements[outcome], psi)
        record.outcomes.append(outcome)
        record.step_probs.append(float(probs[outcome]))
        record.conditioned_states.append(psi)
        record.times.append(clock)
        record.labels.append(f"{step.label}:{step.povm.label(outcome)}")
        record.branch = record.branch.append(outcome)
    logger.debug("Measurement Trajectory: outcomes %s, joint probability %.6g", record.outcomes, record.joint_prob)
    return record


def unnormalized_branch(schedule: MeasurementSchedule, psi0: StateVector, outcomes: Sequence[int]) -> np.ndarray:
    """Omega_{i_n} U ... Omega_{i_1} U |psi0>, never renormalized."""
    vector = np.array(psi0.amplitudes)
    measured = iter(outcomes)
    for step in schedule.steps:
        if isinstance(step, UnitarySegment):
            vector = evolve_step(step.H, StateVector(vector), step.duration).amplitudes
        else:
            vector = step.povm.elements[next(measured)].entries @ vector
    return vector


def branch_weight(schedule: MeasurementSchedule, psi0: StateVector, outcomes: Sequence[int]) -> float:
    """<Phi_{i1..in}|Phi_{i1..in}> of the unnormalized product state."""
    branch = unnormalized_branch(schedule, psi0, outcomes)
    return float(np.vdot(branch, branch).real)


def enumerate_histories(schedule: MeasurementSchedule, psi0: StateVector) -> Dict[Tuple[int, ...], float]:
    """
    Exhaustive joint distribution over every outcome history.

    :return: {history: probability}; zero-weight histories are kept with 0.0
    """
    branches: Dict[Tuple[int, ...], np.ndarray] = {(): np.array(psi0.amplitudes)}
    for step in schedule.steps:
        if isinstance(step, UnitarySegment):
            branches = {
                h: (evolve_step(step.H, StateVector(v), step.duration).amplitudes if np.any(v) else v)
                for h, v in branches.items()
            }
            continue
        branches = {
            h + (i,): op.entries @ v
            for h, v in branches.items()
            for i, op in enumerate(step.povm.elements)
        }
    return {h: float(np.vdot(v, v).real) for h, v in branches.items()}
