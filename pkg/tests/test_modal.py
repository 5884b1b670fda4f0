import math

import numpy as np
import pytest

from quantum.modal import (
    CutSpec,
    ModalPath,
    PointerOverlapModel,
    bell_rates,
    constant_schedule,
    ergodicity_report,
    jump_chains,
    local_states,
    modal_ensemble,
    pointer_overlap_probs,
    probability_currents,
    rate_schedule,
    schrodinger_flow,
    simulate_modal,
    stationary_distribution,
)
from quantum.qcore import (
    InvalidInputError,
    PovmKind,
    PovmSet,
    RngStream,
    StateVector,
    StepTooLarge,
    random_hermitian,
    random_state,
)


@pytest.fixture
def toy():
    rng = np.random.default_rng(3)
    H = random_hermitian(4, rng, scale=0.5)
    psi = random_state(4, rng)
    return H, CutSpec.from_blocks((1, 1, 1, 1)), psi


# ---------- Cut and local states ----------
def test_local_states_reconstruct_the_global_state(toy):
    _, cut, psi = toy
    decomp = local_states(cut, psi)
    assert np.allclose(decomp.reconstruct(), psi.amplitudes)
    assert decomp.probs.sum() == pytest.approx(1.0)
    assert np.allclose(decomp.probs, psi.probabilities())


def test_cut_rejects_kraus_and_incomplete_sets():
    with pytest.raises(InvalidInputError):
        CutSpec(PovmSet.from_arrays([np.eye(2)], PovmKind.KRAUS))
    with pytest.raises(InvalidInputError):
        CutSpec(PovmSet.from_arrays([np.diag([1.0, 0.0])]))


def test_degenerate_weights_are_flagged():
    psi = StateVector.from_coefficients([1.0, 1.0]).normalize()
    assert local_states(CutSpec.from_blocks((1, 1)), psi).degenerate_flag


# ---------- Rates ----------
def test_rates_are_one_directional_per_pair(toy):
    H, cut, psi = toy
    rates = bell_rates(H, local_states(cut, psi)).rates
    assert np.all(rates >= 0.0)
    assert np.max(np.minimum(rates, rates.T)) == 0.0


def test_rates_reproduce_schrodinger_flow(toy):
    H, cut, psi = toy
    decomp = local_states(cut, psi)
    matrix = bell_rates(H, decomp)
    assert np.allclose(matrix.generator() @ decomp.probs, schrodinger_flow(H, decomp), atol=1e-12)
    currents = probability_currents(H, decomp)
    assert np.allclose(currents, -currents.T)


def test_exits_from_empty_states_are_zeroed():
    rng = np.random.default_rng(4)
    H = random_hermitian(3, rng)
    psi = StateVector.from_coefficients([0.6, 0.8, 0.0])
    matrix = bell_rates(H, local_states(CutSpec.from_blocks((1, 1, 1)), psi))
    assert matrix.flagged == [2]
    assert matrix.exit_rate(2) == 0.0


# ---------- Jump chains ----------
def test_step_too_large_is_raised():
    schedule = constant_schedule(np.array([[0.0, 0.0], [200.0, 0.0]]), dt=0.01, steps=3)
    with pytest.raises(StepTooLarge) as info:
        jump_chains(schedule, [0], np.full((1, 3), 0.5))
    assert info.value.details["step"] == 0


def test_single_path_is_reproducible(toy):
    H, cut, psi = toy
    first = simulate_modal(H, cut, psi, 0, 0.01, 200, RngStream(8, 0))
    second = simulate_modal(H, cut, psi, 0, 0.01, 200, RngStream(8, 0))
    assert np.array_equal(first.indices, second.indices)
    assert first.times[-1] == pytest.approx(2.0)
    with pytest.raises(InvalidInputError):
        simulate_modal(H, cut, psi, 4, 0.01, 10, RngStream(8, 0))


def test_ensemble_does_not_depend_on_thread_count(toy):
    H, cut, psi = toy
    streams = RngStream.family(12, 40)
    serial = modal_ensemble(H, cut, psi, 0.01, 100, streams, threads=1)
    parallel = modal_ensemble(H, cut, psi, 0.01, 100, RngStream.family(12, 40), threads=3)
    assert np.array_equal(serial.indices, parallel.indices)


def test_transition_log_matches_indices(toy):
    H, cut, psi = toy
    path = simulate_modal(H, cut, psi, 1, 0.01, 300, RngStream(21, 0))
    for entry in path.transition_log():
        assert entry["from"] != entry["to"]
        assert path.index_at(entry["t"]) == entry["to"]
        assert entry["rate"] > 0.0


@pytest.mark.slow
def test_occupation_tracks_born_probabilities(toy):
    H, cut, psi = toy
    n = 4000
    ensemble = modal_ensemble(H, cut, psi, 0.002, 1000, RngStream.family(30, n))
    mean, _ = ensemble.occupation()
    target = ensemble.schedule.probs
    z = np.abs(mean - target) / (np.sqrt(target * (1 - target) / n) + 1e-3)
    assert z[500].max() < 5.0
    assert z[-1].max() < 5.0


def test_two_state_chain_relaxes_to_stationary_law():
    rates = np.array([[0.0, 2.0], [1.0, 0.0]])
    assert np.allclose(stationary_distribution(rates), [2 / 3, 1 / 3])
    schedule = constant_schedule(rates, dt=0.01, steps=800)
    n = 3000
    uniforms = np.stack([s.uniforms(800) for s in RngStream.family(2, n)])
    indices, _ = jump_chains(schedule, [0] * n, uniforms, log_transitions=False)
    frac = float(np.mean(indices[:, -1] == 0))
    assert abs(frac - 2 / 3) < 5 * math.sqrt(2 / 9 / n)


def test_reducible_chain_has_no_unique_stationary_law():
    with pytest.raises(InvalidInputError):
        stationary_distribution(np.zeros((2, 2)))


# ---------- Ergodicity diagnostics ----------
def test_report_counts_transitions_and_sectors():
    path = ModalPath(np.arange(5.0), np.array([0, 1, 0, 1, 1]))
    report = ergodicity_report([path], ["a", "b"], sectors=["left", "right"])
    assert report.transition_counts.tolist() == [[0, 2], [1, 0]]
    assert report.cross_sector_transitions == 3
    assert report.is_ergodic
    assert np.allclose(report.occupation, [0.5, 0.5])
    assert report.occupation_stderr is None
    assert report.to_dict()["reachable"]["a"] == ["a", "b"]


def test_report_detects_trapped_paths():
    paths = [ModalPath(np.arange(4.0), np.array([0, 0, 1, 1])), ModalPath(np.arange(4.0), np.array([2, 2, 2, 2]))]
    report = ergodicity_report(paths, ["a", "b", "c"])
    assert not report.is_ergodic
    assert report.reachable_from(0) == [0, 1]
    assert report.occupation_stderr is not None
    assert report.visited == [0, 1, 2]


def test_report_rejects_foreign_indices():
    with pytest.raises(InvalidInputError):
        ergodicity_report([ModalPath(np.arange(2.0), np.array([0, 3]))], ["a", "b"])


# ---------- Pointer-overlap model ----------
def test_pointer_probabilities_move_to_born_weights():
    model = PointerOverlapModel(math.sqrt(0.7), math.sqrt(0.3), 1.0)
    assert model.probs(0.0) == (1.0, 0.0)
    p1, p2 = model.probs(8.0)
    assert p1 == pytest.approx(0.7, abs=1e-12)
    assert p2 == pytest.approx(0.3, abs=1e-12)
    assert model.limits == pytest.approx((0.7, 0.3))


def test_pointer_overlap_rejects_bad_arguments():
    with pytest.raises(InvalidInputError):
        pointer_overlap_probs(0.6, 0.8, 1.5)
    with pytest.raises(InvalidInputError):
        pointer_overlap_probs(0.6, 0.6, 0.5)
    with pytest.raises(InvalidInputError):
        PointerOverlapModel(0.6, 0.8, 0.0)


def test_generator_reproduces_pointer_probabilities():
    model = PointerOverlapModel(math.sqrt(0.7), math.sqrt(0.3), 1.0)
    schedule = rate_schedule(model.hamiltonian, model.cut(), model.initial_state(), 0.002, 1500)
    for n in (250, 500, 1500):
        assert schedule.probs[n, 0] == pytest.approx(model.probs(schedule.times[n])[0], abs=1e-4)


def test_pointer_paths_leave_m1_only_once():
    model = PointerOverlapModel(math.sqrt(0.7), math.sqrt(0.3), 1.0)
    ensemble = modal_ensemble(model.hamiltonian, model.cut(), model.initial_state(), 0.005, 1200,
                              RngStream.family(5, 300), j0=0)
    for log in ensemble.logs:
        assert [(entry[1], entry[2]) for entry in log] in ([], [(0, 1)])
