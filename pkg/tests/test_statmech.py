import math

import numpy as np
import pytest

from quantum.qcore import InvalidInputError, RngStream, StateVector
from quantum.statmech import (
    IsingLattice,
    bell_ergodicity_check,
    blocked_mean,
    boltzmann_weights,
    build_microcanonical,
    chain_stationary,
    detailed_balance_residual,
    empirical_distribution,
    fraction_variance,
    glauber_chain,
    glauber_flip_prob,
    participation_ratio,
    random_subspace_state,
    simulate_ising,
    start_sector_state,
    thermal_expectations,
)
from quantum.statmech.constants import HIGH_TEMPERATURE, LOW_TEMPERATURE


# ---------- Glauber Ising ----------
def test_flip_probability():
    assert glauber_flip_prob(1, 0, 1.0) == pytest.approx(0.5)
    assert glauber_flip_prob(1, 4, 1.0) == pytest.approx(1.0 / (1.0 + math.exp(4.0)))
    assert glauber_flip_prob(-1, 4, 1.0) == pytest.approx(1.0 / (1.0 + math.exp(-4.0)))
    with pytest.raises(InvalidInputError):
        glauber_flip_prob(1, 0, 0.0)


def test_lattice_validation():
    with pytest.raises(InvalidInputError):
        IsingLattice(np.array([[1, 0], [1, 1]]), 1.0)
    with pytest.raises(InvalidInputError):
        IsingLattice(np.ones((2, 3)), 1.0)
    with pytest.raises(InvalidInputError):
        IsingLattice(np.ones((1, 1)), 1.0)
    lattice = IsingLattice.uniform(3, 1.0, spin=-1)
    assert lattice.magnetization == -1.0
    assert lattice.neighbor_sum(0, 0) == -4
    assert lattice.bond_sum() == 18
    assert lattice.code() == 0


def test_simulation_leaves_input_untouched():
    lattice = IsingLattice.uniform(4, 5.0)
    run = simulate_ising(lattice, 10, RngStream(3, 0))
    assert lattice.magnetization == 1.0
    assert run.magnetization.shape == (10,)
    header, rows = run.csv_rows()
    assert header == ["sweep", "magnetization"]
    assert rows[-1][1] == pytest.approx(run.final.magnetization)


def test_cold_lattice_stays_ordered():
    run = simulate_ising(IsingLattice.uniform(16, LOW_TEMPERATURE), 200, RngStream(5, 0))
    mean, _ = blocked_mean(run.magnetization[100:])
    assert mean > 0.9
    assert run.sign_changes == 0


def test_hot_lattice_averages_to_zero():
    run = simulate_ising(IsingLattice.random(8, HIGH_TEMPERATURE, RngStream(6, 0)), 400, RngStream(6, 1))
    mean, stderr = blocked_mean(run.magnetization)
    assert abs(mean) < 5 * stderr + 0.05
    assert run.sign_changes > 0


def test_record_states_is_limited_to_small_lattices():
    with pytest.raises(InvalidInputError):
        simulate_ising(IsingLattice.uniform(8, 1.0), 1, RngStream(1), record_states=True)


def test_exact_chain_satisfies_detailed_balance():
    assert detailed_balance_residual(2, 1.0) < 1e-10
    P = glauber_chain(2, 1.5)
    assert P.shape == (16, 16)
    assert np.allclose(P.sum(axis=0), 1.0)
    assert np.allclose(chain_stationary(P), boltzmann_weights(2, 1.5))
    with pytest.raises(InvalidInputError):
        glauber_chain(5, 1.0)


@pytest.mark.slow
def test_sampled_configurations_follow_boltzmann_law():
    T = 2.0
    run = simulate_ising(IsingLattice.random(2, T, RngStream(8, 0)), 20_000, RngStream(8, 1), record_states=True)
    freq, stderr = empirical_distribution(run.codes[100:], 16)
    exact = boltzmann_weights(2, T)
    assert np.all(np.abs(freq - exact) < 5 * stderr + 0.005)


def test_blocked_mean():
    mean, stderr = blocked_mean(np.arange(40.0), blocks=4)
    assert mean == pytest.approx(19.5)
    assert stderr == pytest.approx(np.std([4.5, 14.5, 24.5, 34.5], ddof=1) / 2.0)
    with pytest.raises(InvalidInputError):
        blocked_mean(np.ones(5))


# ---------- Microcanonical model ----------
def test_model_validation():
    with pytest.raises(InvalidInputError):
        build_microcanonical(10, [4, 5], RngStream(1))
    with pytest.raises(InvalidInputError):
        build_microcanonical(10, [10, 0], RngStream(1))
    with pytest.raises(InvalidInputError):
        build_microcanonical(2001, [1000, 1001], RngStream(1))


def test_model_structure():
    model = build_microcanonical(30, [10, 20], RngStream(2))
    assert model.labels == ("sector0", "sector1")
    assert np.allclose(model.microcanonical_values, [1 / 3, 2 / 3])
    assert not model.block_diagonal
    assert build_microcanonical(30, [10, 20], RngStream(2), block_diagonal=True).block_diagonal
    ratios = participation_ratio(model)
    assert ratios.shape == (30,)
    assert np.median(ratios) > 5.0


def test_random_sector_and_subspace_states():
    model = build_microcanonical(30, [10, 20], RngStream(3))
    psi = start_sector_state(model, 1, RngStream(3, 1))
    assert np.allclose(model.sector_probs(psi.amplitudes), [0.0, 1.0])
    assert random_subspace_state(model, RngStream(3, 2)).is_normalized()
    with pytest.raises(InvalidInputError):
        start_sector_state(model, 2, RngStream(3))


def test_sector_probabilities_relax_to_microcanonical_values():
    model = build_microcanonical(200, [50, 150], RngStream(4))
    psi0 = start_sector_state(model, 0, RngStream(4, 1))
    series = thermal_expectations(model, psi0, np.linspace(0.0, 20.0, 401))
    assert np.allclose(series.probs[0], [1.0, 0.0], atol=1e-12)
    assert series.max_sum_error < 1e-10
    assert np.all(np.abs(series.deviation) < 0.1)
    assert series.to_dict()["targets"] == pytest.approx([0.25, 0.75])


def test_block_diagonal_control_stays_in_its_sector():
    model = build_microcanonical(60, [20, 40], RngStream(5), block_diagonal=True)
    psi0 = start_sector_state(model, 0, RngStream(5, 1))
    series = thermal_expectations(model, psi0, np.linspace(0.0, 10.0, 101))
    assert np.allclose(series.probs[:, 0], 1.0, atol=1e-8)


def test_thermal_expectations_rejects_foreign_states():
    model = build_microcanonical(10, [5, 5], RngStream(6))
    with pytest.raises(InvalidInputError):
        thermal_expectations(model, StateVector.basis(4, 0), [0.0])
    with pytest.raises(InvalidInputError):
        thermal_expectations(model, StateVector.basis(10, 0), [])


def test_fraction_variance():
    fractions = np.array([[0.2, 0.8], [0.4, 0.6], [0.3, 0.7]])
    variance = fraction_variance(fractions, RngStream(7), resamples=500)
    assert variance.shape == (2,)
    assert variance[0] == pytest.approx(variance[1])
    assert 0.0 < variance[0] < 0.01
    with pytest.raises(InvalidInputError):
        fraction_variance(fractions[:1], RngStream(7))


def test_bell_process_visits_both_sectors():
    model = build_microcanonical(40, [10, 30], RngStream(9))
    psi0 = start_sector_state(model, 0, RngStream(9, 1))
    check = bell_ergodicity_check(model, psi0, 5.0, RngStream(9, 2), paths=4)
    assert check.fractions.sum() == pytest.approx(1.0)
    assert check.path_fractions.shape == (4, 2)
    assert check.schrodinger_average.sum() == pytest.approx(1.0, abs=1e-8)
    assert np.all(np.abs(check.schrodinger_average - check.targets) < 0.2)
    assert check.report.transition_counts.sum() > 0
    assert check.dt == pytest.approx(0.01 / model.norm)
    assert set(check.to_dict()) >= {"fractions", "z_scores", "report"}
    with pytest.raises(InvalidInputError):
        bell_ergodicity_check(model, psi0, 0.0, RngStream(9))
