import math

import numpy as np
import pytest

from quantum.decay import (
    AtomFieldParams,
    arrival_probs,
    decay_rate,
    excited_state,
    fit_decay_rate,
    homodyne_ops,
    homodyne_window,
    kernel_moments,
    kraus_defect,
    ks_statistic,
    photon_counting_ops,
    solve_memory_kernel,
    survival_curve,
    unravel,
    unravel_ensemble,
)
from quantum.qcore import InvalidInputError, PovmKind, RngStream, StateVector

GAMMA = 0.5
ETA = 0.01


# ---------- Window operators ----------
def test_counting_pair_is_complete_to_second_order():
    ops = photon_counting_ops(GAMMA, ETA)
    assert ops.kind is PovmKind.KRAUS
    assert ops.labels == ("no_click", "click")
    assert kraus_defect(ops) == pytest.approx((GAMMA * ETA) ** 2, rel=1e-6)


def test_homodyne_pair_defect_is_small():
    eta = homodyne_window(GAMMA, 1.0, ETA)
    assert eta == pytest.approx(2e-3 / (math.sqrt(GAMMA) + 1.0) ** 2)
    assert kraus_defect(homodyne_ops(GAMMA, eta, 1.0)) < 1e-5


def test_window_guards():
    with pytest.raises(InvalidInputError):
        photon_counting_ops(1.0, 0.1)
    with pytest.raises(InvalidInputError):
        homodyne_ops(GAMMA, ETA, 10.0)
    with pytest.raises(InvalidInputError):
        photon_counting_ops(GAMMA, 0.0)
    assert homodyne_window(0.0, 0.0, ETA) == ETA


def test_unravel_rejects_foreign_states():
    with pytest.raises(InvalidInputError):
        unravel(photon_counting_ops(GAMMA, ETA), StateVector.from_coefficients([1.0, 1.0]), 10, ETA, RngStream(0))


# ---------- Trajectories ----------
def test_ground_state_never_clicks():
    ground = StateVector.basis(2, 0)
    ens = unravel_ensemble(photon_counting_ops(GAMMA, ETA), ground, 200, ETA, RngStream.family(1, 50))
    assert np.all(ens.first_click == 0)
    assert fit_decay_rate(ens.first_click, 200, ETA).rate == 0.0
    assert ens.summary()["no_click_fraction"] == 1.0


def test_counting_record_jumps_to_ground_at_first_click():
    record = unravel(photon_counting_ops(GAMMA, ETA), excited_state(), 1000, ETA, RngStream(4, 0))
    n = record.first_click
    if n:
        assert np.allclose(record.overlap[:n], 1.0)
        assert record.overlap[n] == pytest.approx(0.0)
    assert record.clicks <= 1


def test_single_path_matches_ensemble_member():
    ops = photon_counting_ops(GAMMA, ETA)
    ens = unravel_ensemble(ops, excited_state(), 1500, ETA, RngStream.family(9, 4), keep=2)
    alone = unravel(ops, excited_state(), 1500, ETA, RngStream(9, 1))
    assert np.allclose(alone.overlap, ens.kept[1].overlap, atol=1e-12)
    assert np.array_equal(alone.clicked, ens.kept[1].clicked)


@pytest.mark.slow
def test_counting_population_and_rate():
    steps = int(round(3.0 / GAMMA / ETA))
    ens = unravel_ensemble(photon_counting_ops(GAMMA, ETA), excited_state(), steps, ETA,
                           RngStream.family(17, 5000))
    for n in (steps // 3, 2 * steps // 3, steps):
        exact = math.exp(-2.0 * GAMMA * ens.times[n])
        assert abs(ens.population_mean[n] - exact) < 5 * ens.population_stderr[n] + 0.005
    fit = fit_decay_rate(ens.first_click, steps, ETA)
    assert abs(fit.rate - 2.0 * GAMMA) < 5 * fit.stderr + 0.01
    jitter = RngStream(17, 0).child(1).uniforms(ens.n_paths)
    assert ks_statistic(ens.first_click, ETA, 2.0 * GAMMA, steps, jitter).pvalue > 1e-4


@pytest.mark.slow
def test_homodyne_unraveling_has_the_same_mean_population():
    beta = 1.0
    eta = homodyne_window(GAMMA, beta, ETA)
    steps = int(round(1.0 / eta))
    ens = unravel_ensemble(homodyne_ops(GAMMA, eta, beta), excited_state(), steps, eta,
                           RngStream.family(23, 1000))
    exact = math.exp(-2.0 * GAMMA * ens.times[-1])
    assert abs(ens.population_mean[-1] - exact) < 5 * ens.population_stderr[-1] + 0.01
    assert ens.click_counts.mean() > 1.0


# ---------- Statistics helpers ----------
def test_survival_curve_counts_first_clicks():
    times, survival = survival_curve(np.array([1, 2, 0, 2]), 3, 0.5)
    assert np.allclose(times, [0.0, 0.5, 1.0, 1.5])
    assert np.allclose(survival, [1.0, 0.75, 0.25, 0.25])


def test_fit_uses_censored_exposure():
    fit = fit_decay_rate(np.array([2, 0, 4, 0]), 10, 0.1)
    assert fit.events == 2
    assert fit.exposure == 26
    assert fit.rate == pytest.approx(-math.log1p(-2 / 26) / 0.1)
    assert fit.to_dict()["events"] == 2


def test_ks_needs_clicks():
    with pytest.raises(InvalidInputError):
        ks_statistic(np.zeros(5, dtype=int), ETA, 1.0, 100)


# ---------- Atom-field model ----------
def test_decay_constant_from_coupling():
    params = AtomFieldParams(lambda_coupling=0.2, tau_dispersal=0.5, hbar=0.5)
    assert decay_rate(params) == pytest.approx(0.04 * 0.5 / (2 * 0.25))
    with pytest.raises(InvalidInputError):
        AtomFieldParams(lambda_coupling=10.0, tau_dispersal=1.0, eta=0.01)


def test_arrival_probabilities_nearly_sum_to_one():
    probs = arrival_probs(GAMMA, ETA, 300)
    assert probs[0] == pytest.approx(math.exp(-3.0))
    assert abs(probs.sum() - 1.0) < 2 * GAMMA * ETA


def test_kernel_moments_of_full_gaussian():
    mass, first = kernel_moments(0.1, np.array([-2.0, 0.0]), np.array([2.0, 2.0]))
    assert np.allclose(mass, [1.0, 0.5])
    assert first[0] == pytest.approx(0.0, abs=1e-15)
    assert first[1] == pytest.approx(0.1 / math.sqrt(2 * math.pi))


def test_memory_kernel_reproduces_exponential_decay():
    params = AtomFieldParams(lambda_coupling=1.0, tau_dispersal=1.0)
    coarse = solve_memory_kernel(params, t_max=6.0, step=0.01)
    narrow = solve_memory_kernel(params, t_max=6.0, step=0.01, width_fraction=1.0 / 80.0)
    assert coarse.gamma == pytest.approx(0.5)
    assert coarse.amplitude[0] == 1.0
    assert coarse.max_deviation() < 0.035
    assert narrow.max_deviation() < coarse.max_deviation()
