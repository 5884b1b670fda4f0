import math

import numpy as np
import pytest

from quantum.hyperion import (
    ClassicalRotorState,
    PhaseSpaceGrid,
    RotorParams,
    RotorWavefunction,
    abelianization_residuals,
    angle_gap,
    breakdown_point,
    cell_probabilities,
    choose_truncation,
    coarse_region_probability,
    coherent_state,
    completeness_on_block,
    corotating_integral,
    days,
    divergence_rate,
    ehrenfest_breakdown,
    evolve_rotor,
    free_spreading_width,
    grid_completeness,
    husimi,
    husimi_norm,
    husimi_x_marginal,
    integrate_classical,
    kepler_residual,
    lyapunov,
    minimum_uncertainty_width,
    orbit,
    phase_space_povm,
    povm_summary,
    preset,
    region_probability,
    resolution_of_identity,
    retained_block,
    rotor_history,
    rotor_observables,
    smoothed_position_density,
    solve_kepler,
    tangent_area,
    tq_headline,
)
from quantum.qcore import ConvergenceError, InvalidInputError, TruncationError

TWO_PI = 2.0 * math.pi


# ---------- Orbit ----------
def test_kepler_solution_for_high_eccentricity():
    M = np.linspace(0.0, 20.0, 101)
    E = solve_kepler(M, 0.9)
    assert np.max(np.abs(E - 0.9 * np.sin(E) - M)) < 1e-9
    assert kepler_residual(RotorParams(0.26, 0.1), np.linspace(0.0, 100.0, 500)) < 1e-12


def test_orbit_perihelion_and_aphelion():
    params = RotorParams(0.26, 0.1)
    r, theta = orbit(params, np.array([0.0, params.period / 2]))
    assert r[0] == pytest.approx(0.9)
    assert r[1] == pytest.approx(1.1)
    assert theta[0] == pytest.approx(0.0)
    assert theta[1] == pytest.approx(math.pi)


def test_rotor_params_validation():
    with pytest.raises(InvalidInputError):
        RotorParams(0.26, 1.0)
    with pytest.raises(InvalidInputError):
        preset("tumbling")
    assert preset("chaotic_demo").with_hbar(1e-3).hbar_eff == 1e-3


def test_kepler_failure_is_a_guard():
    assert issubclass(ConvergenceError, Exception)
    assert ConvergenceError("x").guard == "convergence"


# ---------- Classical rotor ----------
def test_state_wraps_angle():
    assert ClassicalRotorState(TWO_PI + 0.5, 1.0).phi == pytest.approx(0.5)
    with pytest.raises(InvalidInputError):
        ClassicalRotorState(math.nan, 1.0)


def test_free_rotor_turns_uniformly():
    params = RotorParams(0.0, 0.0)
    traj = integrate_classical(params, ClassicalRotorState(0.3, 1.5), (0.0, params.period))
    assert traj.phi[-1] == pytest.approx(0.3 + 1.5 * params.period, rel=1e-12)
    assert np.all(traj.ell == 1.5)
    header, rows = traj.csv_rows()
    assert header == ["t", "phi", "ell"]
    assert 0.0 <= rows[-1][1] < TWO_PI


def test_step_must_resolve_the_orbit():
    params = preset("regular_demo")
    with pytest.raises(InvalidInputError):
        integrate_classical(params, ClassicalRotorState(0.3, 1.0), (0.0, 1.0), dt=params.period / 100)


def test_corotating_integral_is_conserved_on_circular_orbit():
    params = preset("regular_demo")
    traj = integrate_classical(params, ClassicalRotorState(0.3, 1.0), (0.0, 10 * params.period))
    K = corotating_integral(params, traj.phi, traj.ell, traj.times)
    assert np.max(np.abs(K - K[0])) < 1e-8
    with pytest.raises(InvalidInputError):
        corotating_integral(RotorParams(0.26, 0.1), 0.0, 1.0, 0.0)


def test_backward_integration_returns_to_start():
    params = preset("regular_demo")
    t1 = 5 * params.period
    forward = integrate_classical(params, ClassicalRotorState(0.3, 1.0), (0.0, t1))
    back = integrate_classical(params, forward.final, (t1, 0.0))
    assert angle_gap(back.phi[-1], 0.3) < 1e-8
    assert back.ell[-1] == pytest.approx(1.0, abs=1e-8)
    assert back.times[-1] == pytest.approx(0.0, abs=1e-9)


def test_tangent_area_is_preserved():
    params = preset("regular_demo")
    areas = tangent_area(params, ClassicalRotorState(0.3, 1.0), 3)
    assert areas.shape == (3,)
    assert np.max(np.abs(areas - 1.0)) < 1e-6


@pytest.mark.slow
def test_chaotic_and_regular_lyapunov_exponents():
    chaotic = preset("chaotic_demo")
    start = ClassicalRotorState(0.3, 1.6)
    lam = lyapunov(chaotic, start, 100 * chaotic.period)
    assert lam.lambda_max > 0.02
    assert lam.t_c == pytest.approx(1.0 / lam.lambda_max)
    assert not lam.regular
    assert 0.5 < divergence_rate(chaotic, start, 100 * chaotic.period) / lam.lambda_max < 2.0

    regular = preset("regular_demo")
    assert lyapunov(regular, ClassicalRotorState(0.3, 1.0), 100 * regular.period).lambda_max < 0.01


# ---------- Coherent states and Husimi densities ----------
HBAR = 0.05
DX = 0.3


@pytest.fixture
def packet():
    M = choose_truncation(2.0, HBAR, DX)
    return coherent_state(2.0, 1.0, M, HBAR, DX)


def test_coherent_state_moments(packet):
    assert packet.norm() == pytest.approx(1.0, abs=1e-12)
    obs = rotor_observables(packet)
    assert obs.x_mean == pytest.approx(2.0, abs=1e-9)
    assert obs.p_mean == pytest.approx(1.0, abs=1e-9)
    assert obs.spread == pytest.approx(math.sqrt(2.0) * DX, rel=1e-6)


def test_coherent_state_must_fit_the_truncation():
    with pytest.raises(TruncationError):
        coherent_state(0.0, 1.0, 21, HBAR, DX)
    with pytest.raises(InvalidInputError):
        RotorWavefunction(np.ones(4), HBAR, DX)


def test_husimi_is_normalized_and_marginal_matches_convolution(packet):
    grid = PhaseSpaceGrid(128, 200, 0.2, 1.8)
    rho = husimi(packet, grid)
    assert rho.shape == (128, 200)
    assert np.all(rho >= 0.0)
    assert husimi_norm(rho, grid, HBAR) == pytest.approx(1.0, abs=1e-4)
    marginal = husimi_x_marginal(packet, grid)
    assert np.allclose(marginal, smoothed_position_density(packet, grid.x_centers), atol=1e-4)
    assert resolution_of_identity(grid, packet.M, HBAR, DX) < 1e-6


def test_free_packet_drifts_and_spreads(packet):
    free = RotorParams(0.0, 0.0, hbar_eff=HBAR)
    series = rotor_history(packet, free, 0.0, 0.01, 200, sample_every=10)
    assert series.times[-1] == pytest.approx(2.0)
    assert series.x_mean[-1] == pytest.approx(4.0, abs=1e-9)
    assert np.allclose(series.p_mean, 1.0)
    t = series.times
    assert np.allclose(series.spread, np.sqrt(2 * DX ** 2 + (HBAR * t) ** 2 / (4 * DX ** 2)), rtol=1e-6)
    assert not series.stopped_early


def test_split_step_evolution_keeps_the_norm(packet):
    evolved = evolve_rotor(packet, preset("chaotic_demo"), 0.0, 0.01, 100)
    assert evolved.norm() == pytest.approx(1.0, abs=1e-10)


def test_history_stops_on_request(packet):
    free = RotorParams(0.0, 0.0, hbar_eff=HBAR)
    series = rotor_history(packet, free, 0.0, 0.01, 500, sample_every=5, stop=lambda step, obs: step >= 50)
    assert series.stopped_early
    assert series.times[-1] == pytest.approx(0.5)


def test_free_spreading_and_minimum_width():
    assert minimum_uncertainty_width(0.02) == pytest.approx(0.1)
    assert free_spreading_width(0.1, 0.02, 1.0, 0.0) == pytest.approx(0.1)
    assert free_spreading_width(0.1, 0.02, 1.0, 10.0) == pytest.approx(math.sqrt(0.01 + 1.0))
    assert angle_gap(0.1, TWO_PI - 0.1) == pytest.approx(0.2)


# ---------- Coarse-grained cells ----------
CELL_HBAR = 0.01
CELL_DX = 0.1


@pytest.fixture
def cells():
    grid = PhaseSpaceGrid.for_ratio(10.0, CELL_HBAR, CELL_DX, 0.0, 2.1)
    M = choose_truncation(2.1, CELL_HBAR, CELL_DX)
    return grid, M


def test_grid_for_ratio_respects_the_cut(cells):
    grid, _ = cells
    assert (grid.x_cells, grid.p_cells) == (6, 4)
    rx, rp = grid.cut_ratios(CELL_HBAR, CELL_DX)
    assert min(rx, rp) >= 10.0
    with pytest.raises(InvalidInputError):
        PhaseSpaceGrid(40, 4, 0.0, 2.1).check_cut(CELL_HBAR, CELL_DX)


def test_cells_resolve_identity_on_retained_block(cells):
    grid, M = cells
    assert retained_block(grid, M, CELL_HBAR, CELL_DX).size > 0
    assert grid_completeness(grid, M, CELL_HBAR, CELL_DX) < 1e-6


def test_cell_probabilities_of_a_packet(cells):
    grid, M = cells
    psi = coherent_state(1.0, 1.0, M, CELL_HBAR, CELL_DX)
    probs = cell_probabilities(psi, grid)
    assert probs.shape == (6, 4)
    assert probs.sum() == pytest.approx(1.0, abs=1e-6)
    assert np.all(probs > -1e-12)
    assert region_probability(psi, (0.0, TWO_PI), (0.0, 2.1)) == pytest.approx(1.0, abs=1e-6)
    assert coarse_region_probability(psi, grid, (0.0, TWO_PI), (0.0, 2.1)) == pytest.approx(probs.sum())


def test_larger_cells_are_closer_to_projectors(cells):
    grid, M = cells
    coarse = PhaseSpaceGrid.for_ratio(30.0, CELL_HBAR, CELL_DX, 0.0, 2.1)
    fine_report = abelianization_residuals(grid, M, CELL_HBAR, CELL_DX)
    coarse_report = abelianization_residuals(coarse, M, CELL_HBAR, CELL_DX)
    assert coarse_report.projectivity < fine_report.projectivity
    assert fine_report.ratio[0] >= 10.0
    assert set(fine_report.to_dict()) >= {"projectivity", "commutator", "cells"}


def test_phase_space_povm_summary():
    hbar, dx = 0.05, 0.2
    grid = PhaseSpaceGrid.for_ratio(10.0, hbar, dx, 0.0, 2.6)
    M = choose_truncation(2.6, hbar, dx)
    povm = phase_space_povm(grid, M, hbar, dx)
    assert len(povm) == grid.x_cells * grid.p_cells
    summary = povm_summary(povm, grid, M, hbar, dx)
    assert summary["completeness_residual"] < 1e-6
    block = retained_block(grid, M, hbar, dx)
    assert completeness_on_block(povm.effects(), block) == pytest.approx(summary["completeness_residual"])


# ---------- Breakdown sweep ----------
def test_sweep_input_checks():
    params = RotorParams(0.0, 0.0)
    with pytest.raises(InvalidInputError):
        ehrenfest_breakdown(params, [1e-2, 1e-3, 1e-4])
    with pytest.raises(InvalidInputError):
        ehrenfest_breakdown(params, [1e-2, 8e-3, 5e-3, 2e-3])


def test_chaotic_packet_follows_classical_angle_early_on():
    params = preset("chaotic_demo")
    point = breakdown_point(params, 1e-3, ClassicalRotorState(0.3, 1.6), params.period / 4)
    assert point.t_discrepancy is None
    assert point.t_spread is None
    assert point.to_dict()["censored_spread"]


@pytest.mark.slow
def test_chaotic_breakdown_grows_with_log_inverse_hbar():
    params = preset("chaotic_demo")
    result = ehrenfest_breakdown(params, [1e-2, 3e-3, 1e-3, 1e-4], state0=ClassicalRotorState(0.3, 1.6),
                                 horizon=8 * params.period, threads=2)
    assert not result.lyapunov.regular
    for criterion in ("spread", "discrepancy"):
        fits = result.fits[criterion]
        assert fits.censored == 0
        assert fits.vs_log_hbar.r_squared > 0.95
        assert abs(result.agreement[criterion] - 1.0) < 0.3
        assert result.agreement[criterion] == pytest.approx(fits.vs_log_hbar.slope * result.lyapunov.lambda_max)
        assert result.width_agreement[criterion] == pytest.approx(2.0 * result.agreement[criterion], rel=0.05)
    assert result.slope == result.fits["spread"].vs_log_hbar.slope
    assert set(result.to_dict()) >= {"agreement", "width_agreement"}


@pytest.mark.slow
def test_free_rotor_breakdown_is_a_power_law():
    result = ehrenfest_breakdown(RotorParams(0.0, 0.0), [1e-2, 3e-3, 1e-3, 1e-4], lyapunov_duration=0.0, threads=2)
    spread = result.fits["spread"]
    assert spread.censored == 0
    assert spread.power_law.slope == pytest.approx(0.5, abs=0.03)
    assert result.lyapunov is None
    assert result.agreement["spread"] is None
    first = min(result.points, key=lambda p: -p.hbar)
    expected = math.sqrt(2.0) * math.sqrt(0.25 - first.hbar) / math.sqrt(first.hbar)
    assert first.t_spread == pytest.approx(expected, rel=1e-2)


# ---------- SI headline ----------
def test_headline_breakdown_time():
    estimate = tq_headline(days(100.0), 1.4e5, 1e19, 100.0)
    assert estimate.de_broglie_m == pytest.approx(8.97e-34, rel=1e-2)
    assert 1e-34 < estimate.de_broglie_m < 1e-33
    assert estimate.t_q_years == pytest.approx(24.1, abs=0.1)
    assert estimate.to_dict()["t_c_days"] == pytest.approx(100.0)
    with pytest.raises(InvalidInputError):
        tq_headline(0.0, 1.4e5, 1e19, 100.0)
