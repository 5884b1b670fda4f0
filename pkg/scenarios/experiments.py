"""
scenarios/experiments.py

Behavior:
    - One function per scenario. Each takes its validated params model, the run
      seed, a thread count and an ArtifactSink, writes its tables through the
      sink and returns the summary that becomes results.json.
    - Random streams are keyed by (seed, stream id) only, so artifacts do not
      depend on the thread count.
"""
from __future__ import annotations

import logging
import math
import os
from collections import Counter
from dataclasses import replace
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from quantum.decay import (
    AtomFieldParams,
    excited_state,
    fit_decay_rate,
    homodyne_ops,
    homodyne_window,
    ks_statistic,
    photon_counting_ops,
    solve_memory_kernel,
    survival_curve,
    unravel_ensemble,
)
from quantum.hyperion import (
    PRESETS,
    ClassicalRotorState,
    PhaseSpaceGrid,
    RotorParams,
    abelianization_residuals,
    angle_gap,
    cell_probabilities,
    choose_truncation,
    coherent_state,
    corotating_integral,
    days,
    divergence_rate,
    ehrenfest_breakdown,
    grid_completeness,
    husimi,
    husimi_norm,
    integrate_classical,
    kepler_residual,
    lyapunov,
    minimum_uncertainty_width,
    preset,
    rotor_history,
    tangent_area,
    tq_headline,
)
from quantum.hyperion.constants import MIN_STEPS_PER_ORBIT
from quantum.measure import (
    MeasurementSchedule,
    MeasurementStep,
    decohered_interference,
    enumerate_histories,
    environment_overlap,
    log_environment_overlap,
    noisy_splitter_ops,
    polarization_state,
    run_trajectory,
)
from quantum.modal import CutSpec, PointerOverlapModel, ergodicity_report, modal_ensemble
from quantum.qcore import RngStream, random_hermitian, random_state
from quantum.statmech import (
    IsingLattice,
    blocked_mean,
    boltzmann_weights,
    bell_ergodicity_check,
    build_microcanonical,
    chain_stationary,
    detailed_balance_residual,
    empirical_distribution,
    fraction_variance,
    glauber_chain,
    participation_ratio,
    simulate_ising,
    start_sector_state,
    thermal_expectations,
)
from util.helper import write_csv, write_json

from .config import (
    DecayCountingParams,
    DecayHomodyneParams,
    EhrenfestSweepParams,
    HyperionClassicalParams,
    HyperionQuantumParams,
    IsingParams,
    ModalPointerParams,
    ModalToyParams,
    PolarizationParams,
    RotorModel,
    ThermalizationParams,
    TqHeadlineParams,
)

logger = logging.getLogger(__name__)

# Long series are thinned to about this many rows per table
TABLE_POINTS = 500
TRACE_POINTS = 2000

# Survival is compared with exp(-2 gamma t) only while at least this fraction survives
SURVIVAL_FLOOR = 0.05

# Fractions of the horizon at which ensemble populations are checked
CHECKPOINTS = (0.25, 0.5, 0.75, 1.0)

ABELIAN_RATIOS = (10.0, 30.0, 100.0)


class ArtifactSink:
    """
    Writes a run's files into one directory and remembers what it wrote.

    Tables go to CSV for format "csv", to JSON ({header, rows}) for "json",
    and to both for "both". Documents are always JSON.
    """

    def __init__(self, directory: str, fmt: str = "both"):
        self.directory = directory
        self.fmt = fmt
        self.paths: List[str] = []

    def table(self, name: str, header: Sequence[str], rows) -> None:
        rows = [list(row) for row in rows]
        if self.fmt in ("csv", "both"):
            self.paths.append(write_csv(os.path.join(self.directory, f"{name}.csv"), header, rows))
        if self.fmt in ("json", "both"):
            self.paths.append(write_json(os.path.join(self.directory, f"{name}.json"),
                                         {"header": list(header), "rows": rows}))

    def document(self, name: str, payload: dict) -> None:
        self.paths.append(write_json(os.path.join(self.directory, f"{name}.json"), payload))


def _stride(n: int, target: int = TABLE_POINTS) -> int:
    return max(1, n // target)


def _thinned(n: int, target: int = TABLE_POINTS) -> np.ndarray:
    """Row indices 0, s, 2s, ... always including the last one."""
    indices = np.arange(0, n, _stride(n, target))
    return indices if indices[-1] == n - 1 else np.append(indices, n - 1)


def _finite_or_none(value: Optional[float]) -> Optional[float]:
    return None if value is None or not math.isfinite(value) else float(value)


# ---------- Measurement ----------
def run_polarization(params: PolarizationParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Repeated noisy polarization measurements, sampled and enumerated exactly."""
    psi0 = polarization_state(params.c1, params.c2)
    ops = noisy_splitter_ops(params.epsilon)
    schedule = MeasurementSchedule(tuple(MeasurementStep(ops, f"M{k + 1}") for k in range(params.repeats)))
    exact = enumerate_histories(schedule, psi0)

    records = [run_trajectory(schedule, psi0, stream) for stream in RngStream.family(seed, params.trajectories)]
    counts = Counter(tuple(r.outcomes) for r in records)
    n = len(records)

    rows = []
    tv_distance = 0.0
    max_z = 0.0
    for history in sorted(exact):
        frequency = counts.get(history, 0) / n
        stderr = math.sqrt(frequency * (1.0 - frequency) / n)
        tv_distance += 0.5 * abs(frequency - exact[history])
        if stderr > 0.0:
            max_z = max(max_z, abs(frequency - exact[history]) / stderr)
        label = "-".join(ops.label(i) for i in history)
        rows.append([label, counts.get(history, 0), frequency, stderr, exact[history]])
    sink.table("histories", ["history", "count", "frequency", "stderr", "exact"], rows)

    for k, record in enumerate(records[:params.kept]):
        header, trajectory_rows = record.csv_rows()
        sink.table(f"trajectory_{k}", header, trajectory_rows)

    repeat_exact = sum(p for h, p in exact.items() if len(set(h)) == 1)
    repeat_observed = float(np.mean([len(set(r.outcomes)) == 1 for r in records]))

    environment_rows = []
    for n_dof in params.environment_dof:
        overlap = environment_overlap(params.environment_epsilon, n_dof)
        environment_rows.append([n_dof, log_environment_overlap(params.environment_epsilon, n_dof), overlap,
                                 decohered_interference(params.c1, params.c2, overlap)])
    sink.table("environment", ["n_dof", "log_overlap", "overlap", "interference"], environment_rows)

    logger.info("Polarization Scenario: %d trajectories, total variation %.4f from the exact law", n, tv_distance)
    return {
        "trajectories": n,
        "exact": {"-".join(ops.label(i) for i in h): p for h, p in sorted(exact.items())},
        "total_variation": tv_distance,
        "max_abs_z": max_z,
        "repeatability": {"observed": repeat_observed, "exact": repeat_exact},
        "kept_trajectories": [r.to_json_dict() for r in records[:params.kept]],
        "bare_interference": decohered_interference(params.c1, params.c2, 1.0),
    }


# ---------- Bell jump process ----------
def run_modal_pointer(params: ModalPointerParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Two-outcome pointer-overlap model run through the jump engine."""
    model = PointerOverlapModel(math.sqrt(params.c1_squared), math.sqrt(1.0 - params.c1_squared), params.tau)
    steps = max(1, int(round(params.t_max / params.dt)))
    ensemble = modal_ensemble(model.hamiltonian, model.cut(), model.initial_state(), params.dt, steps,
                              RngStream.family(seed, params.paths), j0=0, threads=threads)
    mean, stderr = ensemble.occupation()
    times = ensemble.schedule.times
    exact = np.array([model.probs(t) for t in times])

    rows = [[times[n], mean[n, 0], stderr[n, 0], exact[n, 0], ensemble.schedule.probs[n, 0],
             mean[n, 1], stderr[n, 1], exact[n, 1]] for n in _thinned(times.size)]
    sink.table("occupation", ["t", "p1", "p1_stderr", "p1_exact", "p1_schedule", "p2", "p2_stderr", "p2_exact"], rows)

    transitions = [[p, t, i, j, rate] for p, log in enumerate(ensemble.logs) for t, i, j, rate in log]
    sink.table("transitions", ["path", "t", "from", "to", "rate"], transitions)

    limits = np.array(model.limits)
    final_z = [float((mean[-1, i] - limits[i]) / stderr[-1, i]) if stderr[-1, i] > 0.0 else 0.0 for i in range(2)]
    last = max((row[1] for row in transitions), default=None)
    return {
        "paths": ensemble.n_paths,
        "steps": steps,
        "limits": limits.tolist(),
        "final_occupation": mean[-1].tolist(),
        "final_stderr": stderr[-1].tolist(),
        "final_z": final_z,
        "transitions": len(transitions),
        "last_transition": last,
        "confined_before_5_tau": last is None or last < 5.0 * params.tau,
        "schedule_max_deviation": float(np.max(np.abs(ensemble.schedule.probs - exact))),
    }


def run_modal_toy(params: ModalToyParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Random few-level model: ensemble occupation against the Schrodinger probabilities."""
    base = RngStream(seed, 0)
    H = random_hermitian(params.dim, base.child(0).generator, params.hamiltonian_scale)
    psi0 = random_state(params.dim, base.child(1).generator)
    labels = tuple(f"s{i}" for i in range(params.dim))
    cut = CutSpec.from_blocks((1,) * params.dim, labels)
    ensemble = modal_ensemble(H, cut, psi0, params.dt, params.steps,
                              RngStream.family(seed, params.paths, offset=1), threads=threads)
    mean, stderr = ensemble.occupation()
    probs = ensemble.schedule.probs
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(stderr > 0.0, (mean - probs) / stderr, np.where(np.isclose(mean, probs), 0.0, np.inf))
    rates = ensemble.schedule.rates
    antisymmetry = float(np.max(np.minimum(rates, np.transpose(rates, (0, 2, 1))))) if rates.size else 0.0

    header = ["t"] + [f"{name}{i}" for i in range(params.dim) for name in ("p", "stderr_", "exact_")]
    rows = [[ensemble.schedule.times[n]] + [v for i in range(params.dim) for v in (mean[n, i], stderr[n, i], probs[n, i])]
            for n in range(probs.shape[0])]
    sink.table("occupation", header, rows)
    paths = ensemble.paths()
    for k, path in enumerate(paths[:3]):
        path_header, path_rows = path.csv_rows()
        sink.table(f"path_{k}", path_header, path_rows)

    report = ergodicity_report(paths, list(labels))
    return {
        "paths": ensemble.n_paths,
        "steps": params.steps,
        "max_abs_z": _finite_or_none(float(np.max(np.abs(z)))),
        "antisymmetry_violation": antisymmetry,
        "flagged_steps": ensemble.schedule.flagged_steps,
        "ergodicity": report.to_dict(),
        "path_0_transitions": paths[0].transition_log() if paths else [],
    }


# ---------- Decaying atom ----------
def run_decay_counting(params: DecayCountingParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Photon counting: first-click statistics against the exponential law."""
    gamma, eta = params.gamma, params.eta
    horizon = params.horizon or 3.0 / gamma
    steps = max(1, int(round(horizon / eta)))
    streams = RngStream.family(seed, params.paths)
    ensemble = unravel_ensemble(photon_counting_ops(gamma, eta), excited_state(), steps, eta, streams, params.kept)

    expected = 2.0 * gamma
    fit = fit_decay_rate(ensemble.first_click, steps, eta)
    jitter = np.array([s.child(1).uniform() for s in streams])
    clicked = ensemble.first_click > 0
    ks = ks_statistic(ensemble.first_click, eta, expected, steps, jitter) if clicked.any() else None

    sink.table("jump_times", ["path", "window", "t"],
               [[p, int(ensemble.first_click[p]), (ensemble.first_click[p] - 1.0 + jitter[p]) * eta]
                for p in np.flatnonzero(clicked)])

    times, survival = survival_curve(ensemble.first_click, steps, eta)
    exact = np.exp(-expected * times)
    sink.table("survival", ["t", "survival", "exact"],
               [[times[n], survival[n], exact[n]] for n in _thinned(times.size)])
    trusted = exact >= SURVIVAL_FLOOR
    survival_error = float(np.max(np.abs(survival[trusted] - exact[trusted]) / exact[trusted]))

    sink.table("population", ["t", "mean", "stderr", "exact"],
               [[times[n], ensemble.population_mean[n], ensemble.population_stderr[n], exact[n]]
                for n in _thinned(times.size)])
    for k, record in enumerate(ensemble.kept):
        header, rows = record.csv_rows()
        sink.table(f"trajectory_{k}", header, rows)

    # tau chosen so that lambda = hbar = 1 reproduces this gamma
    kernel = solve_memory_kernel(AtomFieldParams(lambda_coupling=1.0, tau_dispersal=2.0 * gamma, eta=eta), horizon, eta)
    sink.table("memory_kernel", ["t", "population", "exact"],
               [[kernel.times[n], abs(kernel.amplitude[n]) ** 2, math.exp(-expected * kernel.times[n])]
                for n in _thinned(kernel.times.size)])

    logger.info("Decay Scenario: fitted rate %.4f against %.4f", fit.rate, expected)
    return {
        "gamma": gamma,
        "eta": eta,
        "steps": steps,
        "expected_rate": expected,
        "fit": fit.to_dict(),
        "rate_relative_error": abs(fit.rate - expected) / expected,
        "ks": None if ks is None else {"statistic": float(ks.statistic), "pvalue": float(ks.pvalue)},
        "survival_max_relative_error": survival_error,
        "kernel_max_deviation": kernel.max_deviation(),
        "ensemble": ensemble.summary(),
    }


def run_decay_homodyne(params: DecayHomodyneParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Counting and homodyne unravelings of the same decay, compared with exp(-2 gamma t)."""
    gamma = params.gamma
    horizon = params.horizon or 2.0 / gamma
    unravelings = [("counting", 0.0)] + [(f"beta_{beta:g}", beta) for beta in params.betas]
    summaries: Dict[str, dict] = {}
    for k, (name, beta) in enumerate(unravelings):
        eta = homodyne_window(gamma, beta, params.eta_max)
        steps = max(1, int(round(horizon / eta)))
        streams = RngStream.family(seed, params.paths, offset=k * params.paths)
        ensemble = unravel_ensemble(homodyne_ops(gamma, eta, beta), excited_state(), steps, eta, streams, params.kept)
        exact = np.exp(-2.0 * gamma * ensemble.times)

        checks = []
        for fraction in CHECKPOINTS:
            n = int(round(fraction * steps))
            err = ensemble.population_stderr[n]
            z = (ensemble.population_mean[n] - exact[n]) / err if err > 0.0 else 0.0
            checks.append({"t": float(ensemble.times[n]), "mean": float(ensemble.population_mean[n]),
                           "stderr": float(err), "exact": float(exact[n]), "z": float(z)})

        sink.table(f"population_{name}", ["t", "mean", "stderr", "exact"],
                   [[ensemble.times[n], ensemble.population_mean[n], ensemble.population_stderr[n], exact[n]]
                    for n in _thinned(ensemble.times.size)])
        for j, record in enumerate(ensemble.kept):
            header, rows = record.csv_rows()
            sink.table(f"{name}_trajectory_{j}", header, [rows[n] for n in _thinned(len(rows), TRACE_POINTS)])

        summaries[name] = {
            "beta": beta,
            "eta": eta,
            "steps": steps,
            "checkpoints": checks,
            "max_abs_z": max(abs(c["z"]) for c in checks),
            "quadratic_variation": float(ensemble.quadratic_variation.mean()),
            "summary": ensemble.summary(),
        }
        logger.info("Decay Scenario: %s with eta = %.3g over %d windows", name, eta, steps)

    swept = sorted(params.betas)
    variation = [summaries[f"beta_{beta:g}"]["quadratic_variation"] for beta in swept]
    return {
        "gamma": gamma,
        "horizon": horizon,
        "unravelings": summaries,
        "quadratic_variation_by_beta": dict(zip([f"{b:g}" for b in swept], variation)),
        "quadratic_variation_decreasing": bool(np.all(np.diff(variation) < 0.0)),
    }


# ---------- Chaotic rotor ----------
def _rotor_setup(params: RotorModel) -> Tuple[RotorParams, ClassicalRotorState, float]:
    overrides = {name: getattr(params, name) for name in ("asymmetry", "eccentricity") if getattr(params, name) is not None}
    rotor = replace(preset(params.preset), **overrides)
    phi0, ell0 = PRESETS[params.preset]["initial_conditions"][0]
    state0 = ClassicalRotorState(phi0 if params.phi0 is None else params.phi0,
                                 ell0 if params.ell0 is None else params.ell0)
    dt = params.dt or rotor.period / MIN_STEPS_PER_ORBIT
    return rotor, state0, dt


def run_hyperion_classical(params: HyperionClassicalParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    rotor, state0, dt = _rotor_setup(params)
    trajectory = integrate_classical(rotor, state0, (0.0, params.orbits * rotor.period), dt)
    header, rows = trajectory.csv_rows()
    sink.table("trajectory", header, rows)

    duration = params.lyapunov_orbits * rotor.period
    lyap = lyapunov(rotor, state0, duration, dt)
    sink.table("lyapunov_running", ["sample", "lambda"],
               [[n, lyap.running[n]] for n in _thinned(lyap.running.size)])
    areas = tangent_area(rotor, state0, params.liouville_orbits, dt)
    sink.table("tangent_area", ["orbit", "area"], [[k + 1, a] for k, a in enumerate(areas)])

    drift = None
    if rotor.eccentricity == 0.0:
        K = corotating_integral(rotor, trajectory.phi, trajectory.ell, trajectory.times)
        drift = float(np.max(np.abs(K - K[0])))
    return {
        "rotor": {"asymmetry": rotor.asymmetry, "eccentricity": rotor.eccentricity, "period": rotor.period},
        "initial_state": {"phi": state0.phi, "ell": state0.ell},
        "dt": dt,
        "lyapunov": lyap.to_dict(),
        "divergence_rate": divergence_rate(rotor, state0, duration, dt),
        "max_area_deviation": float(np.max(np.abs(areas - 1.0))),
        "kepler_residual": kepler_residual(rotor, trajectory.times),
        "corotating_drift": drift,
    }


def run_hyperion_quantum(params: HyperionQuantumParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Coherent-state evolution of the rotor, its Husimi density and the phase-space cut."""
    rotor, state0, dt = _rotor_setup(params)
    hbar = params.hbar_eff
    delta_x = params.delta_x or math.sqrt(minimum_uncertainty_width(hbar) * params.cell_scale)
    window = max(abs(params.p_min), abs(params.p_max), abs(state0.ell) + 1.0)
    M = choose_truncation(window, hbar, delta_x)
    psi0 = coherent_state(state0.phi, state0.ell, M, hbar, delta_x)

    horizon = params.orbits * rotor.period
    n_steps = max(1, int(math.ceil(horizon / dt - 1e-9)))
    dt = horizon / n_steps
    sample_every = max(1, int(round(1.0 / (params.samples_per_unit * dt))))
    series = rotor_history(psi0, rotor.with_hbar(hbar), 0.0, dt, n_steps, sample_every)
    classical = integrate_classical(rotor, state0, (0.0, horizon), dt)
    indices = np.rint(series.times / dt).astype(int)
    gaps = angle_gap(series.x_mean, classical.phi[indices])
    sink.table("observables", ["t", "x_mean", "p_mean", "spread", "phi_classical", "ell_classical", "gap"],
               [[series.times[k], series.x_mean[k], series.p_mean[k], series.spread[k],
                 classical.phi[i] % (2.0 * math.pi), classical.ell[i], gaps[k]] for k, i in enumerate(indices)])

    fine = PhaseSpaceGrid(params.husimi_x, params.husimi_p, params.p_min, params.p_max)
    norms = {}
    for name, psi in (("initial", psi0), ("final", series.final)):
        rho = husimi(psi, fine)
        norms[name] = husimi_norm(rho, fine, hbar)
        sink.table(f"husimi_{name}", ["x", "p", "rho"],
                   [[x, p, rho[ix, ip]] for ix, x in enumerate(fine.x_centers) for ip, p in enumerate(fine.p_centers)])

    cut = PhaseSpaceGrid.for_ratio(params.cut_ratio, hbar, delta_x, params.p_min, params.p_max)
    cut.check_cut(hbar, delta_x, params.cut_ratio * (1.0 - 1e-9))
    cells = cell_probabilities(series.final, cut)
    sink.table("cell_probabilities", ["cell", "x_center", "p_center", "probability"],
               [[f"x{ix}p{ip}", cut.x_centers[ix], cut.p_centers[ip], cells[ix, ip]]
                for ix in range(cut.x_cells) for ip in range(cut.p_cells)])

    reports = [abelianization_residuals(PhaseSpaceGrid.for_ratio(r, hbar, delta_x, params.p_min, params.p_max),
                                        M, hbar, delta_x) for r in ABELIAN_RATIOS]
    sink.table("abelianization", ["target_ratio", "ratio_x", "ratio_p", "projectivity", "commutator"],
               [[r, rep.ratio[0], rep.ratio[1], rep.projectivity, rep.commutator]
                for r, rep in zip(ABELIAN_RATIOS, reports)])
    projectivity = [rep.projectivity for rep in reports]
    commutator = [rep.commutator for rep in reports]
    return {
        "hbar_eff": hbar,
        "delta_x": delta_x,
        "M": M,
        "steps": n_steps,
        "stopped_early": series.stopped_early,
        "max_gap": float(np.max(gaps)),
        "final_spread": float(series.spread[-1]),
        "husimi_norm": norms,
        "cut": {"x_cells": cut.x_cells, "p_cells": cut.p_cells, "ratio": list(cut.cut_ratios(hbar, delta_x)),
                "probability_total": float(cells.sum()),
                "completeness_residual": grid_completeness(cut, M, hbar, delta_x)},
        "abelianization": [rep.to_dict() for rep in reports],
        "residuals_decreasing": bool(np.all(np.diff(projectivity) <= 0.0) and np.all(np.diff(commutator) <= 0.0)),
    }


def run_ehrenfest_sweep(params: EhrenfestSweepParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Breakdown time against hbar_eff, with a free-rotor control."""
    rotor, state0, dt = _rotor_setup(params)
    header = ["hbar", "delta_x", "M", "t_spread", "t_discrepancy", "horizon"]

    def table(name, result):
        sink.table(name, header, [[p.hbar, p.delta_x, p.M,
                                   math.nan if p.t_spread is None else p.t_spread,
                                   math.nan if p.t_discrepancy is None else p.t_discrepancy,
                                   p.horizon] for p in result.points])

    result = ehrenfest_breakdown(rotor, params.hbar_values, params.threshold, state0,
                                 params.horizon_orbits * rotor.period, dt,
                                 params.lyapunov_orbits * rotor.period, threads)
    table("breakdown", result)
    summary = {"chaotic": result.to_dict(), "slope": result.slope,
               "t_c": None if result.lyapunov is None else _finite_or_none(result.lyapunov.t_c)}

    if params.free_rotor_control:
        free = ehrenfest_breakdown(replace(rotor, asymmetry=0.0), params.hbar_values, params.threshold, state0,
                                   params.control_horizon_orbits * rotor.period, dt, 0.0, threads)
        table("breakdown_free_rotor", free)
        fits = free.fits["spread"]
        summary["free_rotor"] = free.to_dict()
        summary["free_rotor_prefers_power_law"] = (
            None if fits.power_law is None or fits.vs_log_hbar is None
            else fits.power_law.r_squared > fits.vs_log_hbar.r_squared
        )
    return summary


def run_tq_headline(params: TqHeadlineParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Order-of-magnitude breakdown time of a tumbling moon, in SI units."""
    estimate = tq_headline(days(params.t_c_days), params.radius_m, params.mass_kg, params.temperature_k)
    sink.table("headline", ["quantity", "value", "unit"], [
        ["t_c", estimate.t_c_seconds, "s"],
        ["de_broglie", estimate.de_broglie_m, "m"],
        ["log_factor", estimate.log_factor, "1"],
        ["t_q", estimate.t_q_seconds, "s"],
        ["t_q", estimate.t_q_years, "yr"],
    ])
    return estimate.to_dict()


# ---------- Statistical mechanics ----------
def run_ising(params: IsingParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    runs = {}
    for k, temperature in enumerate(params.temperatures):
        rng = RngStream(seed, k)
        if params.start == "up":
            lattice = IsingLattice.uniform(params.L, temperature)
        else:
            lattice = IsingLattice.random(params.L, temperature, rng.child(0))
        run = simulate_ising(lattice, params.sweeps, rng)
        header, rows = run.csv_rows()
        sink.table(f"magnetization_T{temperature:g}", header, rows)
        mean, err = blocked_mean(run.magnetization)
        runs[f"{temperature:g}"] = {
            "mean_magnetization": mean,
            "stderr": err,
            "min_magnetization": float(run.magnetization.min()),
            "final_magnetization": run.final.magnetization,
            "sign_changes": run.sign_changes,
        }

    exact = {}
    if params.exact_check:
        for k, temperature in enumerate(params.temperatures):
            rng = RngStream(seed, len(params.temperatures) + k)
            P = glauber_chain(2, temperature)
            weights = boltzmann_weights(2, temperature)
            stationary = chain_stationary(P)
            run = simulate_ising(IsingLattice.random(2, temperature, rng.child(0)), params.exact_sweeps, rng,
                                 record_states=True)
            frequency, err = empirical_distribution(run.codes, weights.size)
            sink.table(f"exact_T{temperature:g}", ["code", "boltzmann", "stationary", "empirical", "stderr"],
                       [[c, weights[c], stationary[c], frequency[c], err[c]] for c in range(weights.size)])
            with np.errstate(divide="ignore", invalid="ignore"):
                z = np.where(err > 0.0, np.abs(frequency - weights) / err, 0.0)
            exact[f"{temperature:g}"] = {
                "detailed_balance_residual": detailed_balance_residual(2, temperature),
                "stationary_max_deviation": float(np.max(np.abs(stationary - weights))),
                "empirical_max_abs_z": float(z.max()),
            }
    return {"L": params.L, "sweeps": params.sweeps, "start": params.start, "runs": runs, "exact_2x2": exact}


def run_thermalization(params: ThermalizationParams, seed: int, threads: int, sink: ArtifactSink) -> dict:
    """Sector probabilities of a random microcanonical model and the Bell-process time fractions."""
    model = build_microcanonical(params.d_mc, params.sector_dims, RngStream(seed, 0))
    psi0 = start_sector_state(model, 0, RngStream(seed, 1))
    series = thermal_expectations(model, psi0, np.linspace(0.0, params.t_max, params.n_times))
    header, rows = series.csv_rows()
    sink.table("sector_probabilities", header, rows)

    check = bell_ergodicity_check(model, psi0, params.duration, RngStream(seed, 2), params.paths, threads=threads)
    sink.table("path_fractions", ["path"] + list(model.labels),
               [[k] + list(row) for k, row in enumerate(check.path_fractions)])
    bootstrap = fraction_variance(check.path_fractions, RngStream(seed, 4))
    ratio = participation_ratio(model)
    tolerance = 5.0 / math.sqrt(params.d_mc)

    summary = {
        "d_mc": params.d_mc,
        "sector_dims": list(params.sector_dims),
        "series": series.to_dict(),
        "tolerance": tolerance,
        "within_tolerance": bool(np.all(np.abs(series.deviation) <= tolerance)),
        "ergodicity": check.to_dict(),
        "bootstrap_stderr": np.sqrt(bootstrap).tolist(),
        "mean_participation_ratio": float(ratio.mean()),
    }
    if params.block_diagonal_control:
        control_model = build_microcanonical(params.d_mc, params.sector_dims, RngStream(seed, 0), block_diagonal=True)
        control = bell_ergodicity_check(control_model, psi0, params.duration, RngStream(seed, 3), params.paths,
                                        threads=threads)
        summary["block_diagonal_control"] = {
            "cross_sector_transitions": control.report.cross_sector_transitions,
            "fractions": control.fractions.tolist(),
        }
    return summary


class Scenario(NamedTuple):
    run: Callable[..., dict]
    summary: str


SCENARIOS: Dict[str, Scenario] = {
    "polarization": Scenario(run_polarization, "repeated noisy polarization measurements"),
    "modal_pointer": Scenario(run_modal_pointer, "Bell jump process of the two-outcome pointer model"),
    "decay_counting": Scenario(run_decay_counting, "photon-counting unraveling of a decaying atom"),
    "decay_homodyne": Scenario(run_decay_homodyne, "counting vs homodyne unravelings over a beta sweep"),
    "hyperion_classical": Scenario(run_hyperion_classical, "classical chaotic rotor and its Lyapunov exponent"),
    "hyperion_quantum": Scenario(run_hyperion_quantum, "quantum rotor, Husimi density and phase-space cut"),
    "ehrenfest_sweep": Scenario(run_ehrenfest_sweep, "breakdown time against hbar_eff with a free-rotor control"),
    "ising": Scenario(run_ising, "Glauber dynamics of the 2D Ising model"),
    "thermalization": Scenario(run_thermalization, "microcanonical sector probabilities and Bell ergodicity"),
    "tq_headline": Scenario(run_tq_headline, "breakdown time of a tumbling moon in SI units"),
    "modal_toy": Scenario(run_modal_toy, "random few-level Bell-process fidelity run"),
}
