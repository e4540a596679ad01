"""Scenario-driven command line: parse a JSON config, run one protocol,
write a summary JSON and (where meaningful) a time-series CSV.

Config shape:

    {"kind": "...", "params": {...}, "output_dir": ".", "dt": null,
     "seed": 0, "reproducible": false, "label": "..."}

or a batch {"scenarios": [ ...configs... ]}.  Unknown keys anywhere are
rejected by name.  Exit codes: 0 success, 1 validation error, 2 numerical
failure, 3 I/O error.

Column sets are fixed per scenario family:
  atom scenarios (pump/bloch/flip):
    t, p_gminus, p_g0, p_gplus, p_eminus, p_e0, p_eplus, p_sink,
    fid_target, theta_inst
  spin-pair scenarios (cphase2pi/cphasehold/hetero/cswap):
    t, p00, p01, p10, p11, re_c01_10, im_c01_10, phase_accum
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import atom, dynamics, flip, spinpair, stateprep
from .errors import NumericalError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3

ATOM_COLUMNS = [
    "t", "p_gminus", "p_g0", "p_gplus", "p_eminus", "p_e0", "p_eplus",
    "p_sink", "fid_target", "theta_inst",
]
PAIR_COLUMNS = ["t", "p00", "p01", "p10", "p11", "re_c01_10", "im_c01_10", "phase_accum"]
SWEEP_COLUMNS = ["ramp_time", "flip_fidelity", "min_gap", "max_theta_rate"]

_REQUIRED = object()


@dataclass(frozen=True)
class Param:
    default: Any
    kind: type
    help: str


SCENARIO_SCHEMAS: dict[str, dict[str, Param]] = {
    "pump": {
        "which": Param(_REQUIRED, int, "target qubit state, 0 or 1"),
        "pump_rabi": Param(1.0, float, "drive Rabi rate in units of gamma"),
        "detuning": Param(0.0, float, "common optical detuning (0 = resonant)"),
        "gamma": Param(1.0, float, "excited-state decay rate (sets the unit)"),
        "beta": Param(0.0, float, "fraction of emission lost to the sink"),
        "repump_rate": Param(0.0, float, "incoherent sink -> ground refill rate"),
        "max_time": Param(500.0, float, "integration cap in 1/gamma"),
        "settle_tol": Param(1e-8, float, "steady-state residual threshold (x gamma)"),
        "initial": Param("mixed", str, "initial ground state: mixed | random"),
        "rabi_scale": Param(1.0, float, "common factor applied to all drive amplitudes"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "bloch": {
        "theta": Param(_REQUIRED, float, "polar angle of the target state, [0, pi]"),
        "phi": Param(0.0, float, "relative drive phase"),
        "total_rabi": Param(1.0, float, "combined drive strength in units of gamma"),
        "detuning": Param(0.0, float, "common optical detuning (0 = resonant)"),
        "gamma": Param(1.0, float, "excited-state decay rate"),
        "beta": Param(0.0, float, "fraction of emission lost to the sink"),
        "repump_rate": Param(0.0, float, "incoherent sink -> ground refill rate"),
        "max_time": Param(500.0, float, "integration cap in 1/gamma"),
        "settle_tol": Param(1e-8, float, "steady-state residual threshold (x gamma)"),
        "initial": Param("mixed", str, "initial ground state: mixed | random"),
        "rabi_scale": Param(1.0, float, "common factor applied to all drive amplitudes"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "flip": {
        "total_rabi": Param(_REQUIRED, float, "total drive strength along the ramp"),
        "ramp_time": Param(_REQUIRED, float, "plate ramp duration (model time)"),
        "profile": Param("sine_squared", str, "ramp shape: sine_squared | linear"),
        "direction": Param("01", str, "flip direction: 01 (|0> to |1>) or 10"),
        "phi": Param(0.0, float, "relative drive phase held during the ramp"),
        "with_dissipation": Param(False, bool, "rerun with decay and report leakage"),
        "gamma": Param(1.0, float, "decay rate for the dissipative rerun"),
        "beta": Param(0.0, float, "sink branching for the dissipative rerun"),
        "repump_rate": Param(0.0, float, "repump rate for the dissipative rerun"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "sweep": {
        "total_rabi": Param(_REQUIRED, float, "total drive strength along the ramp"),
        "ramp_times": Param(_REQUIRED, list, "grid of ramp durations (>= 3)"),
        "profile": Param("sine_squared", str, "ramp shape: sine_squared | linear"),
        "direction": Param("01", str, "flip direction: 01 or 10"),
    },
    "cphase2pi": {
        "omega_larmor": Param(1.0, float, "common Larmor frequency"),
        "omega_dd": Param(0.05, float, "dipole coupling scale"),
        "rf_rabi": Param(None, float, "RF Rabi rate; default omega_dd/20"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "cphasehold": {
        "omega_larmor": Param(1.0, float, "common Larmor frequency"),
        "omega_dd": Param(0.05, float, "dipole coupling scale"),
        "hold_time": Param(None, float, "hold duration; default pi/omega_dd"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "hetero": {
        "omega1": Param(1.0, float, "Larmor frequency of atom 1"),
        "omega2": Param(0.7, float, "Larmor frequency of atom 2"),
        "omega_dd": Param(0.02, float, "dipole shift on the doubly-excited state"),
        "which": Param("01-11", str, "driven transition: 00-01|00-10|01-11|10-11"),
        "area": Param(2.0 * math.pi, float, "pulse area on the driven transition"),
        "rf_rabi": Param(None, float, "RF Rabi rate; default separation/20"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "cswap": {
        "omega1": Param(1.0, float, "Larmor frequency of atom 1"),
        "omega2": Param(0.7, float, "Larmor frequency of atom 2"),
        "omega_dd": Param(0.02, float, "dipole shift on the doubly-excited state"),
        "rf_rabi": Param(None, float, "RF Rabi rate; default separation/20"),
        "convergence_check": Param(False, bool, "rerun at dt/2 and report the difference"),
    },
    "units": {
        "gamma1": Param(_REQUIRED, float, "gyromagnetic ratio of atom 1 (rad/s/T)"),
        "gamma2": Param(_REQUIRED, float, "gyromagnetic ratio of atom 2 (rad/s/T)"),
        "b_field": Param(_REQUIRED, float, "static field (T)"),
        "r": Param(_REQUIRED, float, "interatomic distance (m)"),
        "theta_s": Param(0.5 * math.pi, float, "angle between the spins (rad)"),
    },
}

SCENARIO_SUMMARIES = {
    "pump": "optically pump into qubit |0> (pi beam) or |1> (in-plane beam) "
            "and score the steady state against the trap-state target",
    "bloch": "pump with both beams at a chosen intensity split and relative "
             "phase to prepare an arbitrary trap-state superposition",
    "flip": "rotate the half-wave plate through a timed ramp so the atom "
            "rides the instantaneous trap state from one qubit to the other",
    "sweep": "flip fidelity versus ramp duration, with gap and rate "
             "diagnostics, to chart the slow-ramp crossover",
    "cphase2pi": "full-cycle RF pulse at the dipole-shifted pair resonance; "
                 "the symmetric pair state returns with an extra phase pi "
                 "while |00> and the dark antisymmetric state sit out",
    "cphasehold": "hold two coupled identical atoms so the exchange "
                  "interaction walks |10> to -|10> over one period",
    "hetero": "frequency-selective pulse on one single-flip transition of a "
              "distinct-atom pair, shifted by the dipole interaction",
    "cswap": "two selective pi pulses routed through |11> move |10> into "
             "|01>, a controlled exchange between distinct atoms",
    "units": "convert laboratory spin parameters to model frequencies and "
             "sanity-check the per-Gauss Larmor rate against the "
             "few-hundred-kHz-per-Gauss alkali scale",
}

TOP_LEVEL_KEYS = {"kind", "params", "output_dir", "dt", "seed", "reproducible", "label"}


@dataclass
class ScenarioOutput:
    results: dict
    diagnostics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    columns: list | None = None
    rows: list | None = None
    extras: dict = field(default_factory=dict)  # in-memory only, never serialized


def _coerce(name: str, value, kind: type):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"parameter {name!r} must be a number, got {value!r}")
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"parameter {name!r} must be an integer, got {value!r}")
        return int(value)
    if kind is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"parameter {name!r} must be a boolean, got {value!r}")
        return value
    if kind is str:
        if not isinstance(value, str):
            raise ValidationError(f"parameter {name!r} must be a string, got {value!r}")
        return value
    if kind is list:
        if not isinstance(value, list):
            raise ValidationError(f"parameter {name!r} must be a list, got {value!r}")
        return list(value)
    raise AssertionError(f"unhandled parameter type {kind}")


def validate_config(config: dict) -> dict:
    """Strict-schema validation; returns the effective config with defaults
    filled in (the same dict shape the summary echoes back)."""
    if not isinstance(config, dict):
        raise ValidationError("config must be a JSON object")
    unknown = set(config) - TOP_LEVEL_KEYS
    if unknown:
        raise ValidationError(f"unknown config key {sorted(unknown)[0]!r}")
    if "kind" not in config:
        raise ValidationError("missing required config key 'kind'")
    kind = config["kind"]
    if kind not in SCENARIO_SCHEMAS:
        raise ValidationError(
            f"unknown scenario kind {kind!r}; choose from {sorted(SCENARIO_SCHEMAS)}"
        )
    schema = SCENARIO_SCHEMAS[kind]
    raw_params = config.get("params", {})
    if not isinstance(raw_params, dict):
        raise ValidationError("'params' must be a JSON object")
    unknown = set(raw_params) - set(schema)
    if unknown:
        raise ValidationError(f"unknown parameter {sorted(unknown)[0]!r} for kind {kind!r}")
    params = {}
    for name, spec in schema.items():
        if name in raw_params:
            value = raw_params[name]
            if value is not None:
                value = _coerce(name, value, spec.kind)
            params[name] = value
        elif spec.default is _REQUIRED:
            raise ValidationError(f"missing required parameter {name!r} for kind {kind!r}")
        else:
            params[name] = spec.default

    dt = config.get("dt")
    if dt is not None:
        dt = _coerce("dt", dt, float)
        if dt <= 0:
            raise ValidationError(f"'dt' must be positive, got {dt}")
    seed = _coerce("seed", config.get("seed", 0), int)
    reproducible = _coerce("reproducible", config.get("reproducible", False), bool)
    output_dir = _coerce("output_dir", config.get("output_dir", "."), str)
    label = _coerce("label", config.get("label", kind), str)
    return {
        "kind": kind,
        "params": params,
        "output_dir": output_dir,
        "dt": dt,
        "seed": seed,
        "reproducible": reproducible,
        "label": label,
    }


# ---------------------------------------------------------------------------
# scenario runners


def _atom_timeseries(traj, target, fields_at):
    rows = []
    for t, state in zip(traj.times, traj.states):
        if state.ndim == 1:
            pops = np.abs(state) ** 2
            fid = float(abs(np.vdot(target(t), state)) ** 2)
        else:
            pops = np.diag(state).real
            fid = dynamics.fidelity(state, target(t))
        fields = fields_at(t)
        theta = atom.mixing_angle(fields)[0] if (fields.omega_p, fields.omega_z) != (0, 0) \
            else 0.0
        rows.append([t, *[float(p) for p in pops], fid, theta])
    return rows


def _hygiene_from_trajectory(traj) -> dict:
    states = traj.states
    if states[0].ndim == 1:
        norms = np.linalg.norm(states, axis=1)
        return {"norm_drift": float(np.max(np.abs(norms - 1.0)))}
    traces = np.einsum("kii->k", states).real
    min_eig = min(float(np.linalg.eigvalsh(0.5 * (s + s.conj().T))[0]) for s in states)
    return {
        "trace_drift": float(np.max(np.abs(traces - 1.0))),
        "min_eigenvalue": min_eig,
    }


def _run_pump(params, dt, rng) -> ScenarioOutput:
    decay = atom.DecayConfig(params["gamma"], params["beta"], params["repump_rate"])
    dt = dt if dt is not None else 0.01 / params["gamma"]
    if params["initial"] not in ("mixed", "random"):
        raise ValidationError(f"parameter 'initial' must be 'mixed' or 'random', "
                              f"got {params['initial']!r}")
    rho0 = dynamics.maximally_mixed_ground() if params["initial"] == "mixed" \
        else dynamics.random_ground_mixture(rng)
    pump_rabi = params["pump_rabi"] * params["rabi_scale"]
    record = max(1, int(round(params["max_time"] / dt / 600)))
    prep = stateprep.prepare_qubit(
        params["which"], decay, pump_rabi, params["max_time"], params["settle_tol"],
        dt, rho0=rho0, record=record, detuning=params["detuning"],
    )
    fields = stateprep.pump_fields(params["which"], pump_rabi, params["detuning"])
    results = {
        "fidelity": prep.fidelity,
        "t_settle": prep.t_settle,
        "converged": prep.converged,
        "purity": prep.purity,
    }
    diagnostics = {"dt": dt, **_hygiene_from_trajectory(prep.trajectory)}
    warnings = [] if prep.converged else ["steady state not reached before max_time"]
    if params["convergence_check"]:
        again = stateprep.prepare_qubit(
            params["which"], decay, pump_rabi, params["max_time"], params["settle_tol"],
            dt / 2.0, rho0=rho0, detuning=params["detuning"],
        )
        diagnostics["step_halving_diff"] = float(np.linalg.norm(again.rho - prep.rho))
    rows = _atom_timeseries(prep.trajectory, lambda t: prep.target, lambda t: fields)
    return ScenarioOutput(results, diagnostics, warnings, ATOM_COLUMNS, rows,
                          extras={"rho": prep.rho})


def _run_bloch(params, dt, rng) -> ScenarioOutput:
    decay = atom.DecayConfig(params["gamma"], params["beta"], params["repump_rate"])
    dt = dt if dt is not None else 0.01 / params["gamma"]
    if params["initial"] not in ("mixed", "random"):
        raise ValidationError(f"parameter 'initial' must be 'mixed' or 'random', "
                              f"got {params['initial']!r}")
    rho0 = dynamics.maximally_mixed_ground() if params["initial"] == "mixed" \
        else dynamics.random_ground_mixture(rng)
    total = params["total_rabi"] * params["rabi_scale"]
    record = max(1, int(round(params["max_time"] / dt / 600)))
    prep = stateprep.prepare_bloch(
        params["theta"], params["phi"], total, decay, params["max_time"],
        params["settle_tol"], dt, rho0=rho0, record=record,
        detuning=params["detuning"],
    )
    fields = stateprep.bloch_fields(params["theta"], params["phi"], total,
                                    params["detuning"])
    results = {
        "fidelity": prep.fidelity,
        "achieved_theta": prep.achieved_theta,
        "achieved_phi": prep.achieved_phi,
        "t_settle": prep.t_settle,
        "converged": prep.converged,
        "purity": prep.purity,
        "fidelity_ratio_on_center": prep.fidelity_ratio_on_center,
    }
    diagnostics = {"dt": dt, **_hygiene_from_trajectory(prep.trajectory)}
    warnings = [] if prep.converged else ["steady state not reached before max_time"]
    if params["convergence_check"]:
        again = stateprep.prepare_bloch(
            params["theta"], params["phi"], total, decay, params["max_time"],
            params["settle_tol"], dt / 2.0, rho0=rho0, detuning=params["detuning"],
        )
        diagnostics["step_halving_diff"] = float(np.linalg.norm(again.rho - prep.rho))
    rows = _atom_timeseries(prep.trajectory, lambda t: prep.target, lambda t: fields)
    return ScenarioOutput(results, diagnostics, warnings, ATOM_COLUMNS, rows,
                          extras={"rho": prep.rho, "target": prep.target})


def _flip_schedule(params) -> flip.HwpSchedule:
    if params["direction"] == "01":
        alpha_start, alpha_stop = 0.0, 0.25 * math.pi
    elif params["direction"] == "10":
        alpha_start, alpha_stop = 0.25 * math.pi, 0.0
    else:
        raise ValidationError(f"parameter 'direction' must be '01' or '10', "
                              f"got {params['direction']!r}")
    return flip.HwpSchedule(
        alpha_start, alpha_stop, params["ramp_time"], params["total_rabi"],
        params["profile"], params.get("phi", 0.0),
    )


def _run_flip(params, dt, rng) -> ScenarioOutput:
    schedule = _flip_schedule(params)
    result = flip.adiabatic_flip(schedule, dt=dt)
    used_dt = (
        dt if dt is not None
        else min(0.05 / schedule.total_rabi, schedule.duration / 50.0)
    )
    results = {
        "flip_fidelity": result.flip_fidelity,
        "min_gap": result.min_gap,
        "max_theta_rate": result.max_theta_rate,
        "tracking_min": result.tracking_min,
    }
    diagnostics = {"dt": used_dt, **_hygiene_from_trajectory(result.trajectory)}
    warnings = []
    if params["convergence_check"]:
        again = flip.adiabatic_flip(schedule, dt=used_dt / 2.0)
        diagnostics["step_halving_diff"] = float(
            np.linalg.norm(again.psi_final - result.psi_final)
        )
    if params["with_dissipation"]:
        decay = atom.DecayConfig(params["gamma"], params["beta"], params["repump_rate"])
        dissipative = flip.adiabatic_flip_dissipative(schedule, decay)
        results["dissipative_flip_fidelity"] = dissipative.flip_fidelity
        results["excited_population_integral"] = dissipative.excited_population_integral
        results["sink_leakage"] = dissipative.sink_leakage
    rows = _atom_timeseries(
        result.trajectory,
        lambda t: atom.dark_states(schedule.fields_at(t))[0],
        schedule.fields_at,
    )
    return ScenarioOutput(results, diagnostics, warnings, ATOM_COLUMNS, rows)


def _run_sweep(params, dt, rng) -> ScenarioOutput:
    ramp_times = [_coerce("ramp_times[]", v, float) for v in params["ramp_times"]]
    if params["direction"] == "01":
        alpha_start, alpha_stop = 0.0, 0.25 * math.pi
    elif params["direction"] == "10":
        alpha_start, alpha_stop = 0.25 * math.pi, 0.0
    else:
        raise ValidationError(f"parameter 'direction' must be '01' or '10', "
                              f"got {params['direction']!r}")
    sweep = flip.ramp_sweep(
        ramp_times, params["total_rabi"], params["profile"], alpha_start, alpha_stop, dt
    )
    rows = [[r.duration, r.flip_fidelity, r.min_gap, r.max_theta_rate] for r in sweep.rows]
    results = {
        "fidelity_increases": sweep.fidelity_increases,
        "best_fidelity": max(r.flip_fidelity for r in sweep.rows),
        "rows": rows,
    }
    return ScenarioOutput(results, {}, [], SWEEP_COLUMNS, rows)


def _pair_timeseries(traj, h_free_rot) -> list:
    vals, vecs = np.linalg.eigh(h_free_rot)
    rows = []
    prev_phase = 0.0
    have_phase = False
    psi_ref = None
    for t, psi in zip(traj.times, traj.states):
        # interaction picture relative to pulse-free evolution in this frame
        psi_i = (vecs * np.exp(1j * vals * t)) @ (vecs.conj().T @ psi)
        if psi_ref is None:
            psi_ref = psi_i.copy()
        pops = np.abs(psi_i) ** 2
        coherence = psi_i[1] * np.conj(psi_i[2])
        amp = complex(np.vdot(psi_ref, psi_i))
        if abs(amp) > 1e-6:
            raw = float(np.angle(amp))
            if have_phase:
                prev_phase += math.remainder(raw - prev_phase, 2.0 * math.pi)
            else:
                prev_phase = raw
                have_phase = True
        rows.append([
            float(t), float(pops[0]), float(pops[1]), float(pops[2]), float(pops[3]),
            float(coherence.real), float(coherence.imag), prev_phase,
        ])
    return rows


def _run_cphase2pi(params, dt, rng) -> ScenarioOutput:
    config = spinpair.SpinPairConfig(
        params["omega_larmor"], params["omega_larmor"], params["omega_dd"]
    )
    rf_rabi = params["rf_rabi"] if params["rf_rabi"] is not None else params["omega_dd"] / 20.0
    result = spinpair.cphase_2pi(config, rf_rabi, dt=dt, record=200)
    results = {
        "phases": result.phases,
        "population_change": result.population_change,
        "sym_phase_error": result.sym_phase_error,
        "gate_fidelity_vs_cz": result.gate_fidelity_vs_cz,
        "carrier": result.pulse.carrier,
        "duration": result.pulse.duration,
        "rf_rabi": rf_rabi,
        "effective_area": result.effective_area,
    }
    diagnostics = {}
    if params["convergence_check"]:
        used_dt = dt if dt is not None else spinpair.default_gate_dt(
            spinpair.build_pair_hamiltonian(config, result.pulse))
        again = spinpair.cphase_2pi(config, rf_rabi, dt=used_dt / 2.0)
        diagnostics["step_halving_diff"] = float(
            spinpair.spectral_norm(again.u_rel - result.u_rel)
        )
    h_free_rot = spinpair.build_pair_hamiltonian(config) \
        - result.pulse.carrier * np.diag(spinpair.N_UP)
    rows = _pair_timeseries(result.trajectory, h_free_rot)
    return ScenarioOutput(results, diagnostics, result.warnings, PAIR_COLUMNS, rows)


def _run_cphasehold(params, dt, rng) -> ScenarioOutput:
    config = spinpair.SpinPairConfig(
        params["omega_larmor"], params["omega_larmor"], params["omega_dd"]
    )
    hold_time = params["hold_time"] if params["hold_time"] is not None \
        else math.pi / params["omega_dd"]
    result = spinpair.cphase_hold(config, hold_time, dt=dt)
    results = {
        "hold_time": hold_time,
        "amp_10_re": result.amp_10.real,
        "amp_10_im": result.amp_10.imag,
        "amp_01_re": result.amp_01.real,
        "amp_01_im": result.amp_01.imag,
        "population_01": result.population_01,
        "population_10": result.population_10,
        "phase_accumulated": result.phase_accumulated,
    }
    diagnostics = {}
    if params["convergence_check"]:
        used_dt = dt if dt is not None else min(0.02 / config.omega_dd, hold_time / 16.0)
        again = spinpair.cphase_hold(config, hold_time, dt=used_dt / 2.0)
        diagnostics["step_halving_diff"] = float(
            np.linalg.norm(again.trajectory.final - result.trajectory.final)
        )
    rows = []
    for t, psi, phase in zip(
        result.trajectory.times, result.trajectory.states, result.phase_series
    ):
        pops = np.abs(psi) ** 2
        coherence = psi[1] * np.conj(psi[2])
        rows.append([
            float(t), float(pops[0]), float(pops[1]), float(pops[2]), float(pops[3]),
            float(coherence.real), float(coherence.imag), float(phase),
        ])
    return ScenarioOutput(results, diagnostics, [], PAIR_COLUMNS, rows)


def _run_hetero(params, dt, rng) -> ScenarioOutput:
    config = spinpair.SpinPairConfig(params["omega1"], params["omega2"], params["omega_dd"])
    if params["which"] not in spinpair.TRANSITIONS:
        raise ValidationError(
            f"parameter 'which' must be one of {spinpair.TRANSITIONS}, "
            f"got {params['which']!r}"
        )
    separation = spinpair.min_spectral_separation(config, params["which"])
    rf_rabi = params["rf_rabi"] if params["rf_rabi"] is not None else separation / 20.0
    result = spinpair.hetero_selective_pulse(
        config, params["which"], params["area"], rf_rabi, dt=dt, record=200
    )
    results = {
        "which": params["which"],
        "carrier": result.carrier,
        "rf_rabi": rf_rabi,
        "area": params["area"],
        "phases": result.phases,
        "population_change": result.population_change,
        "spectator_leakage": result.spectator_leakage,
        "min_separation": result.min_separation,
    }
    diagnostics = {}
    if params["convergence_check"]:
        used_dt = dt if dt is not None else spinpair.default_gate_dt(
            spinpair.build_pair_hamiltonian(config, result.pulse))
        again = spinpair.hetero_selective_pulse(
            config, params["which"], params["area"], rf_rabi, dt=used_dt / 2.0
        )
        diagnostics["step_halving_diff"] = float(
            spinpair.spectral_norm(again.u_rel - result.u_rel)
        )
    h_free_rot = spinpair.build_pair_hamiltonian(config) \
        - result.carrier * np.diag(spinpair.N_UP)
    rows = _pair_timeseries(result.trajectory, h_free_rot)
    return ScenarioOutput(results, diagnostics, result.warnings, PAIR_COLUMNS, rows)


def _run_cswap(params, dt, rng) -> ScenarioOutput:
    config = spinpair.SpinPairConfig(params["omega1"], params["omega2"], params["omega_dd"])
    separation = min(
        spinpair.min_spectral_separation(config, "10-11"),
        spinpair.min_spectral_separation(config, "01-11"),
    )
    rf_rabi = params["rf_rabi"] if params["rf_rabi"] is not None else separation / 20.0
    result = spinpair.controlled_swap(config, rf_rabi, dt=dt)
    results = {
        "swap_population": result.swap_population,
        "gate_fidelity_vs_swap": result.gate_fidelity_vs_swap,
        "population_change_00": result.population_change_00,
        "min_separation": result.min_separation,
        "rf_rabi": rf_rabi,
        "pulse_durations": [p.duration for p in result.pulses],
    }
    diagnostics = {}
    if params["convergence_check"]:
        if dt is None:
            h0 = spinpair.build_pair_hamiltonian(config, result.pulses[0])
            half_dt = spinpair.default_gate_dt(h0) / 2.0
        else:
            half_dt = dt / 2.0
        again = spinpair.controlled_swap(config, rf_rabi, dt=half_dt)
        diagnostics["step_halving_diff"] = float(
            spinpair.spectral_norm(again.u_rel - result.u_rel)
        )
    return ScenarioOutput(results, diagnostics, result.warnings, None, None)


def _run_units(params, dt, rng) -> ScenarioOutput:
    physical = spinpair.PhysicalSpinParams(
        params["gamma1"], params["gamma2"], params["b_field"], params["r"],
        params["theta_s"],
    )
    report = spinpair.lab_units(physical)
    results = {
        "omega1": report.omega1,
        "omega2": report.omega2,
        "omega_dd": report.omega_dd,
        "omega1_hz": report.omega1 / (2.0 * math.pi),
        "omega2_hz": report.omega2 / (2.0 * math.pi),
        "omega_dd_hz": report.omega_dd / (2.0 * math.pi),
        "khz_per_gauss_1": report.khz_per_gauss_1,
        "khz_per_gauss_2": report.khz_per_gauss_2,
        "sanity_line": report.sanity_line,
        "dipole_shift_at_theta": spinpair.dipole_shift(physical),
    }
    return ScenarioOutput(results, {}, [], None, None)


RUNNERS = {
    "pump": _run_pump,
    "bloch": _run_bloch,
    "flip": _run_flip,
    "sweep": _run_sweep,
    "cphase2pi": _run_cphase2pi,
    "cphasehold": _run_cphasehold,
    "hetero": _run_hetero,
    "cswap": _run_cswap,
    "units": _run_units,
}


# ---------------------------------------------------------------------------
# artifact writing and entry points


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def run_scenario(config: dict) -> tuple[dict, ScenarioOutput]:
    """Validate and execute one scenario config; returns the summary dict
    and the raw scenario output (no files written)."""
    effective = validate_config(config)
    rng = np.random.default_rng(effective["seed"])
    output = RUNNERS[effective["kind"]](effective["params"], effective["dt"], rng)
    summary = {
        "inputs": effective,
        "results": output.results,
        "diagnostics": output.diagnostics,
        "warnings": output.warnings,
    }
    if not effective["reproducible"]:
        import datetime

        summary["meta"] = {
            "written_at": datetime.datetime.now(datetime.timezone.utc).isoformat()
        }
    return summary, output


def write_artifacts(summary: dict, output: ScenarioOutput, directory: Path) -> None:
    """Write <label>_summary.json and, when there is a time series,
    <label>_timeseries.csv into the directory."""
    label = summary["inputs"]["label"]
    directory.mkdir(parents=True, exist_ok=True)
    (directory / f"{label}_summary.json").write_bytes(_json_bytes(summary))
    if output.columns is not None:
        with open(directory / f"{label}_timeseries.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(output.columns)
            writer.writerows(
                [[f"{v:.12g}" if isinstance(v, float) else v for v in row]
                 for row in output.rows]
            )


def run(config: dict, out_dir: str | None = None) -> int:
    """Execute one scenario and write its artifacts; returns the exit code."""
    try:
        summary, output = run_scenario(config)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    directory = Path(out_dir if out_dir is not None else summary["inputs"]["output_dir"])
    try:
        write_artifacts(summary, output, directory)
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    key_results = {k: v for k, v in summary["results"].items()
                   if isinstance(v, (int, float, bool))}
    print(f"{summary['inputs']['label']}: ok {key_results}")
    return EXIT_OK


def list_scenarios() -> str:
    lines = ["available scenario kinds:", ""]
    for kind in sorted(SCENARIO_SCHEMAS):
        lines.append(f"{kind}: {SCENARIO_SUMMARIES[kind]}")
        for name, spec in SCENARIO_SCHEMAS[kind].items():
            default = "(required)" if spec.default is _REQUIRED else f"default {spec.default!r}"
            lines.append(f"    {name:<20} {default:<22} {spec.help}")
        lines.append("")
    return "\n".join(lines)


def _apply_override(config: dict, assignment: str):
    if "=" not in assignment:
        raise ValidationError(f"--set expects key=value, got {assignment!r}")
    path, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    keys = path.split(".")
    target = config
    for key in keys[:-1]:
        target = target.setdefault(key, {})
        if not isinstance(target, dict):
            raise ValidationError(f"cannot override through non-object key {key!r}")
    target[keys[-1]] = value


def _run_one(args_tuple) -> int:
    config, out_dir = args_tuple
    return run(config, out_dir)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cptsim",
        description="trap-state qubit simulator: preparation, flips, and "
                    "spin-pair gates driven by JSON scenario configs",
    )
    parser.add_argument("--config", help="path to a scenario config (JSON)")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config entry (dotted keys, repeatable)")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--reproducible", action="store_true",
                        help="omit timestamps so identical configs give identical bytes")
    parser.add_argument("--jobs", type=int, default=1,
                        help="parallel workers for batch configs")
    parser.add_argument("--list", action="store_true", help="print the scenario catalog")
    args = parser.parse_args(argv)

    if args.list:
        print(list_scenarios())
        return EXIT_OK
    if not args.config:
        parser.print_usage(sys.stderr)
        print("error: --config is required unless --list is given", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if isinstance(config, dict) and "scenarios" in config:
        extra = set(config) - {"scenarios"}
        if extra:
            print(f"error: unknown config key {sorted(extra)[0]!r}", file=sys.stderr)
            return EXIT_VALIDATION
        batch = config["scenarios"]
    else:
        batch = [config]

    for entry in batch:
        if not isinstance(entry, dict):
            print("error: each scenario must be a JSON object", file=sys.stderr)
            return EXIT_VALIDATION
        for assignment in args.set:
            try:
                _apply_override(entry, assignment)
            except ValidationError as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_VALIDATION
        if args.reproducible:
            entry["reproducible"] = True

    if args.jobs > 1 and len(batch) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_run_one, [(entry, args.out) for entry in batch]))
    else:
        codes = [run(entry, args.out) for entry in batch]
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
