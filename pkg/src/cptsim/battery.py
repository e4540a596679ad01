"""Executable verification battery: every checkable claim of the protocol
set, each as one record with a pass criterion, run through the scenario
machinery where a scenario exists and through the library directly where
the check is structural.

`cptsim-verify` runs the whole battery, writes the per-claim artifacts plus
a machine-readable report and a human table, and exits nonzero naming any
failing claim.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import cli
from .atom import FieldConfig, build_interaction_hamiltonian, dark_states
from .errors import NumericalError, ValidationError
from .numerics import evolve_rk4, spectral_norm
from .spinpair import SpinPairConfig, build_pair_hamiltonian, singlet_drive_elements
from .stateprep import QUBIT_MAP


@dataclass(frozen=True)
class ClaimRecord:
    claim_id: str
    title: str
    statement: str
    criterion: str
    run: Callable[["BatteryContext"], tuple[bool, dict]]


@dataclass
class BatteryContext:
    """Shared state across claims: artifact directory and the numerical
    hygiene values harvested from every scenario run."""

    out_dir: Path
    hygiene: list = field(default_factory=list)

    def run_scenario(self, claim_id: str, config: dict) -> tuple[dict, cli.ScenarioOutput]:
        config = dict(config)
        config.setdefault("reproducible", True)
        summary, output = cli.run_scenario(config)
        cli.write_artifacts(summary, output, self.out_dir / claim_id)
        row = {"claim": claim_id, "label": summary["inputs"]["label"]}
        row.update(
            {k: v for k, v in output.diagnostics.items()
             if k in ("trace_drift", "min_eigenvalue", "step_halving_diff", "norm_drift")}
        )
        self.hygiene.append(row)
        return summary, output


# ---------------------------------------------------------------------------
# claim implementations


def _claim_darkness(ctx: BatteryContext) -> tuple[bool, dict]:
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(100):
        mag_p, mag_z = 10.0 ** rng.uniform(-2, 2, size=2)
        phase_p, phase_z = rng.uniform(-math.pi, math.pi, size=2)
        fields = FieldConfig(
            omega_p=mag_p * np.exp(1j * phase_p),
            omega_z=mag_z * np.exp(1j * phase_z),
            detuning=rng.uniform(-2.0, 2.0),
        )
        h = build_interaction_hamiltonian(fields)
        hnorm = spectral_norm(h)
        for state in dark_states(fields):
            worst = max(worst, float(np.linalg.norm(h @ state)) / hnorm)
    return worst <= 1e-12, {"worst_residual_ratio": worst, "bound": 1e-12}


def _claim_pump_endpoints(ctx: BatteryContext) -> tuple[bool, dict]:
    measured = {}
    passed = True
    for which in (0, 1):
        summary, _ = ctx.run_scenario(
            "A2",
            {
                "kind": "pump",
                "label": f"pump{which}",
                "params": {"which": which, "convergence_check": True},
            },
        )
        r = summary["results"]
        measured[f"fidelity_{which}"] = r["fidelity"]
        measured[f"t_settle_{which}"] = r["t_settle"]
        passed = passed and r["converged"] and r["fidelity"] >= 1 - 1e-6 \
            and r["t_settle"] <= 500.0
    measured["bound"] = 1 - 1e-6
    return passed, measured


_A3_BASE = {
    "kind": "bloch",
    "params": {"theta": 1.1, "phi": 0.6, "initial": "random"},
}


def _claim_endpoint_uniqueness(ctx: BatteryContext) -> tuple[bool, dict]:
    rhos = []
    for seed in range(10):
        config = {
            "kind": "bloch",
            "label": f"mixture{seed}",
            "seed": seed,
            "params": dict(_A3_BASE["params"]),
        }
        _, output = ctx.run_scenario("A3", config)
        rhos.append(output.extras["rho"])
    spread = max(float(np.linalg.norm(rho - rhos[0])) for rho in rhos[1:])

    scaled = {}
    for scale in (1.0, 0.8, 1.2):
        config = {
            "kind": "bloch",
            "label": f"rescale{int(scale * 100)}",
            "params": {**_A3_BASE["params"], "initial": "mixed", "rabi_scale": scale},
        }
        _, output = ctx.run_scenario("A3", config)
        scaled[scale] = output.extras["rho"]
    drift = max(
        float(np.linalg.norm(scaled[s] - scaled[1.0])) for s in (0.8, 1.2)
    )
    passed = spread <= 1e-5 and drift <= 1e-4
    return passed, {
        "mixture_spread": spread,
        "mixture_bound": 1e-5,
        "rescale_drift": drift,
        "rescale_bound": 1e-4,
    }


def _claim_adiabatic_flip(ctx: BatteryContext) -> tuple[bool, dict]:
    fidelities = {}
    for t_omega in (200.0, 100.0, 1.0, 0.001):
        config = {
            "kind": "flip",
            "label": f"flip{t_omega:g}".replace(".", "p"),
            "params": {
                "total_rabi": 10.0,
                "ramp_time": t_omega / 10.0,
                "convergence_check": t_omega == 200.0,
            },
        }
        summary, _ = ctx.run_scenario("A4", config)
        fidelities[t_omega] = summary["results"]["flip_fidelity"]
    passed = (
        fidelities[200.0] >= 0.999
        and fidelities[100.0] > fidelities[1.0]
        and fidelities[0.001] <= 0.05
    )
    return passed, {
        "fidelity_at_200": fidelities[200.0],
        "fidelity_at_100": fidelities[100.0],
        "fidelity_at_1": fidelities[1.0],
        "fidelity_sudden": fidelities[0.001],
    }


def _claim_hold_gate(ctx: BatteryContext) -> tuple[bool, dict]:
    omega_dd = 0.05
    period = math.pi / omega_dd
    summary_full, _ = ctx.run_scenario(
        "A5",
        {
            "kind": "cphasehold",
            "label": "hold_full",
            "params": {"omega_dd": omega_dd, "hold_time": period,
                       "convergence_check": True},
        },
    )
    summary_half, _ = ctx.run_scenario(
        "A5",
        {
            "kind": "cphasehold",
            "label": "hold_half",
            "params": {"omega_dd": omega_dd, "hold_time": period / 2.0},
        },
    )
    r = summary_full["results"]
    amp_error = abs(complex(r["amp_10_re"], r["amp_10_im"]) + 1.0)
    transfer = summary_half["results"]["population_01"]
    passed = amp_error <= 1e-6 and abs(transfer - 1.0) <= 1e-6
    return passed, {
        "amp_error_at_period": amp_error,
        "half_period_transfer": transfer,
        "bound": 1e-6,
    }


def _claim_pair_spectrum(ctx: BatteryContext) -> tuple[bool, dict]:
    config = SpinPairConfig(1.0, 1.0, 0.05)
    h = build_pair_hamiltonian(config)
    vals, vecs = np.linalg.eigh(h)
    singlet = np.array([0.0, 1.0, -1.0, 0.0]) / math.sqrt(2.0)
    sym = np.array([0.0, 1.0, 1.0, 0.0]) / math.sqrt(2.0)
    idx_singlet = int(np.argmax(np.abs(vecs.conj().T @ singlet)))
    idx_sym = int(np.argmax(np.abs(vecs.conj().T @ sym)))
    singlet_eig = float(vals[idx_singlet])
    sym_shift = float(vals[idx_sym]) - config.omega1
    overlap = float(abs(vecs[:, idx_singlet].conj() @ singlet))
    el00, el11 = singlet_drive_elements(config, rf_rabi=0.005)
    passed = (
        abs(singlet_eig - config.omega1) <= 1e-12
        and abs(sym_shift - 2.0 * config.omega_dd) <= 1e-12
        and overlap >= 1.0 - 1e-12
        and el00 == 0.0
        and el11 == 0.0
    )
    return passed, {
        "singlet_eigenvalue": singlet_eig,
        "sym_shift": sym_shift,
        "singlet_overlap": overlap,
        "drive_element_to_00": abs(el00),
        "drive_element_to_11": abs(el11),
    }


def _claim_cphase_2pi(ctx: BatteryContext) -> tuple[bool, dict]:
    summary, _ = ctx.run_scenario(
        "A7",
        {
            "kind": "cphase2pi",
            "label": "cphase2pi",
            "params": {"omega_dd": 0.05, "convergence_check": True},
        },
    )
    r = summary["results"]
    passed = (
        r["sym_phase_error"] <= 0.05
        and abs(r["population_change"]["00"]) <= 1e-4
        and abs(r["population_change"]["antisym"]) <= 1e-6
    )
    return passed, {
        "sym_phase": r["phases"]["sym"],
        "sym_phase_error": r["sym_phase_error"],
        "pop_change_00": r["population_change"]["00"],
        "pop_change_antisym": r["population_change"]["antisym"],
    }


def _claim_hetero_selectivity(ctx: BatteryContext) -> tuple[bool, dict]:
    summary, _ = ctx.run_scenario(
        "A8",
        {
            "kind": "hetero",
            "label": "hetero2pi",
            "params": {
                "which": "01-11",
                # a 40x margin between coupling and splitting bounds the
                # worst-case off-resonant transfer below 1e-3 outright
                "rf_rabi": 0.02 / 40.0,
                "convergence_check": True,
            },
        },
    )
    r = summary["results"]
    phase_error = abs(math.remainder(r["phases"]["01"] - math.pi, 2.0 * math.pi))

    # pulse-free evolution must show no exchange between |01> and |10>
    config = SpinPairConfig(1.0, 0.7, 0.02)
    h = build_pair_hamiltonian(config)
    psi0 = np.zeros(4, dtype=complex)
    psi0[2] = 1.0  # |10>
    traj = evolve_rk4(psi0, lambda t, psi: -1j * (h @ psi), 0.0, 200.0, 0.01,
                      snapshot_every=100)
    mixing = float(np.max(np.abs(traj.states[:, 1]) ** 2))

    passed = phase_error <= 0.05 and r["spectator_leakage"] <= 1e-3 and mixing <= 1e-10
    return passed, {
        "phase_01": r["phases"]["01"],
        "phase_error": phase_error,
        "spectator_leakage": r["spectator_leakage"],
        "free_evolution_mixing": mixing,
        "carrier": r["carrier"],
    }


def _claim_controlled_swap(ctx: BatteryContext) -> tuple[bool, dict]:
    summary, _ = ctx.run_scenario(
        "A9",
        {
            "kind": "cswap",
            "label": "cswap",
            "params": {"convergence_check": True},
        },
    )
    r = summary["results"]
    passed = r["swap_population"] >= 0.995 and r["population_change_00"] <= 1e-3
    return passed, {
        "swap_population": r["swap_population"],
        "population_change_00": r["population_change_00"],
        "gate_fidelity_vs_swap": r["gate_fidelity_vs_swap"],
    }


def _claim_numerical_hygiene(ctx: BatteryContext) -> tuple[bool, dict]:
    if not ctx.hygiene:
        return False, {"error": "no scenario diagnostics collected"}
    trace_drift = max((row.get("trace_drift", 0.0) for row in ctx.hygiene), default=0.0)
    min_eig = min((row.get("min_eigenvalue", 0.0) for row in ctx.hygiene), default=0.0)
    halving = max((row.get("step_halving_diff", 0.0) for row in ctx.hygiene), default=0.0)
    norm_drift = max((row.get("norm_drift", 0.0) for row in ctx.hygiene), default=0.0)
    passed = trace_drift <= 1e-9 and min_eig >= -1e-9 and halving <= 1e-7
    return passed, {
        "max_trace_drift": trace_drift,
        "min_density_eigenvalue": min_eig,
        "max_step_halving_diff": halving,
        "max_norm_drift": norm_drift,
        "scenarios_sampled": len(ctx.hygiene),
    }


def _claim_convention_report(ctx: BatteryContext) -> tuple[bool, dict]:
    fields = FieldConfig(omega_p=1.0, omega_z=1.0)
    computed = dark_states(fields)[0]
    # closed-form candidate with the amplitude ratio placed on the |g0>
    # component: (r|g0> - |g-> + |g+>)/sqrt(2 + r^2) at r = 1
    literal = np.zeros(7, dtype=complex)
    literal[0], literal[1], literal[2] = -1.0, 1.0, 1.0
    literal /= math.sqrt(3.0)
    overlap = float(abs(np.vdot(literal, computed)))

    limit_z = float(abs(np.vdot(QUBIT_MAP.zero_state, dark_states(FieldConfig(0, 1.0))[0])) ** 2)
    limit_p = float(abs(np.vdot(QUBIT_MAP.one_state, dark_states(FieldConfig(1.0, 0))[0])) ** 2)
    measured = {
        "computed_state_g_minus_g0_g_plus": [float(x.real) for x in computed[:3]],
        "ratio_on_center_overlap": overlap,
        "pi_beam_limit_matches_zero_state": limit_z,
        "in_plane_limit_matches_one_state": limit_p,
        "note": "the computed trap state carries the drive-amplitude ratio on "
                "the |g+-> components; the ratio-on-center closed form is "
                "reported for comparison, not used as a target",
    }
    (ctx.out_dir / "A11").mkdir(parents=True, exist_ok=True)
    (ctx.out_dir / "A11" / "convention_report.json").write_bytes(
        (json.dumps(measured, sort_keys=True, indent=2) + "\n").encode()
    )
    passed = limit_z >= 1.0 - 1e-12 and limit_p >= 1.0 - 1e-12
    return passed, measured


CLAIMS: list[ClaimRecord] = [
    ClaimRecord(
        "A1", "trap-state darkness",
        "every computed trap state is annihilated by the drive Hamiltonian "
        "across 100 random field configurations",
        "max ||H psi|| / ||H|| <= 1e-12", _claim_darkness,
    ),
    ClaimRecord(
        "A2", "pumping endpoints",
        "pi-beam pumping settles into |0> and in-plane pumping into |1> "
        "from the maximally mixed ground manifold within the time cap",
        "fidelity >= 1 - 1e-6 and t_settle <= 500/gamma", _claim_pump_endpoints,
    ),
    ClaimRecord(
        "A3", "endpoint uniqueness",
        "ten random initial mixtures reach the same steady state, and a "
        "common +-20% intensity rescale barely moves it",
        "mixture spread <= 1e-5 (Frobenius); rescale drift <= 1e-4",
        _claim_endpoint_uniqueness,
    ),
    ClaimRecord(
        "A4", "adiabatic flip",
        "slow plate ramps flip the qubit with high fidelity, faster ramps "
        "degrade, and the sudden limit fails to flip",
        "fidelity(T*Omega=200) >= 0.999; fidelity(100) > fidelity(1); "
        "sudden <= 0.05", _claim_adiabatic_flip,
    ),
    ClaimRecord(
        "A5", "hold-time gate",
        "holding the coupled pair for one exchange period returns |10> with "
        "a sign flip; half a period transfers everything to |01>",
        "|<10|psi(T)> + 1| <= 1e-6; half-period transfer within 1e-6 of 1",
        _claim_hold_gate,
    ),
    ClaimRecord(
        "A6", "pair spectrum",
        "the symmetric combination is shifted by exactly twice the coupling, "
        "the antisymmetric combination stays at the bare splitting and has "
        "exactly zero drive elements to |00> and |11>",
        "shift = 2*omega_dd and singlet eigenvalue = omega_L (1e-12); "
        "drive elements identically zero", _claim_pair_spectrum,
    ),
    ClaimRecord(
        "A7", "full-cycle pulse gate",
        "a full-cycle pulse at the shifted resonance imprints phase pi on "
        "the symmetric state while |00> and the antisymmetric state keep "
        "their populations",
        "phase error <= 0.05 rad; |00> change <= 1e-4; antisymmetric "
        "change <= 1e-6", _claim_cphase_2pi,
    ),
    ClaimRecord(
        "A8", "selective-pulse addressing",
        "with distinct atoms the dipole shift separates the flips into the "
        "doubly-excited state, so a full-cycle pulse on one of them phases "
        "only its own states, and free evolution never exchanges |01> "
        "and |10>",
        "phase pi within 0.05 rad; spectator leakage <= 1e-3; free mixing "
        "<= 1e-10", _claim_hetero_selectivity,
    ),
    ClaimRecord(
        "A9", "controlled swap",
        "two selective pi pulses routed through |11> move the population "
        "of |10> into |01> while |00> stands by",
        "swap population >= 0.995; |00> change <= 1e-3", _claim_controlled_swap,
    ),
    ClaimRecord(
        "A10", "numerical hygiene",
        "every scenario in this battery preserves trace and positivity and "
        "agrees with its half-step rerun",
        "trace drift <= 1e-9; min eigenvalue >= -1e-9; step-halving "
        "difference <= 1e-7", _claim_numerical_hygiene,
    ),
    ClaimRecord(
        "A11", "convention report",
        "the computed three-component trap state is compared against the "
        "ratio-on-center closed form and the single-beam limits pin the "
        "adopted convention",
        "report produced and both single-beam limits match the qubit "
        "states to 1e-12", _claim_convention_report,
    ),
]


def run_all(out_dir: str | Path = "battery_out", verbose: bool = True) -> dict:
    """Run every claim; write report.json and report.txt; return the report."""
    ctx = BatteryContext(out_dir=Path(out_dir))
    ctx.out_dir.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    records = []
    for claim in CLAIMS:
        t0 = time.monotonic()
        try:
            passed, measured = claim.run(ctx)
            error = None
        except (ValidationError, NumericalError, AssertionError) as exc:
            passed, measured, error = False, {}, f"{type(exc).__name__}: {exc}"
        records.append(
            {
                "id": claim.claim_id,
                "title": claim.title,
                "statement": claim.statement,
                "criterion": claim.criterion,
                "passed": passed,
                "measured": measured,
                "error": error,
                "seconds": round(time.monotonic() - t0, 3),
            }
        )
        if verbose:
            status = "PASS" if passed else "FAIL"
            print(f"[{status}] {claim.claim_id} {claim.title}")
    report = {
        "all_passed": all(r["passed"] for r in records),
        "failing": [r["id"] for r in records if not r["passed"]],
        "wall_time_s": round(time.monotonic() - started, 3),
        "claims": records,
        "hygiene_rows": ctx.hygiene,
    }
    (ctx.out_dir / "report.json").write_bytes(
        (json.dumps(report, sort_keys=True, indent=2) + "\n").encode()
    )
    (ctx.out_dir / "report.txt").write_text(format_report(report))
    if verbose:
        print(format_report(report))
    return report


def format_report(report: dict) -> str:
    lines = [
        f"{'claim':<6} {'status':<7} {'sec':>7}  title",
        "-" * 72,
    ]
    for r in report["claims"]:
        status = "PASS" if r["passed"] else "FAIL"
        lines.append(f"{r['id']:<6} {status:<7} {r['seconds']:>7.2f}  {r['title']}")
    lines.append("-" * 72)
    verdict = "all claims passed" if report["all_passed"] \
        else f"FAILING: {', '.join(report['failing'])}"
    lines.append(f"{verdict} in {report['wall_time_s']:.1f} s")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cptsim-verify",
        description="run the full verification battery and write its report",
    )
    parser.add_argument("--out", default="battery_out", help="artifact directory")
    parser.add_argument("--quiet", action="store_true", help="suppress progress lines")
    args = parser.parse_args(argv)
    report = run_all(args.out, verbose=not args.quiet)
    if report["all_passed"]:
        return 0
    print(f"failing claims: {', '.join(report['failing'])}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
