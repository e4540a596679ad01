"""Propagation of pure states (Schrodinger) and density matrices (Lindblad)
under time-dependent drive schedules, with steady-state detection.

All evolution is done with the fixed-step RK4 integrator from numerics;
density matrices are propagated as matrices, the Lindblad right-hand side
evaluated term by term (dimension 7 makes superoperator machinery
pointless).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .atom import DecayConfig, FieldConfig, build_collapse_operators, build_interaction_hamiltonian
from .errors import NumericalError, ValidationError
from .numerics import Trajectory, evolve_rk4, hermiticity_defect

NORM_DRIFT_ABORT = 1e-6
TRACE_ABORT = 1e-9
POSITIVITY_ABORT = -1e-9


def _ramp_shape(kind: str, x: float) -> float:
    # fraction completed at normalized time x in [0, 1]
    if kind == "linear":
        return x
    if kind == "sine_squared":
        return math.sin(0.5 * math.pi * x) ** 2
    raise ValidationError(f"unknown ramp kind {kind!r}")


@dataclass(frozen=True)
class Schedule:
    """Drive fields as a function of time over [0, duration]."""

    duration: float
    fields_at: Callable[[float], FieldConfig]
    constant_fields: FieldConfig | None = None

    def __post_init__(self):
        if self.duration <= 0:
            raise ValidationError(f"schedule duration must be positive, got {self.duration}")

    @staticmethod
    def constant(fields: FieldConfig, duration: float) -> "Schedule":
        return Schedule(duration, lambda t: fields, constant_fields=fields)

    @staticmethod
    def ramp(kind: str, start: FieldConfig, stop: FieldConfig, duration: float) -> "Schedule":
        """Interpolate both complex Rabi amplitudes with the named profile."""
        _ramp_shape(kind, 0.0)  # validate kind eagerly

        def fields_at(t: float) -> FieldConfig:
            s = _ramp_shape(kind, min(max(t / duration, 0.0), 1.0))
            return FieldConfig(
                omega_p=start.omega_p + (stop.omega_p - start.omega_p) * s,
                omega_z=start.omega_z + (stop.omega_z - start.omega_z) * s,
                detuning=start.detuning + (stop.detuning - start.detuning) * s,
            )

        return Schedule(duration, fields_at)


def schrodinger_evolve(
    psi0: np.ndarray,
    schedule: Schedule,
    dt: float,
    snapshot_every: int = 1,
) -> Trajectory:
    """Propagate d|psi>/dt = -i H(t) |psi| under the scheduled drive.

    The initial state must be normalized; a norm drift beyond 1e-6 at any
    snapshot aborts, flagging the step size.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1.0) > 1e-10:
        raise ValidationError("initial state must have unit norm within 1e-10")

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        return -1j * (build_interaction_hamiltonian(schedule.fields_at(t)) @ psi)

    traj = evolve_rk4(psi0, rhs, 0.0, schedule.duration, dt, snapshot_every)
    drift = np.abs(np.linalg.norm(traj.states, axis=1) - 1.0)
    if np.max(drift) > NORM_DRIFT_ABORT:
        k = int(np.argmax(drift > NORM_DRIFT_ABORT))
        raise NumericalError(
            f"norm drift {drift[k]:.3e} at t = {traj.times[k]:.6g}; dt = {dt} is too large"
        )
    return traj


class _LindbladRHS:
    """Lindblad generator with the collapse operators stacked once."""

    def __init__(self, schedule: Schedule, decay: DecayConfig):
        self.schedule = schedule
        self.h_static = (
            build_interaction_hamiltonian(schedule.constant_fields)
            if schedule.constant_fields is not None
            else None
        )
        ops = build_collapse_operators(decay)
        self.l_stack = np.stack(ops) if ops else None
        if self.l_stack is not None:
            self.ldag_stack = self.l_stack.conj().transpose(0, 2, 1)
            self.anticomm_half = 0.5 * sum(ld @ l for l, ld in zip(self.l_stack, self.ldag_stack))
        else:
            self.ldag_stack = None
            self.anticomm_half = None

    def __call__(self, t: float, rho: np.ndarray) -> np.ndarray:
        h = self.h_static
        if h is None:
            h = build_interaction_hamiltonian(self.schedule.fields_at(t))
        out = -1j * (h @ rho - rho @ h)
        if self.l_stack is not None:
            out = out + _dissipator(rho, self.l_stack, self.ldag_stack, self.anticomm_half)
        return out


def _dissipator(rho, l_stack, ldag_stack, anticomm_half) -> np.ndarray:
    """sum_k L_k rho L_k^dag - 1/2 {L_k^dag L_k, rho}, stacked over k."""
    jump = (l_stack @ rho @ ldag_stack).sum(axis=0)
    return jump - (anticomm_half @ rho + rho @ anticomm_half)


def _check_density_matrix(rho: np.ndarray, where: str, hard: bool = True):
    defect = hermiticity_defect(rho)
    trace = float(np.trace(rho).real)
    min_eig = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))[0])
    ok = defect <= 1e-9 and abs(trace - 1.0) <= TRACE_ABORT and min_eig >= POSITIVITY_ABORT
    if hard and not ok:
        raise NumericalError(
            f"density matrix invalid {where}: hermiticity defect {defect:.2e}, "
            f"trace {trace!r}, min eigenvalue {min_eig:.2e}"
        )
    return trace, min_eig


def lindblad_evolve(
    rho0: np.ndarray,
    schedule: Schedule,
    decay: DecayConfig,
    dt: float,
    snapshot_every: int = 10,
) -> Trajectory:
    """Propagate drho/dt = -i[H, rho] + dissipator under the scheduled drive.

    Trace and positivity are checked at every snapshot; violations beyond
    1e-9 abort the run.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    if hermiticity_defect(rho0) > 1e-10:
        raise ValidationError("initial density matrix must be Hermitian within 1e-10")
    if abs(np.trace(rho0).real - 1.0) > 1e-10:
        raise ValidationError("initial density matrix must have unit trace within 1e-10")
    if np.linalg.eigvalsh(0.5 * (rho0 + rho0.conj().T))[0] < -1e-10:
        raise ValidationError("initial density matrix must be positive within 1e-10")

    rhs = _LindbladRHS(schedule, decay)
    traj = evolve_rk4(rho0, rhs, 0.0, schedule.duration, dt, snapshot_every)
    for t, rho in zip(traj.times, traj.states):
        _check_density_matrix(rho, f"at t = {t:.6g}")
    return traj


@dataclass(frozen=True)
class SteadyStateResult:
    rho: np.ndarray
    converged: bool
    t_settle: float
    residual: float
    purity: float
    trajectory: Trajectory | None = None


def steady_state(
    rho0: np.ndarray,
    fields: FieldConfig,
    decay: DecayConfig,
    max_time: float = 500.0,
    settle_tol: float = 1e-8,
    dt: float = 0.01,
    record: int | None = None,
) -> SteadyStateResult:
    """Integrate at constant fields until ||drho/dt||_F <= settle_tol * gamma.

    Non-convergence by max_time is reported through the `converged` flag,
    not as an error.  With `record` set, snapshots every `record` steps are
    kept in the result's trajectory for time-series output.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    schedule = Schedule.constant(fields, max_time)
    rhs = _LindbladRHS(schedule, decay)
    threshold = settle_tol * decay.gamma

    chunk_steps = max(1, int(round(1.0 / (decay.gamma * dt))))
    cadence = record if record is not None else chunk_steps
    times = [0.0]
    states = [rho0.copy()]
    rho = rho0.copy()
    t = 0.0
    converged = False
    residual = float(np.linalg.norm(rhs(0.0, rho)))
    while t < max_time - 1e-12:
        span = min(chunk_steps * dt, max_time - t)
        traj = evolve_rk4(rho, rhs, t, t + span, dt, snapshot_every=cadence)
        times.extend(traj.times[1:])
        states.extend(traj.states[1:])
        rho = traj.final
        t = traj.times[-1]
        residual = float(np.linalg.norm(rhs(t, rho)))
        if residual <= threshold:
            converged = True
            break
    _check_density_matrix(rho, f"at t = {t:.6g}")
    return SteadyStateResult(
        rho=rho,
        converged=converged,
        t_settle=float(t),
        residual=residual,
        purity=purity(rho),
        trajectory=Trajectory(np.array(times), np.array(states)) if record is not None else None,
    )


def fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """<target| rho |target>, clipped to [0, 1]."""
    rho = np.asarray(rho, dtype=complex)
    target = np.asarray(target, dtype=complex)
    value = complex(target.conj() @ rho @ target)
    if abs(value.imag) > 1e-10:
        raise NumericalError(f"fidelity has imaginary part {value.imag:.2e}")
    return float(min(max(value.real, 0.0), 1.0))


def purity(rho: np.ndarray) -> float:
    return float(np.trace(rho @ rho).real)


def maximally_mixed_ground() -> np.ndarray:
    rho = np.zeros((7, 7), dtype=complex)
    rho[0, 0] = rho[1, 1] = rho[2, 2] = 1.0 / 3.0
    return rho


def random_ground_mixture(rng: np.random.Generator) -> np.ndarray:
    """Random density matrix supported on the three ground sublevels."""
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    block = a @ a.conj().T
    block /= np.trace(block).real
    rho = np.zeros((7, 7), dtype=complex)
    rho[:3, :3] = block
    return rho
