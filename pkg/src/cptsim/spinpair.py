"""Two-atom spin pair with magnetic dipole-dipole coupling and RF-driven
two-qubit gates.

Each atom's qubit is treated as an effective two-level spin with one
Larmor-scale transition frequency.  Pair basis order {|00>, |01>, |10>,
|11>} with bare energies (0, omega2, omega1, omega1+omega2); slot one of
|ab> is atom 1.

Dipole coupling model (hbar = 1):

* identical atoms: the coupling both mixes and shifts the singly-excited
  pair states,  H_dd = omega_dd (|01><10| + |10><01| + |01><01| +
  |10><10|).  The antisymmetric combination stays at exactly omega_L and is
  not RF-coupled to |00> or |11>; the symmetric combination is shifted by
  2*omega_dd.
* distinct atoms: shifts but no mixing, modeled as +omega_dd on |11> alone,
  which puts the two flips into |11> at omega1+omega_dd and omega2+omega_dd
  while the flips out of |00> stay unshifted.

An RF pulse is treated in the rotating frame of its carrier under the
rotating-wave approximation: every single-spin-flip pair acquires a static
coupling element rabi/2 * exp(-i phase), and each level's energy drops by
carrier * (number of up spins).  Selectivity preconditions (coupling at
least ten times below the relevant splittings) keep the dropped
counter-rotating terms irrelevant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalError, ValidationError
from .numerics import Trajectory, evolve_rk4, hermitian_eigs, spectral_norm

HBAR = 1.054571817e-34  # J s
MU0_OVER_4PI = 1e-7  # T^2 m^3 / J

_SQRT2 = math.sqrt(2.0)

# basis indices
I00, I01, I10, I11 = 0, 1, 2, 3
N_UP = np.array([0.0, 1.0, 1.0, 2.0])  # up-spin count per basis state
SYM = np.array([0.0, 1.0, 1.0, 0.0], dtype=complex) / _SQRT2
ANTISYM = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / _SQRT2

# single-spin-flip pairs (lower, upper) reachable by the RF drive
_FLIP_PAIRS = ((I00, I01), (I00, I10), (I01, I11), (I10, I11))


@dataclass(frozen=True)
class SpinPairConfig:
    """Larmor frequencies of the two atoms and the dipole coupling scale."""

    omega1: float
    omega2: float
    omega_dd: float

    def __post_init__(self):
        if self.omega1 <= 0 or self.omega2 <= 0:
            raise ValidationError("Larmor frequencies must be positive")
        if self.omega_dd < 0:
            raise ValidationError(f"omega_dd must be >= 0, got {self.omega_dd}")
        if self.omega_dd > 0.1 * min(self.omega1, self.omega2):
            raise ValidationError(
                "omega_dd must stay at or below 0.1 of the smaller Larmor frequency"
            )

    @property
    def homogeneous(self) -> bool:
        return self.omega1 == self.omega2


@dataclass(frozen=True)
class PhysicalSpinParams:
    """Laboratory-scale inputs: gyromagnetic ratios (rad/s/T), static field
    (T), interatomic distance (m), and the angle between the spins."""

    gamma1: float
    gamma2: float
    b_field: float
    r: float
    theta_s: float
    mu0_over_4pi: float = MU0_OVER_4PI

    def __post_init__(self):
        if self.r <= 0:
            raise ValidationError(f"interatomic distance must be positive, got {self.r}")


@dataclass(frozen=True)
class RfPulse:
    """Radio-frequency drive: carrier and Rabi rate in angular units."""

    carrier: float
    rabi: float
    duration: float
    phase: float = 0.0

    def __post_init__(self):
        if self.rabi <= 0 or self.duration <= 0:
            raise ValidationError("RF pulse needs positive rabi and duration")

    @property
    def area(self) -> float:
        return self.rabi * self.duration


def dipole_shift(p: PhysicalSpinParams) -> float:
    """Dipole-dipole energy shift in angular units (energy over hbar).

    (mu0/4pi) * gamma1*gamma2*hbar / r^3 * (3 cos^2 theta_s - 1), reading
    each magnetic moment as gamma*hbar.  Vanishes at the magic angle
    cos^2 = 1/3 and falls off as 1/r^3.
    """
    geometry = 3.0 * math.cos(p.theta_s) ** 2 - 1.0
    return p.mu0_over_4pi * p.gamma1 * p.gamma2 * HBAR / p.r**3 * geometry


def pair_config_from_physical(p: PhysicalSpinParams) -> SpinPairConfig:
    sideways = PhysicalSpinParams(
        p.gamma1, p.gamma2, p.b_field, p.r, 0.5 * math.pi, p.mu0_over_4pi
    )
    return SpinPairConfig(
        omega1=p.gamma1 * p.b_field,
        omega2=p.gamma2 * p.b_field,
        omega_dd=abs(dipole_shift(sideways)),
    )


@dataclass(frozen=True)
class UnitReport:
    omega1: float
    omega2: float
    omega_dd: float
    khz_per_gauss_1: float
    khz_per_gauss_2: float
    sanity_line: str


def lab_units(p: PhysicalSpinParams) -> UnitReport:
    """Laboratory angular frequencies plus a per-Gauss sanity line.

    Alkali ground-state spins precess at a few hundred kHz per Gauss, so the
    report flags per-Gauss rates far outside [50, 1000] kHz/G.
    """
    config = pair_config_from_physical(p)
    khz1 = p.gamma1 * 1e-4 / (2.0 * math.pi) / 1e3
    khz2 = p.gamma2 * 1e-4 / (2.0 * math.pi) / 1e3
    plausible = all(50.0 <= k <= 1000.0 for k in (khz1, khz2))
    sanity = (
        f"Larmor rates: {khz1:.1f} and {khz2:.1f} kHz per Gauss "
        f"({'inside' if plausible else 'OUTSIDE'} the few-hundred-kHz-per-Gauss "
        f"alkali ground-state range); dipole shift / 2pi = "
        f"{config.omega_dd / (2 * math.pi):.3e} Hz at r = {p.r:.2e} m. "
        f"Magnetic moments are read as gamma*hbar."
    )
    return UnitReport(config.omega1, config.omega2, config.omega_dd, khz1, khz2, sanity)


def build_pair_hamiltonian(config: SpinPairConfig, pulse: RfPulse | None = None) -> np.ndarray:
    """Pair Hamiltonian, 4x4 Hermitian; rotating frame of the pulse carrier
    when a pulse is present, laboratory frame otherwise."""
    h = np.diag([0.0, config.omega2, config.omega1, config.omega1 + config.omega2]).astype(
        complex
    )
    if config.omega_dd != 0.0:
        if config.homogeneous:
            h[I01, I01] += config.omega_dd
            h[I10, I10] += config.omega_dd
            h[I01, I10] += config.omega_dd
            h[I10, I01] += config.omega_dd
        else:
            h[I11, I11] += config.omega_dd
    if pulse is not None:
        h -= pulse.carrier * np.diag(N_UP)
        coupling = 0.5 * pulse.rabi * np.exp(-1j * pulse.phase)
        for lo, hi in _FLIP_PAIRS:
            h[hi, lo] += coupling
            h[lo, hi] += np.conj(coupling)
    return h


def singlet_drive_elements(config: SpinPairConfig, rf_rabi: float) -> tuple[complex, complex]:
    """RF matrix elements from the antisymmetric pair state to |00> and
    |11>.  Identically zero: the drive couples both atoms with the same
    sign, so the antisymmetric combination is dark."""
    pulse = RfPulse(carrier=config.omega1, rabi=rf_rabi, duration=1.0)
    h = build_pair_hamiltonian(config, pulse)
    to_00 = (complex(h[I01, I00]) - complex(h[I10, I00])) / _SQRT2
    to_11 = (complex(h[I01, I11]) - complex(h[I10, I11])) / _SQRT2
    return to_00, to_11


def default_gate_dt(h: np.ndarray) -> float:
    # keeps ||H|| dt at 0.005, which holds the accumulated RK4 truncation on
    # the longest shipped pulses (||H|| T ~ 4e3) below 1e-7 and the
    # per-step unitarity contraction near roundoff
    return 0.005 / max(spectral_norm(h), 1e-12)


def _rk4_flow_matrix(h: np.ndarray, dt: float) -> np.ndarray:
    """One RK4 step for dU/dt = -i H U with constant H, as a matrix.

    The classic step is linear in the state, so it equals multiplication by
    the degree-4 truncation of exp(-i H dt)."""
    a = -1j * dt * h
    eye = np.eye(h.shape[0], dtype=complex)
    r = eye + a / 4.0
    r = eye + (a / 3.0) @ r
    r = eye + (a / 2.0) @ r
    return eye + a @ r


def _propagator(h: np.ndarray, duration: float, dt: float) -> np.ndarray:
    """Fixed-step RK4 propagator over [0, duration] for constant H.

    Identical to stepping the integrator (same discrete flow, same final
    short step), but the constant per-step matrix lets the long gate pulses
    be composed by binary powering."""
    n_steps = max(1, int(np.ceil(duration / dt - 1e-12)))
    last = duration - (n_steps - 1) * dt
    u = np.linalg.matrix_power(_rk4_flow_matrix(h, dt), n_steps - 1)
    u = _rk4_flow_matrix(h, last) @ u
    defect = spectral_norm(u.conj().T @ u - np.eye(h.shape[0]))
    if defect > 1e-8:
        raise NumericalError(f"propagator lost unitarity: defect {defect:.2e}; reduce dt")
    return u


def _state_snapshots(h: np.ndarray, psi0: np.ndarray, duration: float, dt: float,
                     snapshot_every: int) -> Trajectory:
    """Snapshots of the same constant-H RK4 flow applied to one state."""
    n_steps = max(1, int(np.ceil(duration / dt - 1e-12)))
    hop = np.linalg.matrix_power(_rk4_flow_matrix(h, dt), snapshot_every)
    times = [0.0]
    states = [np.asarray(psi0, dtype=complex)]
    k = 0
    while k + snapshot_every < n_steps:
        k += snapshot_every
        times.append(k * dt)
        states.append(hop @ states[-1])
    tail = np.linalg.matrix_power(_rk4_flow_matrix(h, dt), n_steps - 1 - k)
    last = duration - (n_steps - 1) * dt
    times.append(duration)
    states.append(_rk4_flow_matrix(h, last) @ (tail @ states[-1]))
    return Trajectory(np.array(times), np.array(states))


def _exact_propagator(h: np.ndarray, duration: float) -> np.ndarray:
    vals, vecs = hermitian_eigs(h)
    return (vecs * np.exp(-1j * vals * duration)) @ vecs.conj().T


def _phase_distance(phase: float, target: float) -> float:
    return abs(math.remainder(phase - target, 2.0 * math.pi))


@dataclass(frozen=True)
class Cphase2PiResult:
    u_rel: np.ndarray
    phases: dict
    population_change: dict
    sym_phase_error: float
    gate_fidelity_vs_cz: float
    pulse: RfPulse
    effective_area: float
    warnings: list
    trajectory: Trajectory | None = None


def cphase_2pi(
    config: SpinPairConfig,
    rf_rabi: float,
    dt: float | None = None,
    record: int | None = None,
) -> Cphase2PiResult:
    """Full-cycle RF pulse at the shifted pair resonance.

    The carrier sits at omega_L + 2*omega_dd, resonant with the symmetric
    combination; the two-atom symmetric coupling is sqrt(2)*rf_rabi, so the
    duration 2*pi/(sqrt(2)*rf_rabi) closes one cycle.  The symmetric state
    returns with an extra phase pi, the antisymmetric state is exactly dark,
    and |00> and |11> populations return to within the detuned-leakage
    level.  Phases are quoted relative to pulse-free evolution.
    """
    if not config.homogeneous:
        raise ValidationError("the full-cycle phase gate requires identical atoms")
    if config.omega_dd <= 0:
        raise ValidationError("the full-cycle phase gate requires omega_dd > 0")
    warnings = []
    if rf_rabi > config.omega_dd / 10.0:
        warnings.append(
            f"selectivity precondition violated: rf_rabi = {rf_rabi:.3e} exceeds "
            f"omega_dd/10 = {config.omega_dd / 10:.3e}"
        )
    effective_rabi = _SQRT2 * rf_rabi
    pulse = RfPulse(
        carrier=config.omega1 + 2.0 * config.omega_dd,
        rabi=rf_rabi,
        duration=2.0 * math.pi / effective_rabi,
    )
    h_rot = build_pair_hamiltonian(config, pulse)
    h_free_rot = build_pair_hamiltonian(config) - pulse.carrier * np.diag(N_UP)
    if dt is None:
        dt = default_gate_dt(h_rot)
    u = _propagator(h_rot, pulse.duration, dt)
    u_rel = _exact_propagator(h_free_rot, pulse.duration).conj().T @ u

    basis = {
        "00": np.eye(4, dtype=complex)[I00],
        "sym": SYM,
        "antisym": ANTISYM,
        "11": np.eye(4, dtype=complex)[I11],
    }
    phases = {}
    pop_change = {}
    for name, vec in basis.items():
        amp = complex(vec.conj() @ u_rel @ vec)
        phases[name] = float(np.angle(amp))
        pop_change[name] = float(1.0 - abs(amp) ** 2)

    trajectory = None
    if record is not None:
        trajectory = _state_snapshots(h_rot, SYM, pulse.duration, dt, record)

    return Cphase2PiResult(
        u_rel=u_rel,
        phases=phases,
        population_change=pop_change,
        sym_phase_error=_phase_distance(phases["sym"], math.pi),
        gate_fidelity_vs_cz=gate_fidelity(u_rel, np.diag([1, 1, 1, -1]).astype(complex),
                                          mod_local_phases=True),
        pulse=pulse,
        effective_area=effective_rabi * pulse.duration,
        warnings=warnings,
        trajectory=trajectory,
    )


@dataclass(frozen=True)
class HoldResult:
    amp_01: complex
    amp_10: complex
    phase_accumulated: float
    population_01: float
    population_10: float
    trajectory: Trajectory
    phase_series: np.ndarray


def _hold_block_evolution(
    omega_dd_of_t: Callable[[float], float],
    total_time: float,
    dt: float,
    snapshot_every: int,
) -> Trajectory:
    """Evolve |10> in the interaction picture of the singly-excited block.

    The common block diagonal (omega_L plus the dipole diagonal) commutes
    with the exchange term and factors out exactly, leaving only the
    exchange coupling acting on (|01>, |10>)."""
    def rhs(t, psi):
        v = omega_dd_of_t(t)
        out = np.zeros(4, dtype=complex)
        out[I01] = -1j * v * psi[I10]
        out[I10] = -1j * v * psi[I01]
        return out

    psi0 = np.zeros(4, dtype=complex)
    psi0[I10] = 1.0
    return evolve_rk4(psi0, rhs, 0.0, total_time, dt, snapshot_every)


def _unwrapped_exchange_phase(traj: Trajectory) -> np.ndarray:
    # amplitudes follow (cos(theta), -i sin(theta)) on (|10>, |01>);
    # track theta continuously through atan2 of those two signals
    c = traj.states[:, I10].real
    s = (1j * traj.states[:, I01]).real
    return np.unwrap(np.arctan2(s, c))


def cphase_hold(
    config: SpinPairConfig,
    hold_time: float,
    dt: float | None = None,
    snapshot_every: int = 10,
) -> HoldResult:
    """Hold the pair under the exchange coupling with no RF drive.

    Starting from |10>, the block rotates as cos(V t)|10> - i sin(V t)|01>
    with V equal to the exchange matrix element; one full period
    T = pi/V restores the population with a phase pi.
    """
    if not config.homogeneous:
        raise ValidationError("the hold gate requires identical atoms")
    if config.omega_dd <= 0:
        raise ValidationError("the hold gate requires omega_dd > 0")
    if hold_time <= 0:
        raise ValidationError(f"hold_time must be positive, got {hold_time}")
    if dt is None:
        dt = 0.02 / config.omega_dd
    dt = min(dt, hold_time / 16.0)
    traj = _hold_block_evolution(lambda t: config.omega_dd, hold_time, dt, snapshot_every)
    phase_series = _unwrapped_exchange_phase(traj)
    return HoldResult(
        amp_01=complex(traj.final[I01]),
        amp_10=complex(traj.final[I10]),
        phase_accumulated=float(phase_series[-1]),
        population_01=float(abs(traj.final[I01]) ** 2),
        population_10=float(abs(traj.final[I10]) ** 2),
        trajectory=traj,
        phase_series=phase_series,
    )


def ramped_hold(
    config: SpinPairConfig,
    omega_dd_profile: Callable[[float], float],
    total_time: float,
    dt: float | None = None,
    snapshot_every: int = 10,
) -> HoldResult:
    """Hold gate with a time-dependent coupling (atoms moved together and
    apart).  The accumulated exchange phase equals the time integral of the
    coupling profile; the gate condition is integral = pi."""
    if not config.homogeneous:
        raise ValidationError("the hold gate requires identical atoms")
    if total_time <= 0:
        raise ValidationError(f"total_time must be positive, got {total_time}")
    peak = max(abs(omega_dd_profile(t)) for t in np.linspace(0.0, total_time, 101))
    if dt is None:
        # profile kinks cost RK4 two orders locally; a finer default step
        # keeps the accumulated phase good to well under 1e-6
        dt = min(0.002 / max(peak, 1e-12), total_time / 8000.0)
    dt = min(dt, total_time / 16.0)
    traj = _hold_block_evolution(omega_dd_profile, total_time, dt, snapshot_every)
    phase_series = _unwrapped_exchange_phase(traj)
    return HoldResult(
        amp_01=complex(traj.final[I01]),
        amp_10=complex(traj.final[I10]),
        phase_accumulated=float(phase_series[-1]),
        population_01=float(abs(traj.final[I01]) ** 2),
        population_10=float(abs(traj.final[I10]) ** 2),
        trajectory=traj,
        phase_series=phase_series,
    )


TRANSITIONS = ("00-01", "00-10", "01-11", "10-11")
_TRANSITION_INDEX = {
    "00-01": (I00, I01),
    "00-10": (I00, I10),
    "01-11": (I01, I11),
    "10-11": (I10, I11),
}


def transition_frequencies(config: SpinPairConfig) -> dict:
    """Single-flip transition frequencies from the pair Hamiltonian
    eigenvalues (the distinct-atom Hamiltonian is diagonal)."""
    h = build_pair_hamiltonian(config)
    diag = np.diag(h).real
    return {name: float(diag[j] - diag[i]) for name, (i, j) in _TRANSITION_INDEX.items()}


def min_spectral_separation(config: SpinPairConfig, which: str) -> float:
    freqs = transition_frequencies(config)
    carrier = freqs[which]
    return min(abs(freqs[name] - carrier) for name in TRANSITIONS if name != which)


@dataclass(frozen=True)
class SelectivePulseResult:
    u_rel: np.ndarray
    carrier: float
    pulse: RfPulse
    phases: dict
    population_change: dict
    spectator_leakage: float
    min_separation: float
    warnings: list
    trajectory: Trajectory | None = None


def hetero_selective_pulse(
    config: SpinPairConfig,
    which: str,
    area: float,
    rf_rabi: float,
    dt: float | None = None,
    record: int | None = None,
) -> SelectivePulseResult:
    """Drive one named single-flip transition of a distinct-atom pair.

    The carrier sits exactly on the (shifted) transition frequency taken
    from the pair Hamiltonian; the effective Rabi rate on a single-flip
    transition equals rf_rabi, so the duration is area/rf_rabi.  A 2*pi
    area returns the driven pair of levels with phase pi; spectators are
    protected by their detunings.
    """
    if config.homogeneous:
        raise ValidationError("selective pulses require distinct atoms")
    if which not in _TRANSITION_INDEX:
        raise ValidationError(f"unknown transition {which!r}; choose from {TRANSITIONS}")
    if area <= 0:
        raise ValidationError(f"pulse area must be positive, got {area}")
    separation = min_spectral_separation(config, which)
    warnings = []
    if rf_rabi > separation / 10.0:
        warnings.append(
            f"spectral crowding: rf_rabi = {rf_rabi:.3e} exceeds a tenth of the "
            f"minimum transition separation {separation:.3e}"
        )
    carrier = transition_frequencies(config)[which]
    pulse = RfPulse(carrier=carrier, rabi=rf_rabi, duration=area / rf_rabi)
    h_rot = build_pair_hamiltonian(config, pulse)
    h_free_rot = build_pair_hamiltonian(config) - carrier * np.diag(N_UP)
    if dt is None:
        dt = default_gate_dt(h_rot)
    u = _propagator(h_rot, pulse.duration, dt)
    u_rel = _exact_propagator(h_free_rot, pulse.duration).conj().T @ u

    lo, hi = _TRANSITION_INDEX[which]
    phases = {}
    pop_change = {}
    for k, name in enumerate(("00", "01", "10", "11")):
        amp = u_rel[k, k]
        phases[name] = float(np.angle(amp))
        pop_change[name] = float(1.0 - abs(amp) ** 2)
    spectators = [k for k in range(4) if k not in (lo, hi)]
    leakage = max(pop_change[("00", "01", "10", "11")[k]] for k in spectators)

    trajectory = None
    if record is not None:
        psi0 = np.eye(4, dtype=complex)[lo]
        trajectory = _state_snapshots(h_rot, psi0, pulse.duration, dt, record)

    return SelectivePulseResult(
        u_rel=u_rel,
        carrier=carrier,
        pulse=pulse,
        phases=phases,
        population_change=pop_change,
        spectator_leakage=float(leakage),
        min_separation=separation,
        warnings=warnings,
        trajectory=trajectory,
    )


@dataclass(frozen=True)
class ControlledSwapResult:
    u_rel: np.ndarray
    swap_population: float
    gate_fidelity_vs_swap: float
    population_change_00: float
    min_separation: float
    warnings: list
    pulses: tuple


def controlled_swap(
    config: SpinPairConfig,
    rf_rabi: float,
    dt: float | None = None,
) -> ControlledSwapResult:
    """Two-step exchange through |11>: a pi pulse on 10-11 followed by a pi
    pulse on 01-11 maps |10> into |01> (and back), the doubly-shifted
    frequencies making each step selective.  Reports the laboratory-frame
    map relative to free evolution and the population-swap fidelity."""
    if config.homogeneous:
        raise ValidationError("the controlled swap requires distinct atoms")
    warnings = []
    separation = min(
        min_spectral_separation(config, "10-11"), min_spectral_separation(config, "01-11")
    )
    if rf_rabi > separation / 10.0:
        warnings.append(
            f"spectral crowding: rf_rabi = {rf_rabi:.3e} exceeds a tenth of the "
            f"minimum transition separation {separation:.3e}"
        )
    freqs = transition_frequencies(config)
    h_free = build_pair_hamiltonian(config)
    u_lab = np.eye(4, dtype=complex)
    pulses = []
    total_time = 0.0
    for which in ("10-11", "01-11"):
        pulse = RfPulse(carrier=freqs[which], rabi=rf_rabi, duration=math.pi / rf_rabi)
        pulses.append(pulse)
        h_rot = build_pair_hamiltonian(config, pulse)
        step_dt = dt if dt is not None else default_gate_dt(h_rot)
        u_rot = _propagator(h_rot, pulse.duration, step_dt)
        frame_back = np.diag(np.exp(-1j * pulse.carrier * N_UP * pulse.duration))
        u_lab = (frame_back @ u_rot) @ u_lab
        total_time += pulse.duration
    u_rel = _exact_propagator(h_free, total_time).conj().T @ u_lab

    swap_target = np.eye(4, dtype=complex)
    swap_target[[I01, I10]] = swap_target[[I10, I01]]
    return ControlledSwapResult(
        u_rel=u_rel,
        swap_population=float(abs(u_rel[I01, I10]) ** 2),
        gate_fidelity_vs_swap=gate_fidelity(u_rel, swap_target, mod_local_phases=True),
        population_change_00=float(1.0 - abs(u_rel[I00, I00]) ** 2),
        min_separation=separation,
        warnings=warnings,
        pulses=tuple(pulses),
    )


def gate_fidelity(u_sim: np.ndarray, u_target: np.ndarray, mod_local_phases: bool = False) -> float:
    """|Tr(U_target^dag U_sim)| / 4, optionally maximized over single-qubit
    phase frames diag(1, e^{i b}, e^{i a}, e^{i(a+b)}).

    The phase search scans one angle at millirad resolution with the other
    eliminated analytically (max over b of |A + e^{ib} B| is |A| + |B|),
    then refines by golden section.
    """
    u_sim = np.asarray(u_sim, dtype=complex)
    u_target = np.asarray(u_target, dtype=complex)
    for name, u in (("u_sim", u_sim), ("u_target", u_target)):
        if u.shape != (4, 4):
            raise ValidationError(f"{name} must be 4x4")
        if spectral_norm(u.conj().T @ u - np.eye(4)) > 1e-8:
            raise ValidationError(f"{name} is not unitary within 1e-8")
    m = np.diag(u_sim @ u_target.conj().T)
    if not mod_local_phases:
        return float(abs(m.sum()) / 4.0)

    def overlap(a: np.ndarray | float):
        phase = np.exp(1j * np.asarray(a))
        return (np.abs(m[0] + m[2] * phase) + np.abs(m[1] + m[3] * phase)) / 4.0

    grid = np.arange(0.0, 2.0 * math.pi, 1e-3)
    values = overlap(grid)
    k = int(np.argmax(values))
    lo, hi = grid[k] - 1e-3, grid[k] + 1e-3
    gold = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - gold * (b - a), a + gold * (b - a)
    for _ in range(60):
        if overlap(c) > overlap(d):
            b, d = d, c
            c = b - gold * (b - a)
        else:
            a, c = c, d
            d = a + gold * (b - a)
    best = 0.5 * (a + b)
    return float(min(max(overlap(best), values[k]), 1.0))
