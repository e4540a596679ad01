"""Desk-scale simulator for trap-state qubits in a driven six-level atom:
optical-pumping state preparation, adiabatic single-qubit flips, and
magnetic dipole-dipole two-qubit gates, with a scenario CLI and a
verification battery."""

from .atom import (
    CLEBSCH_GORDAN,
    DecayConfig,
    FieldConfig,
    Level,
    build_collapse_operators,
    build_interaction_hamiltonian,
    dark_states,
    mixing_angle,
)
from .dynamics import (
    Schedule,
    fidelity,
    lindblad_evolve,
    purity,
    schrodinger_evolve,
    steady_state,
)
from .errors import NumericalError, ValidationError
from .flip import HwpSchedule, adiabatic_flip, hwp_to_fields, ramp_sweep
from .numerics import Trajectory, evolve_rk4, hermitian_eigs, null_space
from .spinpair import (
    PhysicalSpinParams,
    RfPulse,
    SpinPairConfig,
    build_pair_hamiltonian,
    controlled_swap,
    cphase_2pi,
    cphase_hold,
    dipole_shift,
    gate_fidelity,
    hetero_selective_pulse,
    lab_units,
    ramped_hold,
)
from .stateprep import QUBIT_MAP, prepare_bloch, prepare_qubit

__version__ = "0.1.0"
