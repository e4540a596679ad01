"""Six-level F=1 <-> F'=1 atom driven by one pi-polarized and one in-plane
polarized beam, in the rotating frame, plus an aggregate loss/repump sink.

Basis ordering: |g->, |g0>, |g+>, |e->, |e0>, |e+>, |sink>.  The g/e levels
are the m_F = -1, 0, +1 Zeeman sublevels of the two hyperfine manifolds; the
sink stands in for the lower hyperfine level that spontaneous emission can
leak to.

Conventions (fixed here, used everywhere downstream):

* Clebsch-Gordan factors for the 1 -> 1 transition follow Condon-Shortley:
  c(q, m_g) = <1 m_g; 1 q | 1, m_g+q>, so c(0, 0) = 0 (the forbidden
  pi transition), all other allowed factors have magnitude 1/sqrt(2), and
  c(0, -1) = -c(0, +1).
* The in-plane beam is linearly polarized along x and decomposes into
  circular components with amplitudes -omega_p/sqrt(2) (sigma+) and
  +omega_p/sqrt(2) (sigma-).  Together with the CG signs this makes all
  four sigma matrix elements equal to +omega_p/4 and fixes the minus sign
  in the two-component trap state (|g-> - |g+>)/sqrt(2).
* Off-diagonal Rabi elements carry the usual factor 1/2; a common detuning
  enters as -detuning on every excited level (positive detuning = drive
  above resonance).
* Global phase of a trap state is fixed by making its largest-magnitude
  component real positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .errors import ValidationError
from .numerics import null_space, spectral_norm


class Level(IntEnum):
    G_MINUS = 0
    G_ZERO = 1
    G_PLUS = 2
    E_MINUS = 3
    E_ZERO = 4
    E_PLUS = 5
    SINK = 6


N_LEVELS = 7
GROUND = (Level.G_MINUS, Level.G_ZERO, Level.G_PLUS)
EXCITED = (Level.E_MINUS, Level.E_ZERO, Level.E_PLUS)

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

# c(q, m_g): photon polarization q in {-1, 0, +1} takes ground sublevel m_g
# to excited sublevel m_g + q.  Absent keys are forbidden transitions.
CLEBSCH_GORDAN = {
    (0, -1): -_INV_SQRT2,
    (0, 0): 0.0,
    (0, +1): +_INV_SQRT2,
    (+1, -1): -_INV_SQRT2,
    (+1, 0): -_INV_SQRT2,
    (-1, 0): +_INV_SQRT2,
    (-1, +1): +_INV_SQRT2,
}

# Circular decomposition of the in-plane beam (x-polarized in the spherical
# basis): amplitude weights of the sigma+ and sigma- components.
SIGMA_PLUS_WEIGHT = -_INV_SQRT2
SIGMA_MINUS_WEIGHT = +_INV_SQRT2


def coupling(q: int, m_g: int) -> float:
    """Clebsch-Gordan factor for polarization q acting on ground sublevel m_g."""
    return CLEBSCH_GORDAN.get((q, m_g), 0.0)


def _ground_index(m: int) -> int:
    return m + 1


def _excited_index(m: int) -> int:
    return m + 4


@dataclass(frozen=True)
class FieldConfig:
    """Drive fields in units of the excited-state decay rate.

    omega_p and omega_z may be complex; their relative phase is physical.
    Both zero is legal (free atom).
    """

    omega_p: complex = 0.0
    omega_z: complex = 0.0
    detuning: float = 0.0

    def scaled(self, factor: float) -> "FieldConfig":
        return FieldConfig(self.omega_p * factor, self.omega_z * factor, self.detuning)


@dataclass(frozen=True)
class DecayConfig:
    """Spontaneous-emission model: total rate gamma, branching fraction beta
    of each emission event into the sink, and an incoherent repump rate that
    refills the three ground sublevels equally from the sink."""

    gamma: float = 1.0
    loss_fraction_beta: float = 0.0
    repump_rate: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.loss_fraction_beta <= 1.0:
            raise ValidationError(
                f"loss_fraction_beta must lie in [0, 1], got {self.loss_fraction_beta}"
            )
        if self.repump_rate < 0:
            raise ValidationError(f"repump_rate must be >= 0, got {self.repump_rate}")


def _coupling_template(q: int, weight: complex) -> np.ndarray:
    """Lower-triangular template A with A[e, g] = weight/2 * c(q, m_g)."""
    a = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
    for m_g in (-1, 0, +1):
        c = coupling(q, m_g)
        if c != 0.0:
            a[_excited_index(m_g + q), _ground_index(m_g)] = 0.5 * weight * c
    return a


D_EXC = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
for _e in EXCITED:
    D_EXC[_e, _e] = 1.0

# H = omega_z * A_Z + omega_p * A_P + h.c. - detuning * D_EXC; the templates
# are cached against the table object so a swapped-out table takes effect
_template_cache: tuple | None = None


def _templates() -> tuple[np.ndarray, np.ndarray]:
    global _template_cache
    if _template_cache is None or _template_cache[0] is not CLEBSCH_GORDAN:
        a_z = _coupling_template(0, 1.0)
        a_p = _coupling_template(+1, SIGMA_PLUS_WEIGHT) + _coupling_template(
            -1, SIGMA_MINUS_WEIGHT
        )
        _template_cache = (CLEBSCH_GORDAN, a_z, a_p)
    return _template_cache[1], _template_cache[2]


def build_interaction_hamiltonian(fields: FieldConfig) -> np.ndarray:
    """Rotating-frame interaction Hamiltonian, 7x7 Hermitian.

    pi couplings (omega_z) act on g- <-> e- and g+ <-> e+; the sigma+ part of
    omega_p on g- <-> e0 and g0 <-> e+; the sigma- part on g0 <-> e- and
    g+ <-> e0.  The g0 <-> e0 element is identically zero.  The sink row and
    column stay zero: light never touches it.
    """
    a_z, a_p = _templates()
    lower = fields.omega_z * a_z + fields.omega_p * a_p
    h = lower + lower.conj().T
    if fields.detuning != 0.0:
        h = h - fields.detuning * D_EXC
    return h


def build_collapse_operators(decay: DecayConfig) -> list[np.ndarray]:
    """Collapse operators for spontaneous emission, sink loss, and repump.

    One operator per excited -> ground dipole channel with rate
    gamma*(1-beta)*c^2, one sink-loss operator per excited level with rate
    gamma*beta, and three repump operators sink -> g_m at repump_rate/3 each.
    Operators with zero rate are omitted.
    """
    ops: list[np.ndarray] = []
    gamma = decay.gamma
    beta = decay.loss_fraction_beta
    in_manifold = gamma * (1.0 - beta)
    for m_e in (-1, 0, +1):
        e = _excited_index(m_e)
        for q in (-1, 0, +1):
            m_g = m_e - q
            if abs(m_g) > 1:
                continue
            c = coupling(q, m_g)
            rate = in_manifold * c * c
            if rate > 0.0:
                op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
                op[_ground_index(m_g), e] = math.sqrt(rate)
                ops.append(op)
        if gamma * beta > 0.0:
            op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            op[Level.SINK, e] = math.sqrt(gamma * beta)
            ops.append(op)
    if decay.repump_rate > 0.0:
        for g in GROUND:
            op = np.zeros((N_LEVELS, N_LEVELS), dtype=complex)
            op[g, Level.SINK] = math.sqrt(decay.repump_rate / 3.0)
            ops.append(op)
    return ops


def dark_states(fields: FieldConfig, tol: float = 1e-9) -> list[np.ndarray]:
    """Ground-manifold null vectors of the interaction Hamiltonian.

    Returns orthonormal superpositions of |g->, |g0>, |g+> annihilated by the
    drive, with global phase fixed (largest-magnitude component real
    positive).  Null directions supported on the excited manifold or the
    sink are filtered out.
    """
    if fields.omega_p == 0 and fields.omega_z == 0:
        raise ValidationError("dark states are undefined with both beams off")
    h = build_interaction_hamiltonian(fields)
    basis = null_space(h, tol=tol)
    if basis.shape[1] == 0:
        raise AssertionError("no null vectors found for a driven 1 -> 1 manifold")
    # The null space splits exactly by manifold (block structure), but a
    # degenerate SVD may rotate ground and non-ground null directions
    # together; project onto the ground sublevels and re-orthonormalize.
    projected = np.zeros_like(basis)
    projected[:3, :] = basis[:3, :]
    u, s, _ = np.linalg.svd(projected, full_matrices=False)
    states = []
    hnorm = spectral_norm(h)
    for k in range(len(s)):
        if s[k] < 0.5:
            continue
        v = u[:, k]
        residual = float(np.linalg.norm(h @ v))
        assert residual <= 10 * tol * max(hnorm, 1.0), "projected vector left the null space"
        states.append(_fix_phase(v))
    assert states, "driven 1 -> 1 manifold must retain a ground dark state"
    return states


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    phase = v[k] / abs(v[k])
    return v / phase


def mixing_angle(fields: FieldConfig) -> tuple[float, float]:
    """Bloch angles (theta, phi) of the drive configuration.

    theta/2 = atan2(|omega_p|, sqrt(2)*|omega_z|), so theta runs from 0
    (pi beam only) to pi (in-plane beam only); phi is the relative drive
    phase arg(omega_p) - arg(omega_z), wrapped to (-pi, pi].
    """
    if fields.omega_p == 0 and fields.omega_z == 0:
        raise ValidationError("mixing angle is undefined with both beams off")
    theta = 2.0 * math.atan2(abs(fields.omega_p), math.sqrt(2.0) * abs(fields.omega_z))
    phi = np.angle(complex(fields.omega_p)) - np.angle(complex(fields.omega_z))
    phi = math.remainder(phi, 2.0 * math.pi)
    if phi <= -math.pi:
        phi += 2.0 * math.pi
    return theta, phi
