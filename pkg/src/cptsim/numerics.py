"""Minimal dense complex linear algebra and fixed-step time integration.

Everything here works on plain numpy arrays of dimension <= 64.  hbar = 1
throughout; all frequencies are angular.  The integrator is classic
fixed-step RK4 with the final partial step shortened to land exactly on the
end time; reproducibility and step-halving checks matter more than adaptive
cleverness at these tiny dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NumericalError, ValidationError

MAX_DIM = 64


def as_square_matrix(m, name: str = "matrix") -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise ValidationError(f"{name} dimension {m.shape[0]} exceeds {MAX_DIM}")
    return m


def spectral_norm(m) -> float:
    return float(np.linalg.norm(np.asarray(m), 2))


def hermiticity_defect(m) -> float:
    """Largest absolute deviation from M = M^dagger."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def hermitian_eigs(m, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvectors as orthonormal columns).
    Rejects input whose asymmetry exceeds tol relative to its magnitude,
    reporting the measured defect.
    """
    m = as_square_matrix(m)
    defect = hermiticity_defect(m)
    scale = max(float(np.max(np.abs(m))) if m.size else 0.0, 1.0)
    if defect > tol * scale:
        raise ValidationError(
            f"matrix is not Hermitian: max asymmetry {defect:.3e} exceeds "
            f"{tol:.1e} * scale {scale:.3e}"
        )
    vals, vecs = np.linalg.eigh(0.5 * (m + m.conj().T))
    return vals, vecs


def null_space(m, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of {v : ||Mv|| <= tol * ||M||}.

    Dimension equals the count of singular values at or below the threshold.
    An empty null space yields a (dim, 0) array, not an error.
    """
    if not 0.0 < tol <= 1e-3:
        raise ValidationError(f"null_space tol must lie in (0, 1e-3], got {tol}")
    m = as_square_matrix(m)
    _, s, vh = np.linalg.svd(m)
    smax = s[0] if s.size else 0.0
    keep = s <= tol * smax
    return vh[keep].conj().T


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered snapshots of an evolving state (vector or matrix)."""

    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        states = np.asarray(self.states)
        if len(times) != len(states):
            raise ValidationError("times and states must have equal length")
        if len(times) > 1 and not np.all(np.diff(times) > 0):
            raise ValidationError("times must be strictly increasing")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.times)


def evolve_rk4(
    x0,
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    t1: float,
    dt: float,
    snapshot_every: int = 1,
) -> Trajectory:
    """Propagate dx/dt = rhs(t, x) with classic fourth-order Runge-Kutta.

    The step grid is t0 + k*dt with the last step shortened to land exactly
    on t1.  Snapshots are recorded every `snapshot_every` steps plus the
    final state.  A NaN/Inf in the state aborts with the time of first
    occurrence.
    """
    if dt <= 0:
        raise ValidationError(f"dt must be positive, got {dt}")
    if t1 <= t0:
        raise ValidationError(f"t1 must exceed t0, got [{t0}, {t1}]")
    if snapshot_every < 1:
        raise ValidationError("snapshot_every must be >= 1")

    x = np.array(x0, dtype=complex)
    span = t1 - t0
    n_steps = max(1, int(np.ceil(span / dt - 1e-12)))
    times = [t0]
    states = [x.copy()]
    for k in range(n_steps):
        t = t0 + k * dt
        h = dt if k < n_steps - 1 else t1 - t
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + (0.5 * h) * k1)
        k3 = rhs(t + 0.5 * h, x + (0.5 * h) * k2)
        k4 = rhs(t + h, x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t_next = t1 if k == n_steps - 1 else t0 + (k + 1) * dt
        if not np.all(np.isfinite(x.view(float))):
            raise NumericalError(f"non-finite state at t = {t_next:.6g}")
        if (k + 1) % snapshot_every == 0 or k == n_steps - 1:
            times.append(t_next)
            states.append(x.copy())
    return Trajectory(np.array(times), np.array(states))
