import math

import numpy as np
import pytest

from cptsim.errors import NumericalError, ValidationError
from cptsim.numerics import Trajectory, evolve_rk4, hermitian_eigs, null_space


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


class TestHermitianEigs:
    def test_identity(self):
        vals, vecs = hermitian_eigs(np.eye(3))
        assert np.allclose(vals, [1.0, 1.0, 1.0])

    def test_symmetry_forced_pair(self):
        vals, _ = hermitian_eigs(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert np.allclose(vals, [-1.0, 1.0])

    def test_pair_hamiltonian_block(self):
        # 2x2 singly-excited block (omega + v)*I + v*sigma_x diagonalizes by
        # hand to {omega, omega + 2v}; embedded in the 4x4 ladder
        omega, v = 1.0, 0.05
        h = np.diag([0.0, omega + v, omega + v, 2.0 * omega]).astype(complex)
        h[1, 2] = h[2, 1] = v
        vals, vecs = hermitian_eigs(h)
        assert np.allclose(np.sort(vals), [0.0, omega, omega + 2 * v, 2 * omega], atol=1e-12)
        singlet = np.array([0, 1, -1, 0]) / math.sqrt(2)
        k = int(np.argmin(np.abs(vals - omega)))
        assert abs(abs(vecs[:, k] @ singlet) - 1.0) < 1e-12

    def test_rejects_non_hermitian_with_diagnostic(self):
        m = np.array([[0.0, 1.0], [0.5, 0.0]])
        with pytest.raises(ValidationError, match="asymmetry"):
            hermitian_eigs(m)

    def test_residual_and_reconstruction(self):
        rng = np.random.default_rng(3)
        for dim in (2, 5, 16):
            m = random_hermitian(rng, dim)
            vals, vecs = hermitian_eigs(m)
            norm = np.linalg.norm(m, 2)
            for k in range(dim):
                residual = np.linalg.norm(m @ vecs[:, k] - vals[k] * vecs[:, k])
                assert residual <= 1e-10 * norm
            assert np.allclose(vecs.conj().T @ vecs, np.eye(dim), atol=1e-10)
            rebuilt = (vecs * vals) @ vecs.conj().T
            assert np.max(np.abs(rebuilt - m)) <= 1e-9 * max(norm, 1.0)


class TestNullSpace:
    def test_zero_matrix(self):
        basis = null_space(np.zeros((3, 3)), tol=1e-9)
        assert basis.shape == (3, 3)
        assert np.allclose(basis.conj().T @ basis, np.eye(3), atol=1e-12)

    def test_rank_two_projector(self):
        basis = null_space(np.diag([1.0, 1.0, 0.0]), tol=1e-9)
        assert basis.shape == (3, 1)
        assert abs(abs(basis[2, 0]) - 1.0) < 1e-12

    def test_dimension_matches_small_singular_values(self):
        rng = np.random.default_rng(5)
        m = random_hermitian(rng, 6)
        vals, vecs = np.linalg.eigh(m)
        vals[:2] = 0.0  # two engineered null directions
        m = (vecs * vals) @ vecs.conj().T
        basis = null_space(m, tol=1e-9)
        assert basis.shape[1] == 2
        norm = np.linalg.norm(m, 2)
        for k in range(2):
            assert np.linalg.norm(m @ basis[:, k]) <= 1e-9 * norm

    def test_empty_null_space_is_not_an_error(self):
        assert null_space(np.eye(4), tol=1e-9).shape == (4, 0)

    def test_tol_validated(self):
        with pytest.raises(ValidationError):
            null_space(np.eye(2), tol=0.5)
        with pytest.raises(ValidationError):
            null_space(np.eye(2), tol=0.0)


class TestEvolveRk4:
    def test_pure_phase_rotation(self):
        # d psi/dt = -i omega psi has the exact solution e^{-i omega t}
        traj = evolve_rk4(
            np.array([1.0 + 0j]), lambda t, x: -1j * x, 0.0, math.pi, 1e-3
        )
        assert abs(traj.final[0] - (-1.0)) < 1e-8
        assert traj.times[-1] == math.pi

    def test_zero_generator_is_identity(self):
        x0 = np.array([0.3 + 0.1j, -0.2j])
        traj = evolve_rk4(x0, lambda t, x: np.zeros_like(x), 0.0, 7.0, 0.1)
        assert np.array_equal(traj.final, x0)

    def test_resonant_full_cycle(self):
        # two-level drive at rate w: a 2*pi area returns the state with an
        # overall minus sign (exact solution exp(-i pi sigma_x) = -1)
        w = 1.0
        h = 0.5 * w * np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        psi0 = np.array([1.0, 0.0], dtype=complex)
        traj = evolve_rk4(psi0, lambda t, x: -1j * (h @ x), 0.0, 2 * math.pi / w, 1e-3)
        assert abs(abs(traj.final[0]) ** 2 - 1.0) < 1e-6
        assert abs(traj.final[0] - (-1.0)) < 1e-6

    def test_final_partial_step_lands_exactly(self):
        traj = evolve_rk4(np.array([1.0 + 0j]), lambda t, x: 0.1 * x, 0.0, 1.05, 0.1)
        assert traj.times[-1] == 1.05

    def test_snapshot_cadence(self):
        traj = evolve_rk4(
            np.array([1.0 + 0j]), lambda t, x: 0 * x, 0.0, 1.0, 0.01, snapshot_every=20
        )
        assert len(traj) == 1 + 100 // 20
        assert np.allclose(np.diff(traj.times)[:-1], 0.2)

    def test_nonfinite_abort_names_time(self):
        def rhs(t, x):
            return x * (1e6 if t > 0.5 else 0.0)

        with np.errstate(invalid="ignore", over="ignore"):
            with pytest.raises(NumericalError, match="t = "):
                evolve_rk4(np.array([1.0 + 0j]), rhs, 0.0, 1.0, 0.01)

    def test_validation(self):
        x0 = np.array([1.0 + 0j])
        with pytest.raises(ValidationError):
            evolve_rk4(x0, lambda t, x: x, 0.0, 1.0, -0.1)
        with pytest.raises(ValidationError):
            evolve_rk4(x0, lambda t, x: x, 1.0, 1.0, 0.1)

    def test_step_halving_convergence(self):
        # generic smooth generator: halving the step moves the end state by
        # far less than the shipped 1e-7 budget
        h = np.array([[0.4, 0.3 - 0.2j], [0.3 + 0.2j, -0.1]], dtype=complex)
        psi0 = np.array([1.0, 0.0], dtype=complex)
        rhs = lambda t, x: -1j * ((1 + 0.5 * math.sin(t)) * (h @ x))
        a = evolve_rk4(psi0, rhs, 0.0, 10.0, 0.01).final
        b = evolve_rk4(psi0, rhs, 0.0, 10.0, 0.005).final
        assert np.linalg.norm(a - b) < 1e-7


class TestTrajectory:
    def test_times_must_increase(self):
        with pytest.raises(ValidationError):
            Trajectory(np.array([0.0, 0.0]), np.zeros((2, 3)))

    def test_lengths_must_match(self):
        with pytest.raises(ValidationError):
            Trajectory(np.array([0.0, 1.0]), np.zeros((3, 2)))
