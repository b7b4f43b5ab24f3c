"""
test_flow.py — Unit Tests for Hamiltonians, Systems and the RK4 Flow
"""

import math
import os
import sys
import unittest
from unittest import mock

import numpy as np
import numpy.testing as npt

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config import Tolerances
from dynamics.flow import (
    TangentBlocks,
    flow,
    lagrangian_path,
    tangent_flow,
    time_grid,
    transport_frame,
    uses_compiled_kernel,
)
from dynamics.hamiltonians import FiniteDifferenceHamiltonian, PolyTrigHamiltonian, Term
from dynamics.systems import (
    ConformalSystem,
    build_system,
    damped_pendulum,
    discounted_tonelli,
    free,
    harmonic,
    linear,
    polynomial,
    torus_coupled,
    vector_field,
)
from symplectic.linalg import LagrangianFrame, is_lagrangian, random_lagrangian, random_symplectic
from utils.errors import ConfigError, NonFiniteStateError


class TestHamiltonians(unittest.TestCase):
    """Tests for analytic and finite-difference derivatives."""

    def test_pendulum_derivatives(self):
        H = damped_pendulum(0.0).hamiltonian
        x = np.array([0.7, -0.4])
        grad, hess = H.derivatives(0.0, x)
        npt.assert_allclose(grad, [math.sin(0.7), -0.4], atol=1e-14)
        npt.assert_allclose(hess, [[math.cos(0.7), 0.0], [0.0, 1.0]], atol=1e-14)

    def test_mixed_term_derivatives(self):
        # H = 2 q^2 p sin(3q)
        H = PolyTrigHamiltonian(1, [Term(2.0, (2,), (1,), "sin", (3.0,))])
        q, p = 0.4, -1.3
        grad, hess = H.derivatives(0.0, np.array([q, p]))
        s, c = math.sin(3 * q), math.cos(3 * q)
        dq = 2 * p * (2 * q * s + 3 * q * q * c)
        dp = 2 * q * q * s
        dqq = 2 * p * (2 * s + 12 * q * c - 9 * q * q * s)
        dqp = 2 * (2 * q * s + 3 * q * q * c)
        npt.assert_allclose(grad, [dq, dp], rtol=1e-12)
        npt.assert_allclose(hess, [[dqq, dqp], [dqp, 0.0]], rtol=1e-12, atol=1e-14)

    def test_finite_differences_match_analytic(self):
        analytic = torus_coupled(0.3).hamiltonian
        numeric = FiniteDifferenceHamiltonian(
            lambda t, q, p: 0.5 * p @ p - math.cos(q[0]) - 0.3 * math.cos(q[0] - q[1]), 2,
            autonomous=True,
        )
        x = np.array([0.3, -1.1, 0.5, 0.2])
        g1, h1 = analytic.derivatives(0.0, x)
        g2, h2 = numeric.derivatives(0.0, x)
        npt.assert_allclose(g2, g1, atol=1e-8)
        npt.assert_allclose(h2, h1, atol=1e-4)

    def test_malformed_term_rejected(self):
        with self.assertRaises(ConfigError):
            Term.from_dict({"q_powers": [1]}, 1)
        with self.assertRaises(ConfigError):
            Term.from_dict({"coef": 1.0, "q_powers": [1, 2]}, 1)
        with self.assertRaises(ConfigError):
            Term.from_dict({"coef": 1.0, "trig": "tan", "k": [1.0]}, 1)


class TestVectorField(unittest.TestCase):
    """Tests for q' = H_p, p' = -H_q - a p."""

    def test_free_motion(self):
        qd, pd = vector_field(free(1), 0.0, [0.3], [1.5])
        npt.assert_allclose(qd, [1.5])
        npt.assert_allclose(pd, [0.0])

    def test_damped_pendulum(self):
        q, p = 0.8, -0.6
        qd, pd = vector_field(damped_pendulum(0.1), 0.0, [q], [p])
        npt.assert_allclose(qd, [p], atol=1e-15)
        npt.assert_allclose(pd, [-math.sin(q) - 0.1 * p], atol=1e-15)

    def test_harmonic(self):
        qd, pd = vector_field(harmonic(1), 0.0, [0.2], [0.9])
        npt.assert_allclose(qd, [0.9])
        npt.assert_allclose(pd, [-0.2])

    def test_time_dependent_rate(self):
        system = ConformalSystem(free(1).hamiltonian, rate=lambda t: 2.0 * t)
        self.assertFalse(system.autonomous)
        _, pd = vector_field(system, 0.5, [0.0], [1.0])
        npt.assert_allclose(pd, [-1.0])

    def test_state_length_checked(self):
        with self.assertRaises(ConfigError):
            vector_field(harmonic(2), 0.0, [0.0], [0.0])


class TestBuiltins(unittest.TestCase):
    """Tests for builtin constructors and config-driven system building."""

    def test_build_builtin_with_params(self):
        system = build_system({"builtin": "damped_pendulum", "params": {"rate": 0.25}})
        self.assertEqual(system.rate_at(0.0), 0.25)
        self.assertEqual(system.angle_coords, (True,))

    def test_unknown_builtin_rejected(self):
        with self.assertRaises(ConfigError):
            build_system({"builtin": "kepler"})

    def test_bad_builtin_params_rejected(self):
        with self.assertRaises(ConfigError):
            build_system({"builtin": "harmonic", "params": {"omega": 2.0}})

    def test_unconvertible_builtin_value_rejected(self):
        # float("strong") raises ValueError inside the constructor
        with self.assertRaises(ConfigError):
            build_system({"builtin": "torus_coupled", "params": {"eps": "strong"}})

    def test_coefficient_table_system(self):
        section = {
            "hamiltonian": {"dim": 1, "terms": [{"coef": 0.5, "p_powers": [2]},
                                                {"coef": 0.5, "q_powers": [2]}]},
            "rate": 0.1,
        }
        system = build_system(section)
        npt.assert_allclose(system.field(0.0, np.array([1.0, 2.0])), [2.0, -1.0 - 0.2])

    def test_linear_requires_symmetric_matrix(self):
        with self.assertRaises(ConfigError):
            linear([[0.0, 1.0], [0.0, 0.0]])

    def test_tonelli_potential_must_not_depend_on_p(self):
        with self.assertRaises(ConfigError):
            discounted_tonelli([{"coef": 1.0, "p_powers": [1]}])

    def test_wrap_reduces_angles_only(self):
        system = torus_coupled()
        out = system.wrap(np.array([7.0, -1.0, 7.0, -1.0]))
        npt.assert_allclose(out, [7.0 - 2 * math.pi, 2 * math.pi - 1.0, 7.0, -1.0])


class TestFlow(unittest.TestCase):
    """Tests for RK4 trajectories."""

    def test_free_motion(self):
        traj = flow(free(1), [0.0, 1.0], (0.0, 1.0), 0.1)
        npt.assert_allclose(traj.final, [1.0, 1.0], atol=1e-12)

    def test_harmonic_period(self):
        traj = flow(harmonic(1), [1.0, 0.0], (0.0, 2.0 * math.pi), 1e-3)
        npt.assert_allclose(traj.final, [1.0, 0.0], atol=1e-8)

    def test_backward_integration_returns(self):
        system = damped_pendulum(0.1)
        forward = flow(system, [0.4, 0.3], (0.0, 2.0), 1e-3).final
        back = flow(system, forward, (2.0, 0.0), 1e-3).final
        npt.assert_allclose(back, [0.4, 0.3], atol=1e-9)

    def test_damped_energy_decays(self):
        system = damped_pendulum(0.1)
        traj = flow(system, [0.1, 0.0], (0.0, 30.0), 1e-2)
        energy = np.array([system.energy(0.0, x) for x in traj.states])
        self.assertTrue(np.all(np.diff(energy) <= 1e-10))
        # excess over the well bottom H = -1 decays
        self.assertLess(energy[-1] + 1.0, 0.5 * (energy[0] + 1.0))

    def test_time_grid_hits_checkpoints(self):
        grid = time_grid(0.0, 1.0, 0.3, checkpoints=[0.5])
        self.assertIn(0.5, grid)
        self.assertEqual(grid[0], 0.0)
        self.assertEqual(grid[-1], 1.0)
        self.assertTrue(np.all(np.diff(grid) <= 0.3 + 1e-12))

    def test_time_grid_rejects_nonpositive_step(self):
        with self.assertRaises(ConfigError):
            time_grid(0.0, 1.0, 0.0)

    def test_blowup_raises(self):
        system = linear(np.diag([-1.0, 1.0]))
        with self.assertRaises(NonFiniteStateError):
            flow(system, [1.0, 1.0], (0.0, 1000.0), 0.5)


class TestTangentFlow(unittest.TestCase):
    """Tests for the linearized flow and transported frames."""

    def test_harmonic_matrix_is_rotation(self):
        result = tangent_flow(harmonic(1), [0.0, 0.0], (0.0, 1.3), 1e-3)
        c, s = math.cos(1.3), math.sin(1.3)
        npt.assert_allclose(result.blocks().matrix, [[c, s], [-s, c]], atol=1e-10)

    def test_free_motion_blocks(self):
        result = tangent_flow(free(2), [0.0, 0.0, 1.0, 0.5], (0.0, 2.5), 0.1)
        blocks = result.blocks()
        npt.assert_allclose(blocks.b_t, 2.5 * np.eye(2), atol=1e-12)
        npt.assert_allclose(blocks.d_t, np.eye(2), atol=1e-12)

    def test_conformality_of_builtins(self):
        for rate in (0.0, 0.1, 0.5):
            for system in (harmonic(1, rate), damped_pendulum(rate), torus_coupled(0.1, rate)):
                x0 = np.full(2 * system.dim, 0.3)
                result = tangent_flow(system, x0, (0.0, 10.0), 1e-2)
                self.assertLess(float(np.max(result.conformal_defects())), 1e-6, system.name)
                self.assertAlmostEqual(result.blocks().conformal_factor, math.exp(-10.0 * rate),
                                       places=10)

    def test_equilibrium_is_pinned(self):
        result = tangent_flow(damped_pendulum(0.1), [math.pi, 0.0], (0.0, 50.0), 1e-2,
                              L0=LagrangianFrame.horizontal(1))
        self.assertTrue(result.pinned)
        npt.assert_array_equal(result.trajectory.final, [math.pi, 0.0])

    def test_transported_frame_matches_matrix_image(self):
        L0 = random_lagrangian(2, 8)
        result = tangent_flow(torus_coupled(0.2, 0.1), [0.1, 0.2, 0.3, 0.4], (0.0, 3.0), 1e-3, L0=L0)
        image = LagrangianFrame(result.blocks().matrix @ L0.columns)
        self.assertTrue(image.same_subspace(LagrangianFrame(result.frames[-1]), 1e-8))

    def test_refined_frame_between_samples(self):
        path, result = lagrangian_path(harmonic(1), [0.0, 0.0], LagrangianFrame.horizontal(1),
                                       (0.0, 1.0), 0.1)
        F = path.frame_array_at(0.55)
        expected = np.array([[math.cos(0.55)], [-math.sin(0.55)]])
        self.assertAlmostEqual(abs(float(F[:, 0] @ expected[:, 0])), 1.0, places=9)

    def test_transport_frame(self):
        L = random_lagrangian(2, 1)
        self.assertTrue(transport_frame(TangentBlocks(np.eye(4)), L).same_subspace(L))
        J = np.block([[np.zeros((2, 2)), -np.eye(2)], [np.eye(2), np.zeros((2, 2))]])
        image = transport_frame(TangentBlocks(J), LagrangianFrame.horizontal(2))
        self.assertTrue(image.same_subspace(LagrangianFrame.vertical(2)))
        moved = transport_frame(TangentBlocks(random_symplectic(2, 5)), L)
        self.assertTrue(is_lagrangian(moved.columns))

    def test_compiled_kernel_matches_python_stepper(self):
        system = torus_coupled(0.2, 0.1)
        x0 = [0.1, 0.2, 0.3, 0.4]
        L0 = random_lagrangian(2, 3)
        compiled = tangent_flow(system, x0, (0.0, 2.0), 1e-2, L0=L0)
        with mock.patch("config.COMPILED_RK4", False):
            python = tangent_flow(system, x0, (0.0, 2.0), 1e-2, L0=L0)
        npt.assert_allclose(compiled.trajectory.states, python.trajectory.states, atol=1e-12)
        npt.assert_allclose(compiled.matrices, python.matrices, atol=1e-11)
        npt.assert_allclose(compiled.frames, python.frames, atol=1e-10)
        npt.assert_allclose(compiled.log_factors, python.log_factors, atol=1e-14)

    def test_compiled_kernel_with_time_dependent_rate(self):
        system = ConformalSystem(free(1).hamiltonian, rate=lambda t: 0.1 * t)
        result = tangent_flow(system, [0.0, 1.0], (0.0, 2.0), 1e-2)
        # s = -0.05 t^2, integrated exactly by RK4
        self.assertAlmostEqual(result.log_factors[-1], -0.2, places=12)
        with mock.patch("config.COMPILED_RK4", False):
            python = tangent_flow(system, [0.0, 1.0], (0.0, 2.0), 1e-2)
        npt.assert_allclose(result.trajectory.states, python.trajectory.states, atol=1e-12)

    def test_finite_difference_table_from_config(self):
        section = {
            "hamiltonian": {"dim": 1, "derivatives": "finite-difference",
                            "terms": [{"coef": 0.5, "p_powers": [2]},
                                      {"coef": -1.0, "trig": "cos", "k": [1.0]}]},
            "rate": 0.1,
        }
        numeric = build_system(section)
        self.assertIsInstance(numeric.hamiltonian, FiniteDifferenceHamiltonian)
        self.assertFalse(uses_compiled_kernel(numeric))
        exact = tangent_flow(damped_pendulum(0.1), [0.5, 0.0], (0.0, 2.0), 1e-2)
        approx = tangent_flow(numeric, [0.5, 0.0], (0.0, 2.0), 1e-2)
        npt.assert_allclose(approx.trajectory.final, exact.trajectory.final, atol=1e-7)
        npt.assert_allclose(approx.matrices[-1], exact.matrices[-1], atol=1e-4)

    def test_unknown_derivative_mode_rejected(self):
        with self.assertRaises(ConfigError):
            polynomial(1, [{"coef": 0.5, "p_powers": [2]}], derivatives="symbolic")

    def test_polynomial_system_with_tolerances(self):
        system = polynomial(1, [{"coef": 0.25, "p_powers": [4]}], 0.0)
        tol = Tolerances().with_overrides({"conformal_tol": 1e-5})
        result = tangent_flow(system, [0.0, 1.0], (0.0, 1.0), 1e-3, tol=tol)
        npt.assert_allclose(result.trajectory.final, [1.0, 1.0], atol=1e-10)


if __name__ == '__main__':
    unittest.main()
