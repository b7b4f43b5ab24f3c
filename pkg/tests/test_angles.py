"""
test_angles.py — Unit Tests for Unitary Frames, Angles and Δ
"""

import cmath
import math
import os
import sys
import unittest

import numpy as np
import numpy.testing as npt

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from symplectic.angles import angles, delta, half_arguments, souriau, unitary_frame
from symplectic.linalg import LagrangianFrame, random_lagrangian


def _line(theta):
    return LagrangianFrame(np.array([[math.cos(theta)], [math.sin(theta)]]))


class TestUnitaryFrame(unittest.TestCase):
    """Tests for Z = A_q + i A_p."""

    def test_random_frames_give_unitary_matrices(self):
        for seed in range(50):
            Z = unitary_frame(random_lagrangian(3, seed))
            npt.assert_allclose(Z.conj().T @ Z, np.eye(3), atol=1e-10)

    def test_vertical_gives_imaginary_identity_up_to_rotation(self):
        Z = unitary_frame(LagrangianFrame.vertical(2))
        npt.assert_allclose(Z @ Z.T, -np.eye(2), atol=1e-12)


class TestSouriauAndAngles(unittest.TestCase):
    """Tests for the Souriau map and angle spectra."""

    def test_horizontal(self):
        npt.assert_allclose(souriau(LagrangianFrame.horizontal(2)), np.eye(2), atol=1e-12)
        npt.assert_allclose(angles(LagrangianFrame.horizontal(2)).angles, [0.0, 0.0], atol=1e-12)

    def test_vertical_angles_are_pinned_to_half_pi(self):
        spectrum = angles(LagrangianFrame.vertical(3))
        npt.assert_array_equal(spectrum.angles, [math.pi / 2] * 3)
        self.assertEqual(spectrum.vertical_count(), 3)

    def test_line_of_slope_tan_theta(self):
        for theta in (-1.2, -0.3, 0.4, 1.1):
            W = souriau(_line(theta))
            self.assertAlmostEqual(complex(W[0, 0]), cmath.exp(2j * theta), places=12)

    def test_mixed_plane(self):
        L = LagrangianFrame(np.column_stack([[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]))
        npt.assert_allclose(angles(L).angles, [0.0, math.pi / 2], atol=1e-12)
        self.assertEqual(angles(L).vertical_count(), 1)

    def test_half_arguments_branch(self):
        out = half_arguments(np.array([1.0, 1j, -1.0 + 1e-14j, -1.0 - 1e-14j]))
        npt.assert_allclose(out, [0.0, math.pi / 4, math.pi / 2, math.pi / 2], atol=1e-12)


class TestDelta(unittest.TestCase):
    """Tests for Δ(L) = (-1)^d det(Z)^2."""

    def test_vertical_has_delta_one(self):
        for d in (1, 2, 3):
            self.assertAlmostEqual(delta(LagrangianFrame.vertical(d)).value, 1.0, places=12)

    def test_horizontal_line_has_delta_minus_one(self):
        self.assertAlmostEqual(delta(LagrangianFrame.horizontal(1)).value, -1.0, places=12)

    def test_quarter_line(self):
        value = delta(_line(math.pi / 4)).value
        self.assertAlmostEqual(value, cmath.exp(1.5j * math.pi), places=12)

    def test_frame_independence(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            L = random_lagrangian(3, seed)
            base = delta(L).value
            base_angles = angles(L).angles
            for _ in range(10):
                R = rng.standard_normal((3, 3)) + 3.0 * np.eye(3)
                other = LagrangianFrame(L.columns @ R)
                self.assertAlmostEqual(delta(other).value, base, places=9)
                npt.assert_allclose(angles(other).angles, base_angles, atol=1e-9)


if __name__ == '__main__':
    unittest.main()
