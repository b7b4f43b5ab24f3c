"""
test_maslov_path.py — Unit Tests for Maslov Indices of Lagrangian Paths

Tests for the angular index, the integer index by the angular identity,
the independent crossing count and the path algebra.
"""

import math
import os
import sys
import unittest
from unittest import mock

import numpy as np
import numpy.testing as npt
from scipy.linalg import expm

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from analysis.maslov_path import (
    LagrangianPath,
    angular_mi,
    crossing_mi,
    index_report,
    maslov_index,
    reduced_path,
    running_maslov,
)
from dynamics.flow import lagrangian_path
from dynamics.systems import free, harmonic, linear
from symplectic.linalg import (
    CoisotropicData,
    LagrangianFrame,
    omega_matrix,
    random_lagrangian,
    vertical_shear,
)
from utils.errors import AliasingError, EndpointOnSigmaError, FrameError, MaslovError


def _line(theta):
    return np.array([[math.cos(theta)], [math.sin(theta)]])


def _rotating_line(theta0, sweep, n=64):
    """Line turning from angle theta0 by `sweep` over t ∈ [0, 1]."""
    return LagrangianPath.from_function(lambda t: _line(theta0 + sweep * t), np.linspace(0.0, 1.0, n))


def _harmonic_path(dt=1e-3):
    path, _ = lagrangian_path(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1),
                              (0.0, 2.0 * math.pi), dt)
    return path


class TestLagrangianPath(unittest.TestCase):
    """Tests for path construction and path algebra."""

    def test_times_must_increase(self):
        frames = [_line(0.1), _line(0.2)]
        with self.assertRaises(ValueError):
            LagrangianPath.from_frames([1.0, 0.5], frames)

    def test_non_lagrangian_sample_rejected(self):
        frames = np.stack([np.eye(4)[:, [0, 2]]] * 2)
        with self.assertRaises(FrameError):
            LagrangianPath(np.array([0.0, 1.0]), frames)

    def test_frames_are_stored_orthonormal(self):
        path = LagrangianPath.from_frames([0.0, 1.0], [3.0 * _line(0.2), 0.5 * _line(0.4)])
        for k in range(path.size):
            npt.assert_allclose(path.frames[k].T @ path.frames[k], np.eye(1), atol=1e-12)

    def test_static_path_is_not_refinable(self):
        path = LagrangianPath.from_frames([0.0, 1.0], [_line(0.1), _line(0.2)])
        self.assertFalse(path.refinable)
        with self.assertRaises(AliasingError):
            path.frame_array_at(0.5)

    def test_concatenation_requires_shared_junction(self):
        first = _rotating_line(0.3, -1.0)
        second = _rotating_line(1.0, -1.0)
        with self.assertRaises(FrameError):
            first.concatenate(second)


class TestAngularIndex(unittest.TestCase):
    """Tests for αMI."""

    def test_constant_path_has_zero_index(self):
        path = LagrangianPath.from_frames([0.0, 1.0, 2.0], [_line(0.4)] * 3)
        self.assertEqual(angular_mi(path), 0.0)
        self.assertEqual(maslov_index(path), 0)

    def test_half_turn_has_index_minus_one(self):
        path = _rotating_line(0.3, -math.pi)
        self.assertAlmostEqual(angular_mi(path), -1.0, places=10)

    def test_reversal_negates_index(self):
        path = _rotating_line(0.2, -2.5)
        self.assertAlmostEqual(angular_mi(path.reversed()), -angular_mi(path), places=10)

    def test_concatenation_is_additive(self):
        first = _rotating_line(0.3, -1.7)
        second = _rotating_line(0.3 - 1.7, -2.9)
        joined = first.concatenate(second)
        self.assertAlmostEqual(angular_mi(joined), angular_mi(first) + angular_mi(second), places=10)
        self.assertEqual(maslov_index(joined), maslov_index(first) + maslov_index(second))

    def test_coarse_refinable_path_is_refined(self):
        path = _rotating_line(0.3, -math.pi, n=3)
        report = index_report(path)
        self.assertTrue(report.aliasing_flag)
        self.assertAlmostEqual(report.alpha_mi, -1.0, places=10)

    def test_coarse_static_path_raises_aliasing(self):
        frames = [_line(0.3 - 1.2 * k) for k in range(4)]
        path = LagrangianPath.from_frames([0.0, 1.0, 2.0, 3.0], frames)
        with self.assertRaises(AliasingError):
            angular_mi(path)


class TestMaslovIndex(unittest.TestCase):
    """Tests for the integer index by the angular identity."""

    def test_harmonic_oscillator_full_period(self):
        report = index_report(_harmonic_path())
        self.assertEqual(report.mi, -2)
        self.assertAlmostEqual(report.alpha_mi, -2.0, delta=1e-6)
        self.assertLess(abs(report.residual), 1e-3)

    def test_transverse_free_motion_has_zero_index(self):
        path, _ = lagrangian_path(free(1), [0.0, 1.0], LagrangianFrame.horizontal(1), (0.0, 100.0), 0.1)
        running = running_maslov(path)
        self.assertTrue(np.all(running.defined_mi() == 0))
        npt.assert_allclose(running.alpha_mi, 0.0, atol=1e-9)

    def test_endpoint_on_vertical_raises(self):
        path = _rotating_line(0.3, math.pi / 2 - 0.3)
        with self.assertRaises(EndpointOnSigmaError):
            maslov_index(path)

    def test_running_index_undefined_on_vertical_samples(self):
        times = np.linspace(0.0, math.pi, 5)
        path = LagrangianPath.from_function(lambda t: _line(-t), times)
        running = running_maslov(path)
        self.assertEqual(running.vert_dim[2], 1)
        self.assertIsNone(running.mi_at(2))
        self.assertEqual(running.mi_at(4), -1)

    def test_vertical_shear_preserves_index(self):
        d = 2
        S = np.array([[0.7, -0.2], [-0.2, 1.3]])
        path, _ = lagrangian_path(harmonic(d), np.zeros(2 * d), random_lagrangian(d, 4),
                                  (0.0, 5.0), 1e-2)
        try:
            expected = maslov_index(path)
        except EndpointOnSigmaError:
            self.skipTest("random endpoint on the vertical")
        self.assertEqual(maslov_index(path.transformed(vertical_shear(S))), expected)

    def test_reduction_preserves_index(self):
        d = 3
        e = np.eye(2 * d)
        W = CoisotropicData.from_frame(np.column_stack([e[:, 0], e[:, 3], e[:, 4], e[:, 5]]))
        omega = omega_matrix(d)
        rng = np.random.default_rng(21)
        compared = 0
        for trial in range(25):
            A = rng.standard_normal((2 * d, 2 * d))
            S = 0.5 * (A + A.T)
            L0 = random_lagrangian(d, 500 + trial).columns
            try:
                path = LagrangianPath.from_function(lambda t: expm(t * omega @ S) @ L0,
                                                    np.linspace(0.0, 1.0, 41))
                before = maslov_index(path)
                after = maslov_index(reduced_path(W, path))
            except MaslovError:
                continue
            self.assertEqual(before, after, f"trial {trial}")
            compared += 1
        self.assertGreater(compared, 10)


class TestCrossingCount(unittest.TestCase):
    """Tests for the independent crossing count."""

    def test_harmonic_crossings_are_negative(self):
        report = crossing_mi(_harmonic_path())
        self.assertEqual(report.mi, -2)
        self.assertEqual([c.sign for c in report.crossings], [-1, -1])
        npt.assert_allclose([c.time for c in report.crossings], [math.pi / 2, 3 * math.pi / 2],
                            atol=1e-6)
        self.assertEqual(report.coorientation_mismatches, 0)
        self.assertEqual([c.height_sign for c in report.crossings], [-1, -1])

    def test_free_motion_has_no_crossings(self):
        path, _ = lagrangian_path(free(2), np.ones(4), LagrangianFrame.horizontal(2), (0.0, 20.0), 0.1)
        report = crossing_mi(path)
        self.assertEqual(report.crossings, ())
        self.assertEqual(report.mi, 0)

    def test_agrees_with_angular_identity_on_random_flows(self):
        rng = np.random.default_rng(17)
        compared = 0
        for trial in range(20):
            d = 1 + trial % 3
            A = rng.standard_normal((2 * d, 2 * d))
            system = linear(0.5 * (A + A.T))
            try:
                path, _ = lagrangian_path(system, np.zeros(2 * d), random_lagrangian(d, trial),
                                          (0.0, 4.0), 1e-2)
                expected = maslov_index(path)
                report = crossing_mi(path)
            except MaslovError:
                continue
            self.assertEqual(report.mi, expected, f"trial {trial}")
            compared += 1
        self.assertGreater(compared, 10)

    def test_static_path_cannot_be_counted(self):
        path = LagrangianPath.from_frames([0.0, 1.0], [_line(0.1), _line(0.2)])
        with self.assertRaises(AliasingError):
            crossing_mi(path)

    def test_flipped_orientation_breaks_agreement(self):
        path = _harmonic_path()
        with mock.patch("config.CROSSING_ORIENTATION", -1):
            report = crossing_mi(path)
        self.assertEqual(report.mi, 2)
        self.assertNotEqual(report.mi, maslov_index(path))
        self.assertGreater(report.coorientation_mismatches, 0)


if __name__ == '__main__':
    unittest.main()
