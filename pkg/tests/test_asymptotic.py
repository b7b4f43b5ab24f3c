"""
test_asymptotic.py — Unit Tests for Asymptotic Indices and Graph Scans
"""

import math
import os
import sys
import time
import unittest

import numpy as np
import numpy.testing as npt

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from analysis.asymptotic import (
    GraphParam,
    asymptotic_index,
    dynamical_alpha_mi,
    graph_scan,
    measure_index_estimate,
    seed_points,
)
from cli.workers import PoolMapper
from dynamics.systems import damped_pendulum, free, harmonic, torus_coupled
from symplectic.linalg import LagrangianFrame, is_lagrangian
from utils.errors import ConfigError, NonCompactOrbitError

SINK_RATE = -math.sqrt(3.99) / (2.0 * math.pi)


class TestAsymptoticIndex(unittest.TestCase):
    """Tests for αMI(0, T)/T along single orbits."""

    def test_harmonic_rate(self):
        horizons = [20 * math.pi, 40 * math.pi, 80 * math.pi]
        est = asymptotic_index(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1), horizons, dt=1e-2)
        self.assertAlmostEqual(est.rate, -1.0 / math.pi, places=6)
        self.assertTrue(est.converged)
        self.assertAlmostEqual(est.mi_rate, -1.0 / math.pi, places=9)

    def test_free_motion_from_vertical(self):
        # αMI(0, T) = -arctan(T)/π, so the partial rates have not settled yet
        est = asymptotic_index(free(1), [0.0, 1.0], LagrangianFrame.vertical(1), [1.0, 2.0, 3.0], dt=1e-2)
        expected = [-math.atan(T) / (math.pi * T) for T in (1.0, 2.0, 3.0)]
        npt.assert_allclose(est.partials, expected, atol=1e-8)
        self.assertFalse(est.converged)
        self.assertGreater(est.cauchy_gap, 0.1)

    def test_sink_rate(self):
        est = asymptotic_index(damped_pendulum(0.1), [0.0, 0.0], LagrangianFrame.horizontal(1),
                               [100.0, 200.0, 400.0], dt=2e-2)
        self.assertAlmostEqual(est.rate, SINK_RATE, delta=5e-3)

    def test_saddle_rate_vanishes(self):
        est = asymptotic_index(damped_pendulum(0.1), [math.pi, 0.0], LagrangianFrame.graph([[1.0]]),
                               [50.0, 100.0, 200.0], dt=1e-3)
        self.assertAlmostEqual(est.rate, 0.0, delta=1e-3)

    def test_sink_rate_at_fine_step_within_budget(self):
        system = damped_pendulum(0.1)
        L0 = LagrangianFrame.horizontal(1)
        # first call compiles the integration kernels
        asymptotic_index(system, [0.0, 0.0], L0, [1.0, 2.0], dt=1e-3)
        start = time.perf_counter()
        est = asymptotic_index(system, [0.0, 0.0], L0, [50.0, 100.0, 200.0], dt=1e-3)
        elapsed = time.perf_counter() - start
        self.assertAlmostEqual(est.rate, SINK_RATE, delta=1e-2)
        self.assertLess(elapsed, 10.0)

    def test_horizons_validated(self):
        H = LagrangianFrame.horizontal(1)
        with self.assertRaises(ConfigError):
            asymptotic_index(harmonic(1), [1.0, 0.0], H, [])
        with self.assertRaises(ConfigError):
            asymptotic_index(harmonic(1), [1.0, 0.0], H, [2.0, 1.0])

    def test_serializes_infinite_gap_as_null(self):
        est = asymptotic_index(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1), [1.0], dt=1e-2)
        self.assertIsNone(est.to_dict()["cauchy_gap"])
        self.assertFalse(est.converged)

    def test_dynamical_alpha_mi(self):
        value = dynamical_alpha_mi(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1), 3.0, dt=1e-2)
        self.assertAlmostEqual(value, -3.0 / math.pi, places=8)


class TestMeasureIndex(unittest.TestCase):
    """Tests for burn-in time averages."""

    def test_fixed_point_of_free_motion(self):
        value = measure_index_estimate(free(1), [0.0, 0.0], LagrangianFrame.horizontal(1), 10.0, dt=0.1)
        self.assertEqual(value, 0.0)

    def test_harmonic_after_burn_in(self):
        value = measure_index_estimate(harmonic(1), [1.0, 0.0], LagrangianFrame.horizontal(1),
                                       20 * math.pi, burn_in=2 * math.pi, dt=1e-2)
        self.assertAlmostEqual(value, -1.0 / math.pi, places=6)

    def test_burn_in_must_precede_horizon(self):
        with self.assertRaises(ConfigError):
            measure_index_estimate(free(1), [0.0, 0.0], LagrangianFrame.horizontal(1), 5.0, burn_in=5.0)

    def test_escaping_orbit_raises(self):
        with self.assertRaises(NonCompactOrbitError):
            measure_index_estimate(free(1), [0.0, 2e6], LagrangianFrame.horizontal(1), 1.0, dt=0.1)


class TestGraphParam(unittest.TestCase):
    """Tests for closed 1-forms c + dF."""

    def setUp(self):
        self.graph = GraphParam.from_dict(
            {"constant": [0.5, -0.2], "modes": [{"a": 0.3, "b": 0.1, "k": [1.0, 2.0]}]}, 2
        )

    def test_momentum_and_hessian(self):
        q = np.array([0.4, -0.1])
        s = 0.4 - 0.2
        k = np.array([1.0, 2.0])
        npt.assert_allclose(self.graph.momentum(q),
                            [0.5, -0.2] + (-0.3 * math.sin(s) + 0.1 * math.cos(s)) * k)
        npt.assert_allclose(self.graph.hessian(q),
                            (-0.3 * math.cos(s) - 0.1 * math.sin(s)) * np.outer(k, k))

    def test_frame_is_lagrangian(self):
        self.assertTrue(is_lagrangian(self.graph.frame(np.array([1.0, 2.0])).columns))

    def test_round_trip_through_dict(self):
        self.assertEqual(GraphParam.from_dict(self.graph.to_dict(), 2), self.graph)

    def test_dimension_mismatch_rejected(self):
        with self.assertRaises(ConfigError):
            GraphParam.from_dict({"constant": [0.0]}, 2)
        with self.assertRaises(ConfigError):
            GraphParam.from_dict({"modes": [{"a": 1.0, "k": [1.0]}]}, 2)


class TestSeedPoints(unittest.TestCase):
    """Tests for scan seeding."""

    def test_line_coordinates_on_grid(self):
        npt.assert_allclose(seed_points(harmonic(1), 4)[:, 0],
                            [-math.pi, -math.pi / 2, 0.0, math.pi / 2])

    def test_angle_coordinates_on_square_grid(self):
        qs = seed_points(torus_coupled(), 4)
        self.assertEqual(qs.shape, (4, 2))
        npt.assert_allclose(qs, [[0.0, 0.0], [0.0, math.pi], [math.pi, 0.0], [math.pi, math.pi]])

    def test_halton_for_three_dimensions(self):
        qs = seed_points(harmonic(3), 7)
        self.assertEqual(qs.shape, (7, 3))
        self.assertTrue(np.all(qs >= -math.pi) and np.all(qs < math.pi))
        npt.assert_array_equal(qs, seed_points(harmonic(3), 7))


class TestGraphScan(unittest.TestCase):
    """Tests for bounded-index scans."""

    def test_free_motion_zero_section(self):
        result = graph_scan(free(1), GraphParam.zero_section(1), 4, 5.0, dt=0.1)
        self.assertEqual(result.best_bound, 0)
        self.assertEqual(result.failures, {})
        self.assertEqual(result.points.shape, (4, 2))
        npt.assert_array_equal(result.skips, 0)

    def test_damped_pendulum_zero_section_has_bounded_point(self):
        # the seed at rest on the saddle keeps its index bounded; the rest spiral into the sink
        result = graph_scan(damped_pendulum(0.1), GraphParam.zero_section(1), 8, 100.0, dt=1e-2,
                            mapper=PoolMapper(2))
        self.assertEqual(result.failures, {})
        self.assertLessEqual(result.best_bound, 3)
        self.assertAlmostEqual(result.best[0], math.pi, places=12)
        self.assertLess(result.running_mi_bounds[0, 0], -20)
        self.assertEqual(result.bound_violations, 0)

    def test_harmonic_zero_section_bound_grows(self):
        # crossings at t = π/2 + kπ for every seed
        short = graph_scan(harmonic(1), GraphParam.zero_section(1), 4, 12.0, dt=1e-2)
        long = graph_scan(harmonic(1), GraphParam.zero_section(1), 4, 24.0, dt=1e-2)
        npt.assert_array_equal(short.running_mi_bounds, np.tile([-4.0, 0.0], (4, 1)))
        self.assertEqual(short.best_bound, 4)
        self.assertEqual(long.best_bound, 8)

    def test_square_grid_thinned_across_rows(self):
        qs = seed_points(torus_coupled(), 5)
        self.assertEqual(len({tuple(q) for q in qs}), 5)
        rows = np.round(qs[:, 0] / (2 * math.pi / 3)).astype(int)
        self.assertEqual(set(rows.tolist()), {0, 1, 2})

    def test_threaded_scan_matches_serial(self):
        system = damped_pendulum(0.1)
        graph = GraphParam.zero_section(1)
        serial = graph_scan(system, graph, 6, 4.0, dt=1e-2)
        threaded = graph_scan(system, graph, 6, 4.0, dt=1e-2, mapper=PoolMapper(3))
        npt.assert_array_equal(serial.running_mi_bounds, threaded.running_mi_bounds)
        self.assertEqual(serial.best_index, threaded.best_index)

    def test_summary_fields(self):
        summary = graph_scan(free(1), GraphParam.zero_section(1), 2, 2.0, dt=0.1).summary()
        self.assertEqual(summary["n_points"], 2)
        self.assertEqual(summary["best_bound"], 0)
        self.assertEqual(summary["bound_violations"], 0)

    def test_inputs_validated(self):
        with self.assertRaises(ConfigError):
            graph_scan(free(1), GraphParam.zero_section(1), 0, 1.0)
        with self.assertRaises(ConfigError):
            graph_scan(free(1), GraphParam.zero_section(2), 3, 1.0)


if __name__ == '__main__':
    unittest.main()
