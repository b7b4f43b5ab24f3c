"""
test_config.py — Unit Tests for Configuration, Validation and Output Helpers

Tests for the tolerance bundle, run-config schema validation, lossless
formatting and atomic output writing.
"""

import json
import math
import os
import sys
import tempfile
import unittest
from unittest import mock

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

import config
from config import DEFAULT_TOLERANCES, Tolerances, validate_config
from dynamics.systems import BUILTIN_DIMS
from file_handlers.config_loader import build_frame
from file_handlers.output_writer import read_json, render_json, sidecar_path, write_csv, write_json
from utils.errors import ConfigError, SymmetryError
from utils.formatting import format_float, format_optional_int, render_table, to_jsonable
from utils.report_pdf import export_report
from utils.validators import check_symmetric, validate_run_config


class TestConfiguration(unittest.TestCase):
    """Tests for module constants and their validation."""

    def test_defaults_are_valid(self):
        """The shipped constants pass validation."""
        validate_config()

    def test_invalid_orientation_rejected(self):
        with mock.patch("config.CROSSING_ORIENTATION", 0):
            with self.assertRaises(ValueError) as ctx:
                validate_config()
        self.assertIn("CROSSING_ORIENTATION", str(ctx.exception))

    def test_every_problem_is_listed(self):
        with mock.patch("config.UNWRAP_GUARD", 4.0), mock.patch("config.CONV_WINDOW", 1):
            with self.assertRaises(ValueError) as ctx:
                validate_config()
        self.assertIn("UNWRAP_GUARD", str(ctx.exception))
        self.assertIn("CONV_WINDOW", str(ctx.exception))

    def test_float_digits_are_lossless(self):
        self.assertEqual(config.FLOAT_DIGITS, 17)


class TestTolerances(unittest.TestCase):
    """Tests for Tolerances.with_overrides."""

    def test_override_replaces_named_fields(self):
        tol = DEFAULT_TOLERANCES.with_overrides({"rank_tol": 1e-8, "conv_window": "5"})
        self.assertEqual(tol.rank_tol, 1e-8)
        self.assertEqual(tol.conv_window, 5)
        self.assertEqual(tol.iso_tol, DEFAULT_TOLERANCES.iso_tol)
        self.assertNotEqual(DEFAULT_TOLERANCES.rank_tol, 1e-8)

    def test_empty_override_returns_same_bundle(self):
        self.assertIs(DEFAULT_TOLERANCES.with_overrides({}), DEFAULT_TOLERANCES)
        self.assertIs(DEFAULT_TOLERANCES.with_overrides(None), DEFAULT_TOLERANCES)

    def test_bad_overrides_rejected(self):
        for overrides in ({"nope": 1.0}, {"rank_tol": "x"}, {"rank_tol": -1.0}):
            with self.assertRaises(ConfigError):
                Tolerances().with_overrides(overrides)


class TestValidators(unittest.TestCase):
    """Tests for matrix checks and run-config schema validation."""

    def _index_doc(self):
        return {
            "system": {"builtin": "harmonic"},
            "time": {"t0": 0.0, "t1": 1.0, "dt": 0.01},
            "initial": {"state": [1.0, 0.0]},
            "output": {"path": "out.csv"},
        }

    def test_valid_document(self):
        self.assertEqual(validate_run_config(self._index_doc(), "index", BUILTIN_DIMS), [])

    def test_problems_are_collected(self):
        doc = self._index_doc()
        doc["time"]["dt"] = -1.0
        doc["initial"]["state"] = [1.0]
        doc["seed"] = 1.5
        del doc["output"]
        problems = validate_run_config(doc, "index", BUILTIN_DIMS)
        self.assertEqual(len(problems), 4, problems)

    def test_system_needs_exactly_one_source(self):
        doc = self._index_doc()
        doc["system"]["hamiltonian"] = {"dim": 1, "terms": [{"coef": 1.0}]}
        problems = validate_run_config(doc, "index", BUILTIN_DIMS)
        self.assertTrue(any("exactly one" in p for p in problems))

    def test_term_table_checked(self):
        doc = self._index_doc()
        doc["system"] = {"hamiltonian": {"dim": 1, "terms": [{"coef": 1.0, "p_powers": [-1],
                                                              "trig": "cos"}]}}
        problems = validate_run_config(doc, "index", BUILTIN_DIMS)
        self.assertEqual(len(problems), 2, problems)

    def test_derivative_mode_checked(self):
        doc = self._index_doc()
        doc["system"] = {"hamiltonian": {"dim": 1, "derivatives": "finite-difference",
                                         "terms": [{"coef": 0.5, "p_powers": [2]}]}}
        self.assertEqual(validate_run_config(doc, "index", BUILTIN_DIMS), [])
        doc["system"]["hamiltonian"]["derivatives"] = "symbolic"
        problems = validate_run_config(doc, "index", BUILTIN_DIMS)
        self.assertEqual(len(problems), 1, problems)
        self.assertIn("derivatives", problems[0])

    def test_linear_dimension_from_matrix(self):
        doc = self._index_doc()
        doc["system"] = {"builtin": "linear", "params": {"S": np.eye(4).tolist()}}
        problems = validate_run_config(doc, "index", BUILTIN_DIMS)
        self.assertTrue(any("initial.state" in p for p in problems))

    def test_twist_region_size(self):
        doc = {"system": {"builtin": "torus_coupled"}, "twist": {"region": [[0, 1]] * 2},
               "output": {"path": "t.json"}}
        problems = validate_run_config(doc, "twist", BUILTIN_DIMS)
        self.assertEqual(problems, ["twist.region must have 4 intervals"])

    def test_non_object_document(self):
        self.assertEqual(validate_run_config([], "index", BUILTIN_DIMS),
                         ["run configuration must be a JSON object"])

    def test_check_symmetric(self):
        out = check_symmetric(np.array([[1.0, 2.0], [2.0 + 1e-9, 0.0]]), 1e-6)
        self.assertEqual(out[0, 1], out[1, 0])
        with self.assertRaises(SymmetryError):
            check_symmetric(np.array([[1.0, 2.0], [0.0, 0.0]]), 1e-6)

    def test_frame_keywords_and_matrices(self):
        self.assertEqual(build_frame("vertical", 2).dim, 2)
        self.assertEqual(build_frame([[1.0], [1.0]], 1).dim, 1)
        with self.assertRaises(ConfigError):
            build_frame("diagonal", 1)
        with self.assertRaises(ConfigError):
            build_frame([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, 0.0]], 2)
        with self.assertRaises(ConfigError):
            build_frame([[1.0], [0.0]], 2)


class TestFormatting(unittest.TestCase):
    """Tests for lossless numbers and text tables."""

    def test_floats_round_trip(self):
        for value in (math.pi, -1.0 / 3.0, 1e-300, 2.0 ** 60):
            self.assertEqual(float(format_float(value)), value)
        self.assertEqual(format_float(0.5), "0.5")

    def test_undefined_values_are_blank(self):
        self.assertEqual(format_float(None), "")
        self.assertEqual(format_float(float("nan")), "")
        self.assertEqual(format_optional_int(float("nan")), "")
        self.assertEqual(format_optional_int(-2.0), "-2")

    def test_to_jsonable(self):
        doc = to_jsonable({"a": np.float64(1.5), "b": np.array([1, 2]), 3: (np.inf, True)})
        self.assertEqual(doc, {"a": 1.5, "b": [1, 2], "3": [None, True]})

    def test_render_table(self):
        text = render_table(("name", "status"), [("x", "PASS")])
        self.assertEqual(text.splitlines(), ["name  status", "----  ------", "x     PASS  "])


class TestOutputWriter(unittest.TestCase):
    """Tests for atomic CSV/JSON writes."""

    def setUp(self):
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = self._tmp.name

    def tearDown(self):
        self._tmp.cleanup()

    def test_json_is_sorted_and_strict(self):
        text = render_json({"b": 1, "a": float("nan")})
        self.assertEqual(json.loads(text), {"a": None, "b": 1})
        self.assertLess(text.index('"a"'), text.index('"b"'))
        self.assertTrue(text.endswith("\n"))

    def test_json_floats_are_shortest_round_trip(self):
        values = [0.1, math.pi, -1.0 / 3.0, 1e-300, 2.0 ** 60]
        text = render_json({"v": values})
        self.assertIn("0.1,", text)
        self.assertNotIn("0.10000000000000001", text)
        self.assertEqual(json.loads(text)["v"], values)
        self.assertEqual(render_json(json.loads(text)), text)

    def test_write_and_read_json(self):
        path = os.path.join(self.tmp, "nested", "report.json")
        write_json(path, {"rate": -0.25, "ok": np.bool_(True)})
        self.assertEqual(read_json(path), {"rate": -0.25, "ok": True})
        self.assertEqual(os.listdir(os.path.dirname(path)), ["report.json"])

    def test_write_csv(self):
        path = os.path.join(self.tmp, "rows.csv")
        write_csv(path, ["t", "mi"], [["0", "0"], ["1.5", ""]])
        with open(path, "rb") as f:
            self.assertEqual(f.read(), b"t,mi\n0,0\n1.5,\n")

    def test_sidecar_path(self):
        self.assertEqual(sidecar_path("/a/scan.csv"), "/a/scan.summary.json")

    def test_pdf_export(self):
        path = os.path.join(self.tmp, "report.pdf")
        export_report({"rate": -0.3183, "histogram": {"-2": 4}, "note": "αMI ≤ 0"}, path, "Report")
        with open(path, "rb") as f:
            self.assertEqual(f.read(4), b"%PDF")


if __name__ == '__main__':
    unittest.main()
