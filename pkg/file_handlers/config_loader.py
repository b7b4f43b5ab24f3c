"""
config_loader.py — Run Configuration Loading

Reads the JSON run configuration of one subcommand, applies `--set a.b=value`
overrides, validates the schema and builds the objects the commands need:
the conformal system, the initial state and frame, and the tolerance bundle.
"""

import copy
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from config import DEFAULT_DT, DEFAULT_TOLERANCES, Tolerances
from dynamics.systems import BUILTIN_DIMS, ConformalSystem, build_system
from symplectic.linalg import LagrangianFrame
from utils.errors import ConfigError, FrameError
from utils.logger import get_logger
from utils.validators import validate_run_config

logger = get_logger(__name__)

# Output format written by each subcommand
OUTPUT_FORMATS = {"index": "csv", "scan": "csv", "asymptotic": "json", "twist": "json"}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """
    A validated run configuration.

    Attributes:
        command: subcommand the document was validated for
        raw: the decoded document after overrides
        system: conformal system built from the `system` section
        tolerances: defaults with the `tolerances` overrides applied
        output_path: destination of the CSV or JSON output
        output_format: csv or json
        seed: seed for the random draws a command makes
        t0, t1, dt: time section (t0/t1 are None where a command has none)
        state: initial state (index and asymptotic)
        frame: initial Lagrangian frame (index and asymptotic)
    """

    command: str
    raw: dict[str, Any]
    system: ConformalSystem
    tolerances: Tolerances
    output_path: str
    output_format: str
    seed: int = 0
    t0: float | None = None
    t1: float | None = None
    dt: float = DEFAULT_DT
    state: np.ndarray | None = None
    frame: LagrangianFrame | None = field(default=None, repr=False)

    def section(self, name: str) -> dict[str, Any]:
        """Command-specific section (empty dict when absent)."""
        value = self.raw.get(name)
        return dict(value) if isinstance(value, dict) else {}


# ══════════════════════════════════════════════════════════════════════════════
# Overrides
# ══════════════════════════════════════════════════════════════════════════════

def parse_override(text: str) -> tuple[list[str], Any]:
    """
    Split `a.b.c=value` into its key path and value.

    The value is decoded as JSON when possible (numbers, lists, true/false,
    null), else kept as a string.

    Raises:
        ConfigError: if there is no '=' or the key is empty
    """
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"Override must look like key=value, got {text!r}")
    parts = key.split(".")
    if any(not p for p in parts):
        raise ConfigError(f"Override key {key!r} has an empty component")
    try:
        decoded = json.loads(value)
    except json.JSONDecodeError:
        decoded = value
    return parts, decoded


def apply_overrides(raw: Mapping[str, Any], overrides: Sequence[str]) -> dict[str, Any]:
    """
    Apply `--set` overrides to a copy of the document.

    Missing intermediate sections are created; overriding through a
    non-object value raises ConfigError.
    """
    doc = copy.deepcopy(dict(raw))
    for text in overrides:
        parts, value = parse_override(text)
        node = doc
        for part in parts[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigError(f"Cannot override {'.'.join(parts)}: '{part}' is not an object")
            node = child
        node[parts[-1]] = value
        logger.debug(f"Override {'.'.join(parts)} = {value!r}")
    return doc


# ══════════════════════════════════════════════════════════════════════════════
# Frames
# ══════════════════════════════════════════════════════════════════════════════

def build_frame(spec: Any, d: int, tol: Tolerances = DEFAULT_TOLERANCES) -> LagrangianFrame:
    """
    Initial frame from a keyword or an explicit 2d x d matrix.

    Keywords: zero-section-tangent and horizontal ({p = 0}), vertical ({q = 0}).

    Raises:
        ConfigError: for unknown keywords or matrices that are not Lagrangian frames
    """
    if isinstance(spec, str):
        if spec in ("zero-section-tangent", "horizontal"):
            return LagrangianFrame(LagrangianFrame.horizontal(d).columns, tol)
        if spec == "vertical":
            return LagrangianFrame(LagrangianFrame.vertical(d).columns, tol)
        raise ConfigError(f"Unknown frame keyword {spec!r}")
    try:
        frame = LagrangianFrame(np.asarray(spec, dtype=float), tol)
    except (FrameError, ValueError, TypeError) as e:
        raise ConfigError(f"initial.frame is not a Lagrangian frame: {e}") from e
    if frame.dim != d:
        raise ConfigError(f"initial.frame has dimension {frame.dim}, system has {d}")
    return frame


# ══════════════════════════════════════════════════════════════════════════════
# Loading
# ══════════════════════════════════════════════════════════════════════════════

def read_config_file(path: str) -> Any:
    """
    Decode a JSON configuration file.

    Raises:
        ConfigError: if the file cannot be read or is not valid JSON
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as e:
        raise ConfigError(f"Cannot read configuration {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Configuration {path} is not valid JSON: {e}") from e


def build_run_config(raw: Any, command: str) -> RunConfig:
    """
    Validate a decoded document and build the run objects.

    Raises:
        ConfigError: listing every schema problem, or the first build failure
    """
    problems = validate_run_config(raw, command, BUILTIN_DIMS)
    if problems:
        raise ConfigError(
            "Invalid run configuration:\n" + "\n".join(f"  - {p}" for p in problems)
        )

    tolerances = DEFAULT_TOLERANCES.with_overrides(raw.get("tolerances"))
    system = build_system(raw["system"])

    output = raw["output"]
    expected = OUTPUT_FORMATS[command]
    fmt = output.get("format", expected)
    if fmt != expected:
        raise ConfigError(f"The {command} command writes {expected}, not {fmt!r}")

    time = raw.get("time") or {}
    t0 = float(time["t0"]) if "t0" in time else None
    t1 = float(time["t1"]) if "t1" in time else None
    dt = float(time.get("dt", DEFAULT_DT))

    state, frame = None, None
    if command in ("index", "asymptotic"):
        initial = raw["initial"]
        state = np.asarray(initial["state"], dtype=float)
        frame = build_frame(initial.get("frame", "zero-section-tangent"), system.dim, tolerances)

    cfg = RunConfig(
        command=command,
        raw=raw,
        system=system,
        tolerances=tolerances,
        output_path=output["path"],
        output_format=fmt,
        seed=int(raw.get("seed", 0)),
        t0=t0,
        t1=t1,
        dt=dt,
        state=state,
        frame=frame,
    )
    logger.info(f"Loaded {command} configuration for {system.name} (d = {system.dim})")
    return cfg


def load_run_config(path: str, command: str, overrides: Sequence[str] = ()) -> RunConfig:
    """
    Load, override and validate the configuration file of a subcommand.

    Args:
        path: JSON file
        command: index, asymptotic, scan or twist
        overrides: `a.b=value` strings applied in order

    Returns:
        RunConfig

    Raises:
        ConfigError: for unreadable files and every invalid document
    """
    logger.info(f"Reading run configuration: {path}")
    raw = read_config_file(path)
    if overrides:
        if not isinstance(raw, dict):
            raise ConfigError("run configuration must be a JSON object")
        raw = apply_overrides(raw, overrides)
    return build_run_config(raw, command)
