"""
validators.py — Matrix Validation and Run-Config Schema Checks

Provides shape/symmetry checks shared by the numerical modules and the
schema validation of JSON run configurations. Schema validation collects
every problem before reporting, so a user sees all mistakes at once.
"""

import math
from typing import Any

import numpy as np

from .errors import FrameError, SymmetryError
from .logger import get_logger

logger = get_logger(__name__)

FRAME_KEYWORDS = ("zero-section-tangent", "vertical", "horizontal")
DERIVATIVE_KEYWORDS = ("analytic", "finite-difference")
COMMANDS = ("index", "asymptotic", "scan", "twist")


def as_real_matrix(value: Any, name: str = "matrix") -> np.ndarray:
    """
    Convert input to a 2-D float array.

    Raises:
        FrameError: if the input is not a finite real 2-D array
    """
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 2:
        raise FrameError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise FrameError(f"{name} contains non-finite entries")
    return arr


def check_frame_shape(F: np.ndarray, name: str = "frame") -> int:
    """
    Check that F has 2d rows and d columns.

    Returns:
        The half-dimension d
    """
    rows, cols = F.shape
    if cols < 1 or rows != 2 * cols:
        raise FrameError(
            f"Dimension mismatch for {name}: expected 2d x d, got {rows} x {cols}"
        )
    return cols


def check_symmetric(S: np.ndarray, tol: float, name: str = "matrix") -> np.ndarray:
    """
    Check that S is square and symmetric within tol * max(1, ||S||).

    Returns:
        The symmetrized matrix (S + S^T) / 2
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise SymmetryError(f"{name} must be square, got shape {S.shape}")
    scale = max(1.0, float(np.max(np.abs(S))) if S.size else 0.0)
    asym = float(np.max(np.abs(S - S.T))) if S.size else 0.0
    if asym > tol * scale:
        logger.warning(f"{name} asymmetry {asym:.3e} exceeds {tol * scale:.3e}")
        raise SymmetryError(f"{name} is not symmetric: max|S - S^T| = {asym:.3e}")
    return 0.5 * (S + S.T)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _number_list(value: Any) -> bool:
    return isinstance(value, list) and all(_is_number(v) for v in value)


def _validate_terms(terms: Any, dim: int, errors: list[str], where: str) -> None:
    if not isinstance(terms, list) or not terms:
        errors.append(f"{where}.terms must be a non-empty list")
        return
    for i, term in enumerate(terms):
        tag = f"{where}.terms[{i}]"
        if not isinstance(term, dict):
            errors.append(f"{tag} must be an object")
            continue
        if not _is_number(term.get("coef")):
            errors.append(f"{tag}.coef must be a number")
        for key in ("q_powers", "p_powers", "k"):
            if key in term:
                vals = term[key]
                if not _number_list(vals) or len(vals) != dim:
                    errors.append(f"{tag}.{key} must be a list of {dim} numbers")
                elif key != "k" and any(v < 0 or int(v) != v for v in vals):
                    errors.append(f"{tag}.{key} must hold non-negative integers")
        trig = term.get("trig")
        if trig not in (None, "cos", "sin"):
            errors.append(f"{tag}.trig must be 'cos', 'sin' or null, got {trig!r}")
        if trig is not None and "k" not in term:
            errors.append(f"{tag} has trig but no wave vector k")


def _system_dim(system: dict, builtin_dims: dict[str, int]) -> int | None:
    if "builtin" in system:
        params = system.get("params") or {}
        if isinstance(params, dict) and isinstance(params.get("dim"), int):
            return params["dim"]
        if isinstance(params, dict) and isinstance(params.get("S"), list) and params["S"]:
            return len(params["S"]) // 2
        return builtin_dims.get(system["builtin"])
    ham = system.get("hamiltonian")
    if isinstance(ham, dict) and isinstance(ham.get("dim"), int):
        return ham["dim"]
    return None


def validate_run_config(
    raw: Any,
    command: str,
    builtin_dims: dict[str, int],
) -> list[str]:
    """
    Validate a decoded run configuration against the schema for a subcommand.

    Args:
        raw: Decoded JSON document
        command: One of index, asymptotic, scan, twist
        builtin_dims: Map of builtin system names to their default dimension

    Returns:
        List of human-readable problems (empty if the document is valid)
    """
    errors: list[str] = []
    if not isinstance(raw, dict):
        return ["run configuration must be a JSON object"]
    if command not in COMMANDS:
        return [f"unknown command {command!r}"]

    system = raw.get("system")
    dim: int | None = None
    if not isinstance(system, dict):
        errors.append("system section is required and must be an object")
    elif ("builtin" in system) == ("hamiltonian" in system):
        errors.append("system must name exactly one of 'builtin' or 'hamiltonian'")
    else:
        if "builtin" in system:
            if system["builtin"] not in builtin_dims:
                errors.append(
                    f"unknown builtin {system['builtin']!r}; expected one of {sorted(builtin_dims)}"
                )
            if not isinstance(system.get("params", {}), dict):
                errors.append("system.params must be an object")
        else:
            ham = system["hamiltonian"]
            if not isinstance(ham, dict) or not isinstance(ham.get("dim"), int) or ham["dim"] < 1:
                errors.append("system.hamiltonian.dim must be a positive integer")
            else:
                _validate_terms(ham.get("terms"), ham["dim"], errors, "system.hamiltonian")
            if isinstance(ham, dict) and ham.get("derivatives", "analytic") not in DERIVATIVE_KEYWORDS:
                errors.append(
                    f"system.hamiltonian.derivatives must be one of {list(DERIVATIVE_KEYWORDS)}"
                )
            if "rate" in system and not _is_number(system["rate"]):
                errors.append("system.rate must be a number")
        dim = _system_dim(system, builtin_dims)

    time = raw.get("time")
    if command != "twist":
        if not isinstance(time, dict):
            errors.append("time section is required and must be an object")
        else:
            required = ("dt",) if command == "asymptotic" else ("t0", "t1", "dt")
            for key in required:
                if not _is_number(time.get(key)):
                    errors.append(f"time.{key} must be a number")
            if _is_number(time.get("dt")) and time["dt"] <= 0:
                errors.append(f"time.dt must be positive, got {time['dt']}")
            if _is_number(time.get("t0")) and _is_number(time.get("t1")) and time["t1"] <= time["t0"]:
                errors.append("time.t1 must exceed time.t0")

    if command in ("index", "asymptotic"):
        initial = raw.get("initial")
        if not isinstance(initial, dict):
            errors.append("initial section is required and must be an object")
        else:
            state = initial.get("state")
            if not _number_list(state) or (dim is not None and len(state) != 2 * dim):
                errors.append(f"initial.state must be a list of {2 * dim if dim else '2d'} numbers")
            frame = initial.get("frame", "zero-section-tangent")
            if isinstance(frame, str):
                if frame not in FRAME_KEYWORDS:
                    errors.append(f"initial.frame must be one of {FRAME_KEYWORDS} or a matrix")
            elif not (isinstance(frame, list) and all(_number_list(row) for row in frame)):
                errors.append("initial.frame matrix must be a list of numeric rows")

    if command == "asymptotic":
        section = raw.get("asymptotic")
        horizons = section.get("horizons") if isinstance(section, dict) else None
        if not _number_list(horizons) or not horizons:
            errors.append("asymptotic.horizons must be a non-empty list of numbers")
        elif any(b <= a for a, b in zip(horizons, horizons[1:])) or horizons[0] <= 0:
            errors.append("asymptotic.horizons must be positive and strictly increasing")

    if command == "scan":
        section = raw.get("scan")
        if not isinstance(section, dict):
            errors.append("scan section is required and must be an object")
        else:
            n = section.get("n_points")
            if not isinstance(n, int) or isinstance(n, bool) or n < 1:
                errors.append("scan.n_points must be a positive integer")
            graph = section.get("graph", {})
            if not isinstance(graph, dict):
                errors.append("scan.graph must be an object")
            elif "constant" in graph and (not _number_list(graph["constant"])
                                          or (dim is not None and len(graph["constant"]) != dim)):
                errors.append("scan.graph.constant must be a list of d numbers")

    if command == "twist":
        section = raw.get("twist")
        if not isinstance(section, dict):
            errors.append("twist section is required and must be an object")
        else:
            region = section.get("region")
            if not (isinstance(region, list) and all(_number_list(b) and len(b) == 2 for b in region)):
                errors.append("twist.region must be a list of [lo, hi] pairs")
            elif dim is not None and len(region) != 2 * dim:
                errors.append(f"twist.region must have {2 * dim} intervals")
            elif any(b[1] < b[0] for b in region):
                errors.append("twist.region intervals must satisfy lo <= hi")

    tolerances = raw.get("tolerances", {})
    if not isinstance(tolerances, dict):
        errors.append("tolerances must be an object")

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        errors.append("seed must be an integer")

    output = raw.get("output")
    if not isinstance(output, dict) or not isinstance(output.get("path"), str) or not output["path"]:
        errors.append("output.path is required")

    if errors:
        logger.warning(f"Run configuration rejected with {len(errors)} problem(s)")
    return errors

