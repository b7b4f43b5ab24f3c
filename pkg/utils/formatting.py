"""
formatting.py — Text Rendering Utilities

Provides lossless number formatting for CSV/JSON output and plain-text
tables for the selftest summary printed to the console.
"""

import math
from typing import Any, Sequence

import numpy as np

from config import FLOAT_DIGITS


def format_float(value: float | None) -> str:
    """
    Format a float with FLOAT_DIGITS significant digits ('.' decimal point).

    Args:
        value: Number to format; None and NaN render as an empty field

    Returns:
        The formatted number
    """
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return f"{value:.{FLOAT_DIGITS}g}"


def format_optional_int(value: int | float | None) -> str:
    """Integer field that is empty when undefined."""
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return str(int(value))


def to_jsonable(value: Any) -> Any:
    """
    Convert numpy scalars/arrays and tuples to plain JSON types.

    Non-finite floats become None so documents stay standard JSON.
    """
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """
    Render rows as a left-aligned plain-text table.

    Args:
        headers: Column titles
        rows: Cell values (converted with str)

    Returns:
        Multi-line string, header and separator first
    """
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    line = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    rule = "  ".join("-" * w for w in widths)
    body = ["  ".join(c.ljust(w) for c, w in zip(row, widths)) for row in cells]
    return "\n".join([line, rule, *body])


def render_status(passed: bool) -> str:
    """PASS/FAIL marker for a check."""
    return "PASS" if passed else "FAIL"
