"""
output_writer.py — CSV and JSON Output

Writes command results deterministically: CSV with '\\n' line endings and
pre-formatted 17-digit numbers, JSON with sorted keys and two-space
indentation. Files are written to a temporary sibling and moved into place,
so a failed run never leaves a partial output file behind.
"""

import csv
import io
import json
import os
import tempfile
from typing import Any, Iterable, Sequence

from utils.formatting import to_jsonable
from utils.logger import get_logger

logger = get_logger(__name__)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".maslov-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def render_csv(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    """CSV text with '\\n' line endings; cells must already be strings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    """
    Write a CSV file.

    Args:
        path: Destination file
        header: Column names
        rows: Rows of pre-formatted cells (see utils.formatting)
    """
    text = render_csv(header, rows)
    _atomic_write(path, text)
    logger.info(f"Wrote {text.count(chr(10)) - 1} CSV row(s) to {path}")


def render_json(document: Any) -> str:
    """Canonical JSON text: sorted keys, indent 2, trailing newline."""
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: str, document: Any) -> None:
    """Write a JSON report (numpy values converted, non-finite floats as null)."""
    _atomic_write(path, render_json(document))
    logger.info(f"Wrote JSON report to {path}")


def read_json(path: str) -> Any:
    """Read a JSON report back."""
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def sidecar_path(path: str, suffix: str = ".summary.json") -> str:
    """Path of a companion file next to `path` (extension replaced)."""
    stem, _ = os.path.splitext(path)
    return stem + suffix
