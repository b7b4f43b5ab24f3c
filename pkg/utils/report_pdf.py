"""
report_pdf.py — PDF Export of Run Reports

Renders a JSON-style report (asymptotic estimate, scan summary, twist
certificate or selftest table) as a one-document PDF using fpdf2: a dark
header band with the command name, then one section per report field.
"""

import json
from typing import Any, Mapping

from fpdf import FPDF

from config import APP_NAME, APP_VERSION
from utils.logger import get_logger

logger = get_logger(__name__)


def _ascii(text: str) -> str:
    """Core PDF fonts are Latin-1 only."""
    return text.encode("latin-1", errors="replace").decode("latin-1")


def _section_lines(content: Any) -> list[str]:
    if isinstance(content, Mapping):
        return [f"{k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(content.items())]
    if isinstance(content, (list, tuple)):
        return [json.dumps(item, sort_keys=True) for item in content]
    return [json.dumps(content)]


def export_report(report: Mapping[str, Any], file_path: str, title: str) -> None:
    """
    Export a report dictionary to a formatted PDF.

    Args:
        report: JSON-compatible report (already converted with to_jsonable)
        file_path: Destination .pdf path
        title: Heading shown in the header band (e.g. the subcommand)

    Raises:
        RuntimeError: if the PDF cannot be written
    """
    logger.info(f"Exporting report to: {file_path}")
    try:
        pdf = FPDF()
        pdf.add_page()
        pdf.set_margins(left=15, top=10, right=15)
        pdf.set_auto_page_break(auto=True, margin=15)

        # Header band
        pdf.set_fill_color(15, 17, 23)
        pdf.rect(0, 0, 210, 32, "F")
        pdf.set_y(10)
        pdf.set_font("Helvetica", "B", 16)
        pdf.set_text_color(255, 255, 255)
        pdf.cell(0, 8, _ascii(title.upper()), 0, 1, "C")
        pdf.set_font("Helvetica", "", 9)
        pdf.set_text_color(148, 163, 184)
        pdf.cell(0, 5, f"Generated by {APP_NAME} {APP_VERSION}", 0, 1, "C")
        pdf.set_y(38)

        for key, content in report.items():
            pdf.set_fill_color(26, 32, 53)
            pdf.set_font("Helvetica", "B", 11)
            pdf.set_text_color(255, 255, 255)
            pdf.set_x(15)
            pdf.cell(0, 8, _ascii(f"  {str(key).upper()}"), 0, 1, "L", True)
            pdf.set_font("Courier", "", 9)
            pdf.set_text_color(40, 40, 40)
            pdf.ln(2)
            for line in _section_lines(content):
                pdf.set_x(15)
                pdf.multi_cell(0, 5, _ascii(line))
            pdf.ln(3)

        pdf.output(file_path)
    except Exception as e:
        logger.error(f"Export error: {e}", exc_info=True)
        raise RuntimeError(f"Could not write PDF report {file_path}: {e}") from e
    logger.info(f"Report exported successfully to: {file_path}")
