"""
utils — Shared Utilities for ConformalMaslov

This package contains shared helpers used across the application:
- logger: Centralized logging configuration
- errors: Exception hierarchy
- validators: Matrix checks and run-config schema validation
- formatting: Lossless float formatting and text tables
- report_pdf: PDF export of JSON reports
"""

from .logger import get_logger, setup_logging
from .errors import (
    MaslovError,
    ConfigError,
    FrameError,
    NumericalError,
)

__all__ = [
    "get_logger",
    "setup_logging",
    "MaslovError",
    "ConfigError",
    "FrameError",
    "NumericalError",
]
