"""
cli — Command-Line Front End for ConformalMaslov

This package contains the subcommand layer:
- commands: index, asymptotic, scan, twist and selftest
- workers: Thread-pool mapper for scans and audits
- selftest: Invariant suite with a pass/fail table
"""

from .commands import cmd_asymptotic, cmd_index, cmd_scan, cmd_selftest, cmd_twist
from .workers import PoolMapper

__all__ = ["cmd_asymptotic", "cmd_index", "cmd_scan", "cmd_selftest", "cmd_twist", "PoolMapper"]
