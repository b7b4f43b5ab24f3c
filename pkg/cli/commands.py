"""
commands.py — Subcommand Implementations

One function per subcommand. Each takes a validated RunConfig, runs the
computation, writes its output file and returns an exit code. Exceptions
propagate to maslov_main, which maps them to exit codes; outputs are only
written after the computation succeeded.
"""

from typing import Any

import numpy as np

from analysis.asymptotic import GraphParam, asymptotic_index, graph_scan, measure_index_estimate
from analysis.maslov_path import running_maslov
from analysis.twist import nonpositivity_audit, sign_law_check, twist_certificate
from config import (
    EXIT_INVARIANT_FAILURE,
    EXIT_OK,
    INDEX_CSV_HEADER,
    TWIST_GRID_POINTS,
)
from dynamics.flow import lagrangian_path
from file_handlers.config_loader import RunConfig
from file_handlers.output_writer import sidecar_path, write_csv, write_json
from symplectic.linalg import random_lagrangian
from utils.errors import ConfigError
from utils.formatting import format_float, format_optional_int, to_jsonable
from utils.logger import get_logger
from utils.report_pdf import export_report
from .workers import PoolMapper

logger = get_logger(__name__)


def _export_pdf(report: dict[str, Any], pdf_path: str | None, title: str) -> None:
    if pdf_path:
        export_report(to_jsonable(report), pdf_path, title)


# ══════════════════════════════════════════════════════════════════════════════
# index
# ══════════════════════════════════════════════════════════════════════════════

def index_rows(cfg: RunConfig) -> list[list[str]]:
    """Running-index CSV rows for the configured path (no file I/O)."""
    path, result = lagrangian_path(
        cfg.system, cfg.state, cfg.frame, (cfg.t0, cfg.t1), cfg.dt,
        track_matrix=True, tol=cfg.tolerances,
    )
    running = running_maslov(path)
    defects = result.conformal_defects()
    rows = [
        [
            format_float(t),
            format_float(arg),
            format_float(alpha),
            format_optional_int(mi),
            str(int(vert)),
            format_float(defect),
        ]
        for t, arg, alpha, mi, vert, defect in zip(
            running.times, running.arg_delta, running.alpha_mi, running.mi,
            running.vert_dim, defects,
        )
    ]
    logger.info(
        f"Index of {cfg.system.name} over [{cfg.t0:.6g}, {cfg.t1:.6g}]: "
        f"alpha_mi = {running.alpha_mi[-1]:.12g}, mi = {running.mi_at(-1)}"
    )
    return rows


def cmd_index(cfg: RunConfig) -> int:
    """Write t, arg Δ, αMI, MI, vertical dimension and conformal defect at every sample."""
    rows = index_rows(cfg)
    write_csv(cfg.output_path, INDEX_CSV_HEADER, rows)
    return EXIT_OK


# ══════════════════════════════════════════════════════════════════════════════
# asymptotic
# ══════════════════════════════════════════════════════════════════════════════

def cmd_asymptotic(cfg: RunConfig, pdf_path: str | None = None) -> int:
    """
    JSON report of the asymptotic angular index at the configured state.

    With `asymptotic.burn_in` set, the report also carries the empirical-measure
    rate over [burn_in, T_max].
    """
    section = cfg.section("asymptotic")
    estimate = asymptotic_index(
        cfg.system, cfg.state, cfg.frame, section["horizons"], cfg.dt, cfg.tolerances
    )
    report = estimate.to_dict()
    if "burn_in" in section:
        report["measure_rate"] = measure_index_estimate(
            cfg.system, cfg.state, cfg.frame, estimate.horizons[-1],
            float(section["burn_in"]), cfg.dt, cfg.tolerances,
        )
    report["system"] = cfg.system.describe()
    report["state"] = cfg.state.tolist()
    write_json(cfg.output_path, report)
    _export_pdf(report, pdf_path, "Asymptotic Maslov index")
    return EXIT_OK


# ══════════════════════════════════════════════════════════════════════════════
# scan
# ══════════════════════════════════════════════════════════════════════════════

def cmd_scan(cfg: RunConfig, pdf_path: str | None = None, threads: int | None = None) -> int:
    """
    Graph scan: one CSV row per seed plus a `.summary.json` sidecar with the best point.

    Raises:
        ConfigError: if the time section does not start at t = 0
    """
    if cfg.t0 != 0.0:
        raise ConfigError(f"scan integrates from t = 0; got time.t0 = {cfg.t0}")
    section = cfg.section("scan")
    d = cfg.system.dim
    graph = GraphParam.from_dict(section.get("graph", {}), d)
    result = graph_scan(
        cfg.system, graph, int(section["n_points"]), cfg.t1, cfg.dt,
        mapper=PoolMapper(threads), tol=cfg.tolerances,
    )

    header = ["point_index"]
    header += [f"q0_{i}" for i in range(d)] + [f"p0_{i}" for i in range(d)]
    header += ["min_mi", "max_mi", "skips"]
    rows = []
    for i, point in enumerate(result.points):
        lo, hi = result.running_mi_bounds[i]
        rows.append(
            [str(i)]
            + [format_float(v) for v in point]
            + [format_optional_int(lo), format_optional_int(hi), str(int(result.skips[i]))]
        )
    summary = result.summary()
    summary["system"] = cfg.system.describe()

    write_csv(cfg.output_path, header, rows)
    write_json(sidecar_path(cfg.output_path), summary)
    _export_pdf(summary, pdf_path, "Graph scan")
    return EXIT_OK


# ══════════════════════════════════════════════════════════════════════════════
# twist
# ══════════════════════════════════════════════════════════════════════════════

def _audit_samples(cfg: RunConfig, region: np.ndarray, n_samples: int, horizon: float):
    rng = np.random.default_rng(cfg.seed)
    d = cfg.system.dim
    samples = []
    for _ in range(n_samples):
        x0 = rng.uniform(region[:, 0], region[:, 1])
        frame = random_lagrangian(d, int(rng.integers(0, 2**31 - 1)))
        samples.append((x0, frame, float(rng.uniform(0.1 * horizon, horizon))))
    return samples


def cmd_twist(cfg: RunConfig, pdf_path: str | None = None, threads: int | None = None) -> int:
    """
    JSON TwistCertificate for the configured region.

    Optional `twist.audit` ({n_samples, horizon}) adds a non-positivity
    audit of random frames started inside the region, and `twist.sign_law`
    adds the sign-law check at the region center. A failed audit exits 1.
    """
    section = cfg.section("twist")
    region = np.asarray(section["region"], dtype=float)
    t = float(section.get("t", 0.0))
    cert = twist_certificate(
        cfg.system, region, int(section.get("grid_points", TWIST_GRID_POINTS)), t, cfg.tolerances
    )
    report: dict[str, Any] = cert.to_dict()
    report["system"] = cfg.system.describe()
    exit_code = EXIT_OK

    if section.get("sign_law"):
        center = region.mean(axis=1)
        report["sign_law"] = sign_law_check(cfg.system, center, t, dt=cfg.dt, tol=cfg.tolerances).to_dict()

    audit_section = section.get("audit")
    if isinstance(audit_section, dict):
        n_samples = int(audit_section.get("n_samples", 100))
        horizon = float(audit_section.get("horizon", 10.0))
        if n_samples < 1 or horizon <= 0:
            raise ConfigError("twist.audit needs n_samples >= 1 and horizon > 0")
        audit = nonpositivity_audit(
            cfg.system, _audit_samples(cfg, region, n_samples, horizon), cfg.dt,
            certificate=cert, mapper=PoolMapper(threads), tol=cfg.tolerances,
        )
        report["audit"] = audit.to_dict()
        if not audit.passed:
            logger.error(f"Non-positivity audit failed: {audit.violations} {audit.bound_violations}")
            exit_code = EXIT_INVARIANT_FAILURE

    write_json(cfg.output_path, report)
    _export_pdf(report, pdf_path, "Twist certificate")
    return exit_code


# ══════════════════════════════════════════════════════════════════════════════
# selftest
# ══════════════════════════════════════════════════════════════════════════════

def cmd_selftest(pdf_path: str | None = None) -> int:
    """Run the invariant suite, print the pass/fail table and exit 0 iff all pass."""
    from .selftest import render_results, run_selftest

    results = run_selftest()
    print(render_results(results))
    failed = [r.name for r in results if not r.passed]
    report = {
        "passed": not failed,
        "failed": failed,
        "checks": [r.to_dict() for r in results],
    }
    _export_pdf(report, pdf_path, "Selftest")
    if failed:
        logger.error(f"Selftest failed: {', '.join(failed)}")
        return EXIT_INVARIANT_FAILURE
    logger.info(f"Selftest passed ({len(results)} checks)")
    return EXIT_OK
