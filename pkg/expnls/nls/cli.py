"""Command-line driver: expnls {run,converge,coeffs} --config PATH [--out DIR] [--threads N]."""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence
import argparse
import csv
import json
import logging
import os

import numpy as np
from pendulum import now

from expnls.nls.coefficients import erk_alpha_set, precompute_tables
from expnls.nls.collocation import NodeError, collocation_nodes, collocation_tableau
from expnls.nls.config import ConfigError, RunConfig
from expnls.nls.diagnostics import DiagnosticsError, ErrorReport, Monitor, order_estimate
from expnls.nls.integrators import IntegrationError, StepCountError, integrate
from expnls.nls.method import MethodFamily, MethodSpec
from expnls.nls.problems import PROBLEMS, Problem, ProblemError
from expnls.nls.profile import ShootingError
from expnls.nls.spectral import Grid, GridError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CONVERGE_SCHEMA = 1
CONVERGE_COLUMNS = (
    "kind",
    "method",
    "h",
    "phase_error",
    "mass_error",
    "energy_error",
    "order",
    "residual",
    "points",
)
TIMING_COLUMNS = ("method", "h", "steps", "seconds", "precompute_seconds")
STEP_COLUMNS = ("step", "t", "mass", "energy", "phase_error", "angular_momentum")


def fmt(value) -> str:
    """17 significant digits for floats, so every double round-trips."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[dict]):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row.get(column)) for column in columns])


def write_json(path: Path, payload: dict):
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    return RunConfig.from_json(text)


def build_problem(config: RunConfig, grid: Grid) -> Problem:
    entry = PROBLEMS[config.problem.name]
    try:
        return entry.builder(grid, **config.problem.params)
    except (ProblemError, GridError) as e:
        raise ConfigError(f"Invalid problem.params: {e}") from e


class SnapshotWriter:
    """Observer dumping |psi|^2 as raw little-endian float64 plus a text sidecar."""

    def __init__(self, out_dir: Path, grid: Grid, times: Sequence[float], h: float):
        self.out_dir = out_dir
        self.grid = grid
        self.steps = {round(t / h): t for t in times}
        self.written: list[Path] = []

    def __call__(self, step: int, t: float, psi: np.ndarray):
        if step not in self.steps:
            return
        index = len(self.written)
        path = self.out_dir / f"snapshot_{index:03d}.f8"
        path.write_bytes((np.abs(psi) ** 2).astype("<f8").tobytes())
        extents = " ".join(f"{fmt(a.x_left)} {fmt(a.x_right)}" for a in self.grid.axes)
        sidecar = (
            f"dims {self.grid.dims}\n"
            f"shape {' '.join(str(m) for m in self.grid.shape)}\n"
            f"extents {extents}\n"
            f"time {fmt(t)}\n"
            f"dtype <f8\n"
            f"order C\n"
        )
        path.with_suffix(".txt").write_text(sidecar)
        self.written.append(path)


def _run_cell(problem: Problem, config: RunConfig, method: MethodSpec, h: float, threads: int):
    monitor = Monitor(problem, track_energy="energy" in config.observers)
    result = integrate(
        problem,
        method,
        config.T,
        h,
        observers=[monitor],
        config=config.stepper,
        contour=config.contour,
        workers=threads,
    )
    return result, monitor.report(result.label, h, result.seconds)


def cmd_run(config: RunConfig, out_dir: Path, threads: int) -> int:
    if len(config.methods) != 1 or len(config.h) != 1:
        raise ConfigError("run takes exactly one method and one h; use converge for sweeps")
    method, h = config.method_specs[0], config.h[0]
    grid = config.grid.build(workers=threads)
    problem = build_problem(config, grid)
    out_dir.mkdir(parents=True, exist_ok=True)

    monitor = Monitor(problem, track_energy="energy" in config.observers)
    snapshots = SnapshotWriter(out_dir, grid, config.snapshots, h)
    result = integrate(
        problem,
        method,
        config.T,
        h,
        observers=[monitor, snapshots],
        config=config.stepper,
        contour=config.contour,
        workers=threads,
    )
    report = monitor.report(result.label, h, result.seconds)

    columns = [c for c in STEP_COLUMNS if c in ("step", "t") or c in config.observers]
    if not problem.has_exact and "phase_error" in columns:
        columns.remove("phase_error")
    if grid.dims != 2 and "angular_momentum" in columns:
        columns.remove("angular_momentum")
    write_csv(out_dir / "steps.csv", columns, monitor.rows())

    summary = report.summary()
    summary.update(
        problem=problem.name,
        precompute_seconds=result.precompute_seconds,
        snapshots=[p.name for p in snapshots.written],
        finished_at=now("UTC").to_iso8601_string(),
        config=config.as_dict(),
    )
    write_json(out_dir / "summary.json", summary)
    logger.info(
        "Run %s h=%g: E_P=%s E_M=%.3e E_E=%.3e",
        report.label,
        h,
        report.phase_error,
        report.mass_error,
        report.energy_error,
    )
    return EXIT_OK


def _order_rows(reports: Sequence[ErrorReport]) -> list[dict]:
    rows = []
    for label in dict.fromkeys(r.label for r in reports):
        points = [(r.h, r.phase_error) for r in reports if r.label == label]
        if len(points) < 2 or any(e is None for _, e in points):
            continue
        try:
            estimate = order_estimate(points)
        except DiagnosticsError as e:
            logger.warning("No order estimate for %s: %s", label, e)
            continue
        rows.append(
            {
                "kind": "order",
                "method": label,
                "order": estimate.slope,
                "residual": estimate.residual,
                "points": estimate.count,
            }
        )
    return rows


def cmd_converge(config: RunConfig, out_dir: Path, threads: int) -> int:
    grid = config.grid.build(workers=1)
    problem = build_problem(config, grid)
    out_dir.mkdir(parents=True, exist_ok=True)
    cells = sorted(
        ((m, h) for m in config.method_specs for h in config.h),
        key=lambda cell: (cell[0].label(), -cell[1]),
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        outcomes = list(
            executor.map(lambda cell: _run_cell(problem, config, cell[0], cell[1], 1), cells)
        )
    reports = [report for _, report in outcomes]

    rows = [
        {
            "kind": "cell",
            "method": r.label,
            "h": r.h,
            "phase_error": r.phase_error,
            "mass_error": r.mass_error,
            "energy_error": r.energy_error,
        }
        for r in reports
    ]
    rows += _order_rows(reports)
    write_csv(out_dir / "converge.csv", CONVERGE_COLUMNS, rows)
    write_csv(
        out_dir / "timings.csv",
        TIMING_COLUMNS,
        [
            {
                "method": result.label,
                "h": result.h,
                "steps": result.steps,
                "seconds": result.seconds,
                "precompute_seconds": result.precompute_seconds,
            }
            for result, _ in outcomes
        ],
    )
    write_json(
        out_dir / "converge.json",
        {
            "schema": CONVERGE_SCHEMA,
            "problem": problem.name,
            "columns": list(CONVERGE_COLUMNS),
            "finished_at": now("UTC").to_iso8601_string(),
            "config": config.as_dict(),
        },
    )
    return EXIT_OK


def coefficient_rows(config: RunConfig, method: MethodSpec, h: float, threads: int):
    """Per-mode a_{k,l}, b_k and regime, plus the mode-0 check against the tableau."""
    grid = config.grid.build(workers=threads)
    nodes = collocation_nodes(method.stages, method.nodes)
    nu = PROBLEMS[config.problem.name].nu
    tables = precompute_tables(
        grid,
        h,
        nodes,
        nu=nu,
        alpha_set=erk_alpha_set(nodes),
        contour=config.contour,
        workers=threads,
    )
    s = nodes.s
    z = tables.symbols().reshape(-1)
    regime = tables.regime().reshape(-1)
    a = tables.a.reshape(s, s, -1)
    b = tables.b.reshape(s, -1)
    indices = np.array(np.unravel_index(np.arange(z.size), grid.shape)).T
    rows = []
    for p in range(z.size):
        row = {f"index{axis}": int(indices[p, axis]) for axis in range(grid.dims)}
        row.update(z_re=z[p].real, z_im=z[p].imag, regime=regime[p])
        for k in range(s):
            for ell in range(s):
                row[f"a{k}{ell}_re"] = a[k, ell, p].real
                row[f"a{k}{ell}_im"] = a[k, ell, p].imag
            row[f"b{k}_re"] = b[k, p].real
            row[f"b{k}_im"] = b[k, p].imag
        rows.append(row)
    columns = [f"index{axis}" for axis in range(grid.dims)] + ["z_re", "z_im", "regime"]
    for k in range(s):
        columns += [f"a{k}{ell}_{part}" for ell in range(s) for part in ("re", "im")]
    columns += [f"b{k}_{part}" for k in range(s) for part in ("re", "im")]

    tableau = collocation_tableau(nodes)
    zero = (0,) * grid.dims
    defect = max(
        float(np.max(np.abs(tables.a[(slice(None), slice(None)) + zero] - tableau.a))),
        float(np.max(np.abs(tables.b[(slice(None),) + zero] - tableau.b))),
    )
    direct = np.abs(z) > config.contour.switch_radius
    first_direct = None
    if np.any(direct):
        p = int(np.argmin(np.where(direct, np.abs(z), np.inf)))
        first_direct = {"index": indices[p].tolist(), "abs_z": float(abs(z[p]))}
    check = {
        "method": method.label(),
        "h": h,
        "nu": nu,
        "mode0_defect": defect,
        "mode0_matches_tableau": defect <= 1e-13,
        "contour_modes": int(tables.contour_modes.sum()),
        "mixed_modes": int(np.sum(regime == "mixed")),
        "first_direct_mode": first_direct,
    }
    return columns, rows, check


def cmd_coeffs(config: RunConfig, out_dir: Path, threads: int) -> int:
    methods = [m for m in config.method_specs if m.family != MethodFamily.SPLITTING]
    if not methods:
        raise ConfigError("coeffs needs an erk or lawson method with stages")
    columns, rows, check = coefficient_rows(config, methods[0], config.h[0], threads)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "coeffs.csv", columns, rows)
    write_json(out_dir / "coeffs.json", check)
    if not check["mode0_matches_tableau"]:
        logger.warning("Mode-0 coefficients deviate from the tableau by %.3e", check["mode0_defect"])
    return EXIT_OK


COMMANDS = {"run": cmd_run, "converge": cmd_converge, "coeffs": cmd_coeffs}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expnls", description="Fourier pseudospectral NLS/GPE time stepping"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("--config", required=True, help="JSON run configuration")
        sub.add_argument("--out", default=None, help="output directory, overrides the config")
        sub.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
        sub.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    threads = args.threads if args.threads > 0 else (os.cpu_count() or 1)
    try:
        config = load_config(args.config)
        out_dir = Path(args.out or config.output_dir)
        return COMMANDS[args.command](config, out_dir, threads)
    except (ConfigError, StepCountError, NodeError, ProblemError, GridError) as e:
        logger.error("Configuration error: %s", e)
        return EXIT_CONFIG
    except (IntegrationError, ShootingError, DiagnosticsError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
