"""Command-line driver: validate a config, run one experiment, write reports.

Exit codes are a stable contract: 0 success/pass, 1 tolerance failure,
2 configuration error, 3 numerical failure (solver or calibration).
Identical configs reproduce byte-identical CSV and JSON outputs except for
the wall-time field of the run report.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .classical import NumericalError, integrate, invert_momentum
from .config import ConfigError, build_action, build_constants, build_grid, load_config
from .correspondence import BoundaryError, ehrenfest_run, hbar_sweep
from .criterion import check_criterion, check_linearized
from .propagator import CalibrationError, build_kernel, magic_time_step

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CSV_VERSION = "dtqm-csv-v1"


def _write_csv(path: str, columns: list[str], rows) -> None:
    lines = [f"# {CSV_VERSION} columns: {','.join(columns)}"]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_cell(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cell(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_report(outdir: str, report: dict) -> str:
    path = os.path.join(outdir, "report.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _threads() -> int:
    raw = os.environ.get("DTQM_THREADS", "")
    try:
        return max(0, int(raw)) if raw else 0
    except ValueError:
        return 0


def _cmd_check_action(cfg: dict, outdir: str, formats: set[str]) -> tuple[int, dict, list[str]]:
    constants = build_constants(cfg, None)
    model = build_action(cfg, constants)
    run = cfg["run"]
    report = check_criterion(model, tuple(run["domain"]), run["n_samples"], run["tolerance"])
    results = {"criterion": report.as_dict()}
    if cfg["action"]["kind"] == "vector_potential_2d":
        results["linearized_max_trace"] = check_linearized(model, tuple(run["domain"]), run["n_samples"])
    expected_constant = run["expect"] == "admissible"
    failures = []
    if report.is_constant != expected_constant:
        failures.append(
            f"expected {'admissible' if expected_constant else 'inadmissible'} action, "
            f"criterion returned is_constant={report.is_constant}"
        )
    return (EXIT_OK if not failures else EXIT_TOLERANCE), results, failures


def _cmd_evolve(cfg: dict, outdir: str, formats: set[str]) -> tuple[int, dict, list[str]]:
    grid = build_grid(cfg)
    constants = build_constants(cfg, grid)
    model = build_action(cfg, constants)
    run = cfg["run"]
    if run["amplitude_mode"] == "analytic" and cfg["action"]["kind"] not in ("standard", "gauged"):
        raise ConfigError("analytic amplitude mode needs a standard or gauged action; use 'calibrated'")
    series = ehrenfest_run(
        model,
        grid,
        run["x0"],
        run["p0"],
        run["alpha"],
        run["n_steps"],
        amplitude_mode=run["amplitude_mode"],
    )
    if "csv" in formats:
        rows = zip(
            series.steps,
            series.x_mean,
            series.p_mean,
            series.x_spread,
            series.norm,
            series.x_classical,
            series.p_classical,
        )
        _write_csv(
            os.path.join(outdir, "evolve.csv"),
            ["step", "x_mean", "p_mean", "x_spread", "norm", "x_classical", "p_classical"],
            rows,
        )
    max_norm_drift = float(np.max(np.abs(series.norm - 1.0)))
    results = {
        "n_steps": run["n_steps"],
        "tau": constants.time_step,
        "max_norm_drift": max_norm_drift,
        "max_position_deviation": series.max_position_deviation(),
        "max_momentum_deviation": series.max_momentum_deviation(),
        "final_x_mean": float(series.x_mean[-1]),
        "final_norm": float(series.norm[-1]),
    }
    failures = []
    if run["tracking_tolerance"] is not None:
        tol = run["tracking_tolerance"]
        if results["max_position_deviation"] > tol:
            failures.append(f"position tracking {results['max_position_deviation']:.3e} > {tol:.3e}")
        if results["max_momentum_deviation"] > tol:
            failures.append(f"momentum tracking {results['max_momentum_deviation']:.3e} > {tol:.3e}")
    if run["norm_tolerance"] is not None and max_norm_drift > run["norm_tolerance"]:
        failures.append(f"norm drift {max_norm_drift:.3e} > {run['norm_tolerance']:.3e}")
    return (EXIT_OK if not failures else EXIT_TOLERANCE), results, failures


def _cmd_classical(cfg: dict, outdir: str, formats: set[str]) -> tuple[int, dict, list[str]]:
    constants = build_constants(cfg, None)
    model = build_action(cfg, constants)
    run = cfg["run"]
    if run["x_minus1"] is not None:
        x_minus1 = run["x_minus1"]
    else:
        x_minus1 = invert_momentum(model, run["x0"], run["p0"])
    trajectory = integrate(model, run["x0"], x_minus1, run["n_steps"])
    if "csv" in formats:
        rows = zip(trajectory.times, trajectory.positions, trajectory.momenta, trajectory.residuals)
        _write_csv(os.path.join(outdir, "classical.csv"), ["step", "x", "p", "residual"], rows)
    results = {
        "status": trajectory.label(),
        "steps_completed": int(trajectory.times[-1]),
        "x_minus1": float(x_minus1),
        "max_residual": float(trajectory.residuals.max()),
        "final_x": float(trajectory.positions[-1]),
    }
    failures = []
    if trajectory.status.value != run["expect_status"]:
        failures.append(f"expected status '{run['expect_status']}', got '{trajectory.label()}'")
    return (EXIT_OK if not failures else EXIT_TOLERANCE), results, failures


def _cmd_sweep(cfg: dict, outdir: str, formats: set[str]) -> tuple[int, dict, list[str]]:
    constants_cfg = cfg["constants"]
    run = cfg["run"]

    def factory(hbar: float):
        return build_action(cfg, build_constants(cfg, None, hbar_override=hbar))

    report = hbar_sweep(
        factory,
        run["hbar_list"],
        run["x0"],
        run["p0"],
        run["n_steps"],
        cfg["grid"]["n_points"],
        alpha=run["alpha"],
        max_workers=_threads(),
    )
    if "csv" in formats and report.finest is not None:
        s = report.finest
        rows = zip(s.steps, s.x_mean, s.p_mean, s.x_spread, s.norm, s.x_classical, s.p_classical)
        _write_csv(
            os.path.join(outdir, "sweep_finest.csv"),
            ["step", "x_mean", "p_mean", "x_spread", "norm", "x_classical", "p_classical"],
            rows,
        )
    results = {"sweep": report.as_dict(), "mass": constants_cfg["mass"], "tau": constants_cfg["tau"]}
    failures = []
    if report.errors:
        failures.extend(f"hbar={h}: {msg}" for h, msg in sorted(report.errors.items(), reverse=True))
    if not report.monotone_flag:
        failures.append("deviation sequence is not non-increasing in hbar")
    return (EXIT_OK if not failures else EXIT_TOLERANCE), results, failures


def _cmd_build(cfg: dict, outdir: str, formats: set[str]) -> tuple[int, dict, list[str]]:
    grid = build_grid(cfg)
    constants = build_constants(cfg, grid)
    model = build_action(cfg, constants)
    run = cfg["run"]
    if run["amplitude_mode"] == "analytic" and cfg["action"]["kind"] not in ("standard", "gauged"):
        raise ConfigError("analytic amplitude mode needs a standard or gauged action; use 'calibrated'")
    kernel = build_kernel(grid, model, run["amplitude_mode"])
    eig_magnitudes = np.abs(np.linalg.eigvals(kernel.matrix))
    results = {
        "n_points": grid.n_total,
        "spacing": grid.spacing[0],
        "tau": constants.time_step,
        "magic_tau": magic_time_step(grid, constants.mass, constants.hbar),
        "amplitude_mode": run["amplitude_mode"],
        "amplitude_magnitude": abs(kernel.amplitude),
        "amplitude_phase": float(np.angle(kernel.amplitude)),
        "unitarity_deviation": kernel.unitarity_deviation,
        "eig_magnitude_min": float(eig_magnitudes.min()),
        "eig_magnitude_max": float(eig_magnitudes.max()),
    }
    failures = []
    limit = run["max_unitarity_deviation"]
    if limit is not None and kernel.unitarity_deviation > limit:
        failures.append(f"unitarity deviation {kernel.unitarity_deviation:.3e} > {limit:.3e}")
    return (EXIT_OK if not failures else EXIT_TOLERANCE), results, failures


_HANDLERS = {
    "check-action": _cmd_check_action,
    "evolve": _cmd_evolve,
    "classical": _cmd_classical,
    "sweep": _cmd_sweep,
    "build": _cmd_build,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dtqm",
        description="Discrete-time quantum mechanics experiments on periodic lattices.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("check-action", "evaluate the unitarity criterion on an action"),
        ("evolve", "evolve a Gaussian packet and track observables"),
        ("classical", "integrate the discrete classical equation of motion"),
        ("sweep", "run the hbar sweep against one classical trajectory"),
        ("build", "build a kernel and report its unitarity diagnostics"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON experiment config")
        p.add_argument("--out", default=None, help="output directory (overrides output.directory)")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="restrict data outputs to one format")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        cfg = load_config(args.config, args.command)
        outdir = args.out if args.out is not None else cfg["output"]["directory"]
        os.makedirs(outdir, exist_ok=True)
        formats = {args.format} if args.format else set(cfg["output"]["formats"])
        code, results, failures = _HANDLERS[args.command](cfg, outdir, formats)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CalibrationError, NumericalError, BoundaryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    report = {
        "artifact_version": __version__,
        "command": args.command,
        "config": cfg["raw"],
        "results": results,
        "pass": code == EXIT_OK,
        "failures": failures,
        "wall_time_s": time.perf_counter() - started,
    }
    _write_report(outdir, report)
    for line in failures:
        print(f"FAIL: {line}", file=sys.stderr)
    return code


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
