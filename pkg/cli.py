#!/usr/bin/env python3
"""
Command-line front end for the time-periodic kernel library.

    python cli.py eval   --config run.json --out results
    python cli.py solve  --config run.json --format json
    python cli.py decay  --config run.json
    python cli.py integrability --config run.json
    python cli.py verify --only decay --only solver

Exit codes: 0 success, 1 failed check (or every eval row failed),
2 invalid configuration, 3 unreadable or unwritable files.
"""

import argparse
import logging
import sys
import time
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from acceptance_suite import AcceptanceSuite
from field_io import load_field, save_field
from kernel_errors import ConfigError, FieldIOError, KernelError
from mode_kernels import gamma_mode, mode_kernel
from periodic_kernel import decay_fit, gamma_perp, gamma_tp_velocity, lq_probe, probe_exponents
from reports import CODE_VERSION, Report, ReportRecord, write_table
from run_config import RunConfig, apply_overrides, load_config
from spectral_solver import (BumpForcing, GaussianForcing, GridSpec, SolenoidalBumpForcing, ZeroForcing,
                             convolve_realspace, field_decay_slope, manufactured_solution, solve_tp,
                             split_steady_periodic)
from steady_kernels import (gamma_laplace, gamma_oseen, gamma_stokes, pressure_kernel, psi_oseen,
                            steady_velocity_kernel)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

STEADY_KERNELS = {
    "gamma_laplace": gamma_laplace,
    "gamma_stokes": gamma_stokes,
    "pressure_kernel": pressure_kernel,
    "psi_oseen": psi_oseen,
    "gamma_oseen": gamma_oseen,
    "steady_velocity_kernel": steady_velocity_kernel,
}


# --------------------------------------------------------------------------
# eval
# --------------------------------------------------------------------------

def _component_rows(t, x, value) -> List[Dict]:
    """One row per tensor component, labelled with 1-based indices."""
    value = np.asarray(value, dtype=complex)
    base = {"t": t, **{f"x{i + 1}": float(c) for i, c in enumerate(x)}}
    if value.ndim == 0:
        return [{**base, "component": "value", "re": value.real, "im": value.imag, "error": ""}]
    rows = []
    for index in np.ndindex(value.shape):
        label = "".join(str(i + 1) for i in index)
        rows.append({**base, "component": label, "re": value[index].real, "im": value[index].imag,
                     "error": ""})
    return rows


def evaluate_rows(config: RunConfig) -> pd.DataFrame:
    """Evaluate the configured kernel at every sample point (and time)."""
    params = config.kernel_params()
    trunc = config.truncation_spec()
    section = config.eval
    points = np.asarray(section.points if section.points is not None else [np.eye(params.n)[0]], dtype=float)
    timed = section.kernel in ("gamma_perp", "gamma_tp_velocity")
    times = [float(t) for t in section.times] if timed else [float("nan")]

    rows = []
    for x in points:
        for t in times:
            try:
                if section.kernel in STEADY_KERNELS:
                    value = STEADY_KERNELS[section.kernel](x, params)
                elif section.kernel == "gamma_mode":
                    value = gamma_mode(section.mode, x, params)
                elif section.kernel == "mode_kernel":
                    value = mode_kernel(section.mode, x, params, backend=section.backend).g
                elif section.kernel == "gamma_perp":
                    value = gamma_perp(t, x, params, trunc, method=section.method,
                                       workers=config.threads)["value"]
                else:
                    value = gamma_tp_velocity(t, x, params, trunc, method=section.method,
                                              workers=config.threads)["value"]
                rows.extend(_component_rows(t, x, value))
            except KernelError as exc:
                logger.warning("eval %s at %s failed: %s", section.kernel, x, exc)
                base = {"t": t, **{f"x{i + 1}": float(c) for i, c in enumerate(x)}}
                rows.append({**base, "component": "", "re": float("nan"), "im": float("nan"),
                             "error": f"{type(exc).__name__}: {exc}"})
    columns = ["t"] + [f"x{i + 1}" for i in range(params.n)] + ["component", "re", "im", "error"]
    return pd.DataFrame(rows, columns=columns)


def cmd_eval(config: RunConfig, args) -> int:
    frame = evaluate_rows(config)
    write_table(frame, args.out, "eval", args.format, metadata=_metadata(config, "eval"))
    failed = int((frame["error"] != "").sum())
    print(f"{'❌' if failed else '✅'} {config.eval.kernel}: {len(frame) - failed} rows, {failed} failed")
    if len(frame) and failed == len(frame):
        return EXIT_FAILED
    return EXIT_OK


# --------------------------------------------------------------------------
# solve
# --------------------------------------------------------------------------

def build_forcing(config: RunConfig, grid: GridSpec):
    """Forcing scenario and its sampled field; the scenario is None for file and manufactured input."""
    section = config.solve
    params = config.kernel_params()
    n = params.n
    if section.scenario == "gaussian_bump":
        scenario = GaussianForcing(n, params.period, width=section.width, steady_weight=section.steady_weight)
    elif section.scenario == "bump":
        scenario = BumpForcing(n, params.period, radius=section.radius, power=section.power,
                               steady_weight=section.steady_weight)
    elif section.scenario == "solenoidal_bump":
        scenario = SolenoidalBumpForcing(n, params.period, radius=section.radius, power=section.power)
    elif section.scenario == "zero":
        scenario = ZeroForcing(n, params.period)
    else:
        return None, None
    return scenario, scenario.on_grid(grid)


def cross_check_points(grid: GridSpec, support_radius: float, count: int) -> np.ndarray:
    """Grid nodes near radius 2R in evenly spread directions, outside the support."""
    angles = 2.0 * np.pi * np.arange(count) / count
    points = []
    for angle in angles:
        target = np.zeros(grid.n)
        target[0], target[1] = np.cos(angle), np.sin(angle)
        target = 2.0 * support_radius * target
        node = np.round((target + 0.5 * grid.box_edge) / grid.spacing) * grid.spacing - 0.5 * grid.box_edge
        if np.linalg.norm(node) <= support_radius:
            node = node * (1.0 + 2.0 * grid.spacing / np.linalg.norm(node))
            node = np.round((node + 0.5 * grid.box_edge) / grid.spacing) * grid.spacing - 0.5 * grid.box_edge
        points.append(node)
    return np.unique(np.asarray(points), axis=0)


def cmd_solve(config: RunConfig, args) -> int:
    params = config.kernel_params()
    section = config.solve
    exact = None
    if section.scenario == "file":
        forcing, grid = load_field(section.forcing_file)
        if grid.n != params.n or not np.isclose(grid.period, params.period):
            raise ConfigError("forcing file grid disagrees with params.n or params.period")
        scenario = None
    elif section.scenario == "manufactured":
        grid = config.grid_spec()
        exact = manufactured_solution(grid, params, seed=config.seed, n_modes=section.manufactured_modes)
        forcing, scenario = exact["f"], None
    else:
        grid = config.grid_spec()
        scenario, forcing = build_forcing(config, grid)

    started = time.perf_counter()
    result = solve_tp(forcing, params, grid, workers=config.threads)
    save_field(f"{args.out}/u.npz", result.u, grid)
    save_field(f"{args.out}/p.npz", result.p, grid)

    report = Report(metadata=_metadata(config, "solve"))
    report.metadata["zero_mode_report"] = result.zero_mode_report
    report.add(ReportRecord("residual", "solve", "operator_apply(u, p) reproduces f", result.residual_linf,
                            result.relative_residual, 1e-10))
    report.add(ReportRecord("divergence", "solve", "spectral divergence of u vanishes", result.divergence_linf,
                            result.divergence_linf, 1e-12))

    if exact is not None:
        exact_u = exact["u"].values.real
        error = float(np.max(np.abs(result.u.values - exact_u)) / max(np.max(np.abs(exact_u)), 1e-300))
        report.add(ReportRecord("manufactured_error", "solve", "u equals the manufactured velocity", error,
                                error, 1e-10))
        # pressure is determined up to its spatial mean at each time
        exact_p = exact["p"].values.real
        exact_p = exact_p - exact_p.mean(axis=tuple(range(1, grid.n + 1)), keepdims=True)
        p_error = float(np.max(np.abs(result.p.values - exact_p)) / max(np.max(np.abs(exact_p)), 1e-300))
        report.add(ReportRecord("manufactured_pressure_error", "solve",
                                "p equals the manufactured pressure minus its mean", p_error, p_error, 1e-10))
    if section.scenario == "zero":
        size = float(np.max(np.abs(result.u.values)))
        report.add(ReportRecord("zero_forcing", "solve", "zero forcing gives zero velocity", size, size, 0.0))

    if section.split:
        steady, periodic = split_steady_periodic(result.u)
        save_field(f"{args.out}/u_periodic.npz", periodic, grid)
        mean = float(np.max(np.abs(periodic.values.mean(axis=0))))
        report.add(ReportRecord("split_periodic_mean", "solve", "periodic part has zero time mean", mean, mean,
                                1e-12))
        if section.decay_fit:
            report.metadata["decay"] = {
                "steady_slope": field_decay_slope(steady, grid)["slope"],
                "periodic_slope": field_decay_slope(periodic.values, grid)["slope"],
            }

    if section.cross_check:
        if scenario is None or scenario.name == "zero":
            raise ConfigError("solve.cross_check needs a compactly supported built-in forcing")
        t_index = 1
        errors, scale = [], 0.0
        for x in cross_check_points(grid, scenario.support_radius, section.cross_check_points):
            on_grid = result.u.values[(t_index,) + grid.node_index(x)].real
            direct = convolve_realspace(scenario, grid.times[t_index], x, params)["u"]
            errors.append(float(np.linalg.norm(direct - on_grid)))
            scale = max(scale, float(np.linalg.norm(on_grid)))
        worst = max(errors) / scale if scale > 0 else max(errors)
        report.add(ReportRecord("cross_check", "solve", "real-space convolution equals the torus solution",
                                worst, worst, 0.02, detail=f"{len(errors)} grid nodes"))

    report.metadata["wall_time_s"] = round(time.perf_counter() - started, 3)
    report.write(args.out, args.format, stem="solve_report")
    print(report.render_text())
    return EXIT_OK if report.passed else EXIT_FAILED


# --------------------------------------------------------------------------
# decay / integrability / verify
# --------------------------------------------------------------------------

def _default_directions(n: int) -> np.ndarray:
    eye = np.eye(n)
    return np.array([eye[0], -eye[0], eye[1]])


def cmd_decay(config: RunConfig, args) -> int:
    params = config.kernel_params()
    trunc = config.truncation_spec()
    section = config.decay
    directions = np.asarray(section.directions, dtype=float) if section.directions else _default_directions(params.n)
    frames, slopes = [], []
    warned = False
    for direction in directions:
        for order in section.deriv_orders:
            fit = decay_fit(direction, section.radii, params, trunc, deriv_order=order, r=section.r,
                            workers=config.threads)
            table = fit["table"].copy()
            table["direction"] = " ".join(f"{c:g}" for c in direction)
            table["deriv_order"] = order
            frames.append(table)
            slopes.append({"direction": table["direction"].iloc[0], "deriv_order": order,
                           "slope": fit["slope"], "expected_slope": fit["expected_slope"],
                           "attained_k": fit["attained_k"]})
            warned = warned or fit["truncation_warning"]
            print(f"   direction ({table['direction'].iloc[0]}), order {order}: slope {fit['slope']:.3f}"
                  f" (expected {fit['expected_slope']})")
    metadata = _metadata(config, "decay")
    metadata.update({"fits": slopes, "truncation_warning": warned})
    write_table(pd.concat(frames, ignore_index=True), args.out, "decay", args.format, metadata=metadata)
    return EXIT_OK


def cmd_integrability(config: RunConfig, args) -> int:
    params = config.kernel_params()
    section = config.integrability
    q_list = section.q_list or list(probe_exponents(params.n, section.deriv_order))
    frames, fits = [], []
    for q in q_list:
        probe = lq_probe(q, params, section.shells, deriv_order=section.deriv_order)
        table = probe["table"].copy()
        table["q"] = q
        frames.append(table)
        fits.append({"q": q, "slope": probe["slope"], "expected_slope": probe["expected_slope"],
                     "bounded": probe["bounded"]})
        print(f"   q = {q:.3f}: slope {probe['slope']:.3f} (expected {probe['expected_slope']:.3f},"
              f" critical q {probe['critical_q']:.3f})")
    metadata = _metadata(config, "integrability")
    metadata["fits"] = fits
    write_table(pd.concat(frames, ignore_index=True), args.out, "integrability", args.format, metadata=metadata)
    return EXIT_OK


def cmd_verify(config: RunConfig, args) -> int:
    report = AcceptanceSuite(config).run(only=args.only or None)
    report.write(args.out, args.format, stem="verify_report")
    print(report.render_text())
    return EXIT_OK if report.passed else EXIT_FAILED


COMMANDS = {
    "eval": cmd_eval,
    "solve": cmd_solve,
    "decay": cmd_decay,
    "integrability": cmd_integrability,
    "verify": cmd_verify,
}


def _metadata(config: RunConfig, command: str) -> Dict:
    return {"command": command, "version": CODE_VERSION, "config": config.to_dict()}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Time-periodic Stokes/Oseen fundamental solutions")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", default="tp_output", help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--threads", type=int, help="worker threads for FFTs and mode tables")
    common.add_argument("--n", type=int, help="override params.n")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("eval", "solve", "decay", "integrability"):
        sub.add_parser(name, parents=[common])
    verify = sub.add_parser("verify", parents=[common])
    verify.add_argument("--only", action="append", default=[], help="group or record name (repeatable)")
    verify.add_argument("--tolerance", action="append", default=[], metavar="NAME=VALUE",
                        help="override one record's tolerance (repeatable)")
    return parser


def _tolerance_overrides(config: RunConfig, pairs: List[str]) -> RunConfig:
    for pair in pairs:
        name, _, value = pair.partition("=")
        try:
            tolerance = float(value)
        except ValueError:
            raise ConfigError(f"--tolerance expects NAME=VALUE, got {pair!r}")
        if not name or not tolerance >= 0:
            raise ConfigError(f"--tolerance needs a name and a nonnegative value, got {pair!r}")
        config.verify.tolerances[name] = tolerance
    return config


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        config = apply_overrides(load_config(args.config), seed=args.seed, threads=args.threads, n=args.n)
        if args.command == "verify":
            config = _tolerance_overrides(config, args.tolerance)
        print(f"🔬 {args.command} (n={config.params.n}, lambda={config.params.lam:g}, T={config.params.period:g})")
        return COMMANDS[args.command](config, args)
    except ConfigError as exc:
        print(f"❌ configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FieldIOError as exc:
        print(f"❌ I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except KernelError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
