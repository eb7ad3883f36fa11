"""Command-line interface: one subcommand per scenario, plus identity
verification and an `all` target that chains everything for CI.

Contract: every successful run writes its outputs atomically together with
a JSON run manifest (command, flags, config, output list, status); identical
invocations produce byte-identical files.  Exit codes: 0 success, 1 runtime
or verification failure, 2 bad flags or config.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import amplitude_grid, find_w_crossings
from .dynamics import PropagationError
from .experiments import (
    ScenarioResult,
    _write_atomic,
    optimize_g1,
    optimize_to_scenario,
    reference_spec,
    scenario_population,
    sweep_fidelity_map_g2,
    sweep_fidelity_vs_time,
    sweep_gm,
    sweep_werner,
    write_result,
)
from .fockspace import build_basis
from .hamiltonians import verify_sw_identities
from .model import derive_dispersive, load_spec

#: residual bounds that sw-verify enforces for exit status
SW_R1_BOUND = 1.0e-10
SW_DRIFT_BOUND = 1.0e-10


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except PropagationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resonatorsim",
        description="Dispersive bus-coupled resonator network simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="population trajectories (closed form vs ab initio)")
    _add_config(p)
    p.add_argument("--n", type=int, default=3, help="number of distant resonators")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--chi-t-max", type=float, default=None,
                     help="time-axis end in units of pi (chi*t/pi), default 1.3")
    grp.add_argument("--t-max-us", type=float, default=None,
                     help="time-axis end in microseconds")
    p.add_argument("--points", type=int, default=600)
    p.add_argument("--kappa-mhz", type=float, default=None,
                   help="also tabulate damped populations at this uniform rate")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_evolve)

    p = sub.add_parser("crossings", help="equal-population times of the closed form")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--chi-t-max", type=float, default=1.5,
                   help="search window end in units of pi")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_crossings)

    p = sub.add_parser("fidelity", help="fidelity vs time for several decay rates")
    _add_config(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--kappas-mhz", default="0,0.25,0.5",
                   help="comma-separated decay rates in MHz")
    p.add_argument("--chi-t-max", type=float, default=1.3)
    p.add_argument("--points", type=int, default=600)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_fidelity)

    p = sub.add_parser("optimize-g1", help="calibrate the first coupling for n >= 5")
    _add_config(p)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--search-mhz", default="50:80", help="search interval lo:hi in MHz")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_optimize_g1)

    p = sub.add_parser("gm-sweep", help="fidelity vs direct resonator-resonator coupling")
    _add_config(p)
    p.add_argument("--ratios", default="inf,200,100,50,20,10,5,2,1",
                   help="comma-separated g/G_M ratios (inf = no direct coupling)")
    p.add_argument("--kappas-mhz", default="0,0.5")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_gm_sweep)

    p = sub.add_parser("werner", help="fidelity vs Werner mixing at the operation time")
    _add_config(p)
    p.add_argument("--p-grid", default=None,
                   help="comma-separated purities, default 0,0.1,...,1")
    p.add_argument("--thetas-pi", default="0,0.25,0.5",
                   help="comma-separated overlap angles in units of pi")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_werner)

    p = sub.add_parser("map-g2", help="fidelity map over second coupling and time")
    _add_config(p)
    p.add_argument("--ratios", default=None,
                   help="comma-separated g2/g ratios, default 0.5,0.55,...,1.5")
    p.add_argument("--kappa-mhz", type=float, default=0.10)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_map_g2)

    p = sub.add_parser("sw-verify", help="frame-transformation identity residuals")
    _add_config(p)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=_cmd_sw_verify)

    p = sub.add_parser("all", help="run every scenario into one directory")
    p.add_argument("--outdir", default="results")
    p.set_defaults(handler=_cmd_all)
    return parser


def _add_config(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None,
                   help="system JSON file (default: standard working point)")


# --- subcommand handlers ----------------------------------------------------


def _cmd_evolve(args) -> int:
    spec = _load_or_reference(args, args.n)
    if args.t_max_us is not None:
        chi = derive_dispersive(spec).chi_homogeneous
        chi_t_max = args.t_max_us * chi / np.pi
    else:
        chi_t_max = args.chi_t_max if args.chi_t_max is not None else 1.3
    res = scenario_population(
        args.n, spec,
        with_kappa_mhz=args.kappa_mhz,
        chi_t_max_over_pi=chi_t_max,
        points=args.points,
    )
    files = _emit(args, res, f"population_n{args.n}.csv")
    print(f"population_n{args.n}: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_crossings(args) -> int:
    res = _crossings_result(args.n, args.chi_t_max)
    roots = res.columns["chi_t_over_pi"]
    if len(roots):
        print("chi*t/pi: " + ", ".join(f"{r:g}" for r in np.round(roots, 6)))
    else:
        print(f"no equal-population times for n={args.n} up to chi*t/pi = {args.chi_t_max:g}")
    files = _emit(args, res, f"crossings_n{args.n}.csv")
    print(f"crossings_n{args.n}: {res.rows} rows -> {files[0]}")
    return 0


def _crossings_result(n: int, chi_t_max_over_pi: float) -> ScenarioResult:
    roots = find_w_crossings(n, np.pi * chi_t_max_over_pi)
    pops = np.abs(amplitude_grid(n, roots)) ** 2 if len(roots) else np.zeros((0, n))
    columns: dict = {"chi_t_over_pi": roots / np.pi}
    for j in range(n):
        columns[f"p_{j + 1}"] = pops[:, j]
    meta = {
        "name": f"crossings_n{n}",
        "n": n,
        "chi_t_max_over_pi": chi_t_max_over_pi,
        "version": __version__,
    }
    return ScenarioResult(meta["name"], columns, meta)


def _cmd_fidelity(args) -> int:
    spec = _load_or_reference(args, args.n)
    kappas = _float_list(args.kappas_mhz, "--kappas-mhz")
    res = sweep_fidelity_vs_time(
        args.n, spec, kappas,
        chi_t_max_over_pi=args.chi_t_max,
        points=args.points,
    )
    files = _emit(args, res, f"fidelity_n{args.n}.csv")
    x = res.columns["chi_t_over_pi"]
    for k in kappas:
        col = res.columns[f"f_kappa_{k:g}mhz"]
        i = int(np.argmax(col))
        print(f"kappa {k:g} MHz: peak fidelity {col[i]:.4f} at chi*t/pi = {x[i]:.3f}")
    print(f"fidelity_n{args.n}: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_optimize_g1(args) -> int:
    spec = _load_or_reference(args, args.n)
    search = _parse_interval(args.search_mhz, "--search-mhz")
    result = optimize_g1(args.n, spec, search)
    res = optimize_to_scenario(result, args.n, spec)
    files = _emit(args, res, f"optimize_g1_n{args.n}.csv")
    times = ", ".join(f"{t:.4f}" for t in result.chi_t_over_pi_equal)
    print(f"g1* = {result.g1_mhz:.3f} MHz (objective {result.objective:.3e})")
    print(f"near-equal times chi*t/pi: {times}")
    print(f"optimize_g1_n{args.n}: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_gm_sweep(args) -> int:
    spec = _load_or_reference(args, 3)
    ratios = _float_list(args.ratios, "--ratios", allow_inf=True)
    kappas = _float_list(args.kappas_mhz, "--kappas-mhz")
    res = sweep_gm(spec, ratios, kappas)
    files = _emit(args, res, "gm_sweep.csv")
    for k in kappas:
        col = res.columns[f"f_kappa_{k:g}mhz"]
        print(f"kappa {k:g} MHz: fidelity {col[0]:.4f} -> {col[-1]:.4f} over ratios")
    print(f"gm_sweep: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_werner(args) -> int:
    spec = _load_or_reference(args, 3)
    p_grid = None if args.p_grid is None else _float_list(args.p_grid, "--p-grid")
    thetas = _float_list(args.thetas_pi, "--thetas-pi")
    res = sweep_werner(spec, p_grid, thetas)
    files = _emit(args, res, "werner_sweep.csv")
    for th in thetas:
        col = res.columns[f"f_theta_{th:g}pi"]
        print(f"theta = {th:g} pi: fidelity spans [{col.min():.4f}, {col.max():.4f}]")
    print(f"werner_sweep: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_map_g2(args) -> int:
    spec = _load_or_reference(args, 3)
    ratios = None if args.ratios is None else _float_list(args.ratios, "--ratios")
    res = sweep_fidelity_map_g2(spec, ratios, kappa_mhz=args.kappa_mhz)
    files = _emit(args, res, "fidelity_map_g2.csv")
    x = res.columns["chi_t_over_pi"]
    best_name, best_val, best_x = "", -1.0, 0.0
    for name, col in res.columns.items():
        if name == "chi_t_over_pi":
            continue
        i = int(np.argmax(col))
        if col[i] > best_val:
            best_name, best_val, best_x = name, float(col[i]), float(x[i])
    print(f"map maximum {best_val:.4f} in column {best_name} at chi*t/pi = {best_x:.3f}")
    print(f"fidelity_map_g2: {res.rows} rows -> {files[0]}")
    return 0


def _cmd_sw_verify(args) -> int:
    spec = _load_or_reference(args, args.n if args.config is None else None)
    basis = build_basis(spec.n + 1, cutoff=1, excitation_cap=1)
    rep = verify_sw_identities(spec, basis)
    passed = rep.r1 <= SW_R1_BOUND and rep.eigenvalue_drift <= SW_DRIFT_BOUND
    report = {
        "r1_interaction_cancellation": rep.r1,
        "r2_second_order_truncation": rep.r2,
        "r2_relative": rep.r2_relative,
        "r3_dispersive_form_match": rep.r3,
        "eigenvalue_drift": rep.eigenvalue_drift,
        "spectrum_relative_error": rep.spectrum_relative_error,
        "passed": passed,
        "version": __version__,
    }
    out = Path(args.out) if args.out else Path("sw_verify.json")
    _write_atomic(out, json.dumps(report, indent=2, sort_keys=True) + "\n")
    files = [out, _write_manifest(args, [out], "ok" if passed else "check_failed")]
    for key, val in report.items():
        if isinstance(val, float):
            print(f"{key} = {val:.3e}")
    print(f"sw_verify: {'PASS' if passed else 'FAIL'} -> {files[0]}")
    return 0 if passed else 1


def _cmd_all(args) -> int:
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    outputs: list[Path] = []

    for n in (3, 4):
        res = scenario_population(n, reference_spec(n), with_kappa_mhz=0.5)
        outputs += write_result(res, outdir / f"population_n{n}.csv")
        print(f"population_n{n}: {res.rows} rows")
        res = sweep_fidelity_vs_time(n, reference_spec(n))
        outputs += write_result(res, outdir / f"fidelity_n{n}.csv")
        print(f"fidelity_n{n}: {res.rows} rows")
        res = _crossings_result(n, 1.5)
        outputs += write_result(res, outdir / f"crossings_n{n}.csv")
        print(f"crossings_n{n}: {res.rows} roots")

    result = optimize_g1(5, reference_spec(5))
    res = optimize_to_scenario(result, 5, reference_spec(5))
    outputs += write_result(res, outdir / "optimize_g1_n5.csv")
    print(f"optimize_g1_n5: g1* = {result.g1_mhz:.3f} MHz")

    for builder, stem in (
        (sweep_gm, "gm_sweep"),
        (sweep_werner, "werner_sweep"),
        (sweep_fidelity_map_g2, "fidelity_map_g2"),
    ):
        res = builder(reference_spec(3))
        outputs += write_result(res, outdir / f"{stem}.csv")
        print(f"{stem}: {res.rows} rows")

    spec = reference_spec(3)
    rep = verify_sw_identities(spec, build_basis(4, cutoff=1, excitation_cap=1))
    passed = rep.r1 <= SW_R1_BOUND and rep.eigenvalue_drift <= SW_DRIFT_BOUND
    report_path = outdir / "sw_verify.json"
    _write_atomic(
        report_path,
        json.dumps(
            {
                "r1_interaction_cancellation": rep.r1,
                "eigenvalue_drift": rep.eigenvalue_drift,
                "spectrum_relative_error": rep.spectrum_relative_error,
                "passed": passed,
                "version": __version__,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n",
    )
    outputs.append(report_path)
    print(f"sw_verify: {'PASS' if passed else 'FAIL'}")

    manifest = _write_manifest(args, outputs, "ok" if passed else "check_failed",
                               manifest_path=outdir / "all.manifest.json")
    print(f"{len(outputs)} output files + {manifest}")
    return 0 if passed else 1


# --- shared plumbing --------------------------------------------------------


def _load_or_reference(args, n: int | None):
    """Spec from --config when given (validating the resonator count),
    otherwise the standard working point with n resonators."""
    if args.config is not None:
        try:
            spec = load_spec(args.config)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        if n is not None and spec.n != n:
            raise UsageError(
                f"config {args.config} has {spec.n} resonators but the command needs {n}"
            )
        return spec
    if n is None:
        raise UsageError("either --config or --n is required")
    return reference_spec(n)


def _emit(args, res: ScenarioResult, default_name: str) -> list[Path]:
    out = Path(args.out) if args.out else Path(default_name)
    files = write_result(res, out)
    files.append(_write_manifest(args, files, "ok"))
    return files


def _write_manifest(args, outputs: list[Path], status: str,
                    manifest_path: Path | None = None) -> Path:
    primary = outputs[0]
    path = manifest_path or primary.with_name(primary.stem + ".manifest.json")
    flags = {
        k: v
        for k, v in vars(args).items()
        if k not in {"handler", "command"} and not callable(v)
    }
    payload = {
        "command": args.command,
        "args": flags,
        "config": getattr(args, "config", None),
        "outputs": [str(p) for p in outputs],
        "status": status,
        "version": __version__,
    }
    _write_atomic(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _float_list(raw: str, flag: str, allow_inf: bool = False) -> list[float]:
    values = []
    for token in raw.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            value = float(token)
        except ValueError:
            raise UsageError(f"{flag} expects comma-separated numbers, got {token!r}") from None
        if not allow_inf and not math.isfinite(value):
            raise UsageError(f"{flag} must be finite, got {token!r}")
        values.append(value)
    if not values:
        raise UsageError(f"{flag} received no values")
    return values


def _parse_interval(raw: str, flag: str) -> tuple[float, float]:
    parts = raw.split(":")
    if len(parts) != 2:
        raise UsageError(f"{flag} expects lo:hi, got {raw!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError:
        raise UsageError(f"{flag} expects lo:hi numbers, got {raw!r}") from None
    return lo, hi


if __name__ == "__main__":
    sys.exit(main())
