"""Command-line front end: ``casimir-stack <command> [config.json] [options]``.

Commands write one CSV (or JSON) table to stdout; summaries and
diagnostics go to stderr. Exit codes: 0 success, 1 physics or validation
failure, 2 usage or parse error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np
from scipy import constants

from .casimir import (bounds_check, energy_lifshitz, force_from_action, force_slab_qw,
                      force_slab_s, force_slab_w, force_vacuum, action_3layer)
from .config import RunConfig, load_config
from .errors import AccuracyError, CasimirError, ConfigError, DomainError, MappingError
from .greens import g_scalar
from .quad import QuadratureSpec
from .response import (Kind, MediumClass, classify, eval_chi, eval_imag_axis, kk_model,
                       validate)
from .stack import Layer, Stack, TransverseMode

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3

# Column headers per command and the unit kind of each column for --si.
HEADERS = {
    "validate": ["layer", "model", "check", "passed", "detail"],
    "eval": ["layer", "model", "axis", "frequency", "re", "im"],
    "force": ["d", "F", "F_vac", "F_minus_F_vac", "err", "evals", "diagnostic"],
    "lifshitz": ["d2", "E", "F", "err", "diagnostic"],
    "action3": ["d", "E", "E_minus_E_first", "F", "err", "diagnostic"],
    "bounds": ["d", "F", "F_vac", "lower", "upper", "margin", "pass"],
    "kk-check": ["layer", "model", "w", "kk", "closed_form", "abs_dev"],
    "greens": ["z", "zp", "G"],
}
UNITS = {
    "eval": {"frequency": "frequency"},
    "force": {"d": "length", "F": "force", "F_vac": "force", "F_minus_F_vac": "force", "err": "force"},
    "lifshitz": {"d2": "length", "E": "energy", "F": "force", "err": "force"},
    "action3": {"d": "length", "E": "energy", "E_minus_E_first": "energy", "F": "force",
                "err": "force"},
    "bounds": {"d": "length", "F": "force", "F_vac": "force", "lower": "force", "upper": "force",
               "margin": "force"},
    "kk-check": {"w": "frequency"},
    "greens": {"z": "length", "zp": "length"},
}

# Derivative quadrature: energies must be much tighter than the force tolerance.
_DERIVATIVE_REL_TOL = 1e-11


class UsageError(Exception):
    pass


def _si_factors(omega_ref: float) -> dict[str, float]:
    hbar, c = constants.hbar, constants.c
    return {
        "length": c / omega_ref,
        "frequency": omega_ref,
        "force": hbar * omega_ref ** 4 / c ** 3,
        "energy": hbar * omega_ref ** 3 / c ** 2,
    }


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "nan" if math.isnan(value) else format(float(value), ".12g")
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    v = float(value)
    return None if not math.isfinite(v) else v


def emit(command: str, rows: list[dict], fmt: str, out, si: float | None = None) -> None:
    header = HEADERS[command]
    if si is not None:
        factors = _si_factors(si)
        units = UNITS.get(command, {})
        rows = [{k: (v * factors[units[k]] if k in units and isinstance(v, float) else v)
                 for k, v in row.items()} for row in rows]
    if fmt == "json":
        records = [{k: _json_value(row.get(k, "")) for k in header} for row in rows]
        out.write(json.dumps(records) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row.get(k, "")) for k in header])


def _workers() -> int:
    raw = os.environ.get("CASIMIR_STACK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _parallel_map(fn: Callable, items: Sequence) -> list:
    """Map ``fn`` over ``items`` keeping input order."""
    n = min(_workers(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _grid(single, lo, hi, points, log) -> list[float]:
    if single is not None:
        values = [float(v) for v in single]
    elif lo is not None and hi is not None:
        if points < 1:
            raise UsageError("--points must be at least 1")
        if log:
            if lo <= 0:
                raise UsageError("log grids need positive limits")
            values = list(np.logspace(np.log10(lo), np.log10(hi), points))
        else:
            values = list(np.linspace(lo, hi, points))
    else:
        raise UsageError("give either explicit values or a --*-min/--*-max range")
    if any(not (np.isfinite(v) and v > 0) for v in values):
        raise UsageError("separations must be positive")
    return sorted(float(v) for v in values)


def _error_row(exc: Exception) -> tuple[float, str]:
    return float("nan"), f"{type(exc).__name__}: {exc}"


def _row_status(rows: list[dict], key: str = "diagnostic") -> int:
    diags = [r.get(key, "") for r in rows]
    if any(d.startswith("AccuracyError") for d in diags):
        return EXIT_NUMERIC
    if any(d for d in diags):
        return EXIT_PHYSICS
    return EXIT_OK


def _single_slab(cfg: RunConfig) -> Layer:
    if len(cfg.layers) != 1 or not cfg.layers[0].finite:
        raise UsageError("this command needs exactly one finite layer")
    return cfg.layers[0]


# ---------------------------------------------------------------- commands


def cmd_validate(cfg: RunConfig, args) -> tuple[list[dict], int]:
    rows = []
    status = EXIT_OK
    for i, layer in enumerate(cfg.layers):
        layer_ok = True
        for name, model in (("eps", layer.eps), ("mu", layer.mu)):
            rep = validate(model)
            for check, ok, detail in rep.checks:
                rows.append({"layer": i, "model": name, "check": check, "passed": ok, "detail": detail})
            layer_ok &= rep.passed
        cls = classify(layer.eps, layer.mu)
        rows.append({"layer": i, "model": "eps+mu", "check": "classification", "passed": True,
                     "detail": cls.value})
        summary = "all checks pass" if layer_ok else "checks failed"
        print(f"layer {i}: {cls.value}, {summary}", file=sys.stderr)
        if not layer_ok:
            status = EXIT_PHYSICS
    return rows, status


def cmd_eval(cfg: RunConfig, args) -> tuple[list[dict], int]:
    freqs = [float(v) for v in args.frequency]
    rows = []
    for i, layer in enumerate(cfg.layers):
        for name, model in (("eps", layer.eps), ("mu", layer.mu)):
            for f in freqs:
                if args.imag:
                    val = complex(eval_imag_axis(model, f))
                else:
                    val = complex(eval_chi(model, f))
                rows.append({"layer": i, "model": name, "axis": "imag" if args.imag else "real",
                             "frequency": f, "re": val.real, "im": val.imag})
    return rows, EXIT_OK


def _force_point(job) -> dict:
    eps, mu, d, method, quad = job
    fv = force_vacuum(d)
    try:
        if method == "auto":
            try:
                res = force_slab_s(eps, mu, d, quad)
            except MappingError:
                res = force_slab_qw(eps, mu, d, quad)
        else:
            res = {"qw": force_slab_qw, "s": force_slab_s, "w": force_slab_w}[method](eps, mu, d, quad)
        return {"d": d, "F": res.value, "F_vac": fv, "F_minus_F_vac": res.value - fv,
                "err": res.error_estimate, "evals": res.evaluations, "diagnostic": ""}
    except CasimirError as exc:
        nan, diag = _error_row(exc)
        return {"d": d, "F": nan, "F_vac": fv, "F_minus_F_vac": nan, "err": nan, "evals": 0,
                "diagnostic": diag}


def cmd_force(cfg: RunConfig, args) -> tuple[list[dict], int]:
    layer = _single_slab(cfg)
    grid = _grid(args.d, args.d_min, args.d_max, args.points, args.log)
    jobs = [(layer.eps, layer.mu, d, args.method, cfg.quadrature) for d in grid]
    rows = _parallel_map(_force_point, jobs)
    return rows, _row_status(rows)


def _derivative_quad(quad: QuadratureSpec) -> QuadratureSpec:
    return QuadratureSpec(min(quad.rel_tol, _DERIVATIVE_REL_TOL), min(quad.abs_tol, 1e-15),
                          quad.max_depth, quad.truncation)


def _lifshitz_point(job) -> dict:
    left, mid, right, d2, quad = job
    dq = _derivative_quad(quad)
    try:
        e = energy_lifshitz(left, mid.with_thickness(d2), right, quad)
        f = force_from_action(lambda x: energy_lifshitz(left, mid.with_thickness(x), right, dq),
                              d2, which="d2")
        return {"d2": d2, "E": e.value, "F": f.value, "err": f.error_estimate, "diagnostic": ""}
    except CasimirError as exc:
        nan, diag = _error_row(exc)
        return {"d2": d2, "E": nan, "F": nan, "err": nan, "diagnostic": diag}


def cmd_lifshitz(cfg: RunConfig, args) -> tuple[list[dict], int]:
    layers = cfg.layers
    if len(layers) != 3 or layers[0].finite or layers[2].finite or not layers[1].finite:
        raise UsageError("lifshitz needs three layers: inf | finite | inf")
    grid = _grid(args.gap, args.gap_min, args.gap_max, args.points, args.log)
    jobs = [(layers[0], layers[1], layers[2], d, cfg.quadrature) for d in grid]
    rows = _parallel_map(_lifshitz_point, jobs)
    return rows, _row_status(rows)


def _action3_point(job) -> dict:
    stack, j, d, quad = job
    dq = _derivative_quad(quad)
    try:
        e = action_3layer(stack.with_thickness(j, d), quad)
        f = force_from_action(lambda x: action_3layer(stack.with_thickness(j, x), dq), d,
                              which=f"d{j + 1}")
        return {"d": d, "E": e.value, "F": f.value, "err": f.error_estimate, "diagnostic": ""}
    except CasimirError as exc:
        nan, diag = _error_row(exc)
        return {"d": d, "E": nan, "F": nan, "err": nan, "diagnostic": diag}


def cmd_action3(cfg: RunConfig, args) -> tuple[list[dict], int]:
    if len(cfg.layers) != 3 or not all(layer.finite for layer in cfg.layers):
        raise UsageError("action3 needs three finite layers")
    j = args.vary - 1
    stack = Stack(cfg.layers, True)
    grid = _grid(args.d, args.d_min, args.d_max, args.points, args.log)
    rows = _parallel_map(_action3_point, [(stack, j, d, cfg.quadrature) for d in grid])
    first = rows[0]["E"]
    for row in rows:
        row["E_minus_E_first"] = row["E"] - first
    return rows, _row_status(rows)


def cmd_bounds(cfg: RunConfig, args) -> tuple[list[dict], int]:
    layer = _single_slab(cfg)
    grid = _grid(args.d_grid, args.d_min, args.d_max, args.points, True)
    report = bounds_check(layer.eps, layer.mu, grid, cfg.quadrature, method=args.method)
    rows = [{"d": r.d, "F": r.force, "F_vac": r.f_vac, "lower": r.lower, "upper": r.upper,
             "margin": r.margin, "pass": r.passed} for r in report.rows]
    verdict = "all pass" if report.passed else "violations found"
    print(f"{report.medium.value}, n_static={report.n_static:.10g}, {verdict}", file=sys.stderr)
    return rows, EXIT_OK if report.passed else EXIT_PHYSICS


def cmd_kk_check(cfg: RunConfig, args) -> tuple[list[dict], int]:
    if not (0 < args.wmin < args.wmax) or args.points < 1:
        raise UsageError("need 0 < --wmin < --wmax and --points >= 1")
    ws = np.logspace(np.log10(args.wmin), np.log10(args.wmax), args.points)
    rows = []
    worst = 0.0
    for i, layer in enumerate(cfg.layers):
        for name, model in (("eps", layer.eps), ("mu", layer.mu)):
            if model.kind is Kind.VACUUM:
                continue
            for w in ws:
                kk = kk_model(model, float(w), cfg.quadrature)
                ref = float(eval_imag_axis(model, float(w)))
                dev = abs(kk - ref)
                worst = max(worst, dev)
                rows.append({"layer": i, "model": name, "w": float(w), "kk": kk,
                             "closed_form": ref, "abs_dev": dev})
    print(f"max abs deviation {worst:.3e}", file=sys.stderr)
    return rows, EXIT_OK if worst <= args.tol else EXIT_PHYSICS


def cmd_greens(cfg: RunConfig, args) -> tuple[list[dict], int]:
    stack = cfg.stack()
    mode = TransverseMode(args.sigma, args.q, args.w)
    if args.z is not None:
        zs = [float(v) for v in args.z]
    else:
        if args.z_min is None or args.z_max is None:
            raise UsageError("give --z values or --z-min/--z-max")
        zs = list(np.linspace(args.z_min, args.z_max, args.points))
    rows = [{"z": z, "zp": args.zp, "G": g_scalar(stack, mode, z, args.zp)} for z in zs]
    return rows, EXIT_OK


COMMANDS = {
    "validate": cmd_validate, "eval": cmd_eval, "force": cmd_force, "lifshitz": cmd_lifshitz,
    "action3": cmd_action3, "bounds": cmd_bounds, "kk-check": cmd_kk_check, "greens": cmd_greens,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", default="-",
                        help="JSON configuration file ('-' or omitted: stdin)")
    common.add_argument("--format", choices=["csv", "json"], default=None,
                        help="output format (default: the config's output field)")
    common.add_argument("--si", action="store_true",
                        help="convert lengths, frequencies, forces and energies to SI units")

    parser = _Parser(prog="casimir-stack", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="validate and classify every layer model")

    p = sub.add_parser("eval", parents=[common], help="evaluate eps and mu of every layer")
    p.add_argument("--frequency", type=float, nargs="+", required=True)
    p.add_argument("--imag", action="store_true", help="frequencies are imaginary-axis values w")

    def sweep(p, name, dest):
        p.add_argument(f"--{name}", dest=dest, type=float, nargs="+")
        p.add_argument(f"--{name}-min", dest=f"{dest}_min", type=float)
        p.add_argument(f"--{name}-max", dest=f"{dest}_max", type=float)
        p.add_argument("--points", type=int, default=20)
        p.add_argument("--log", action="store_true", help="log-spaced grid")

    p = sub.add_parser("force", parents=[common], help="single-slab force between mirrors")
    sweep(p, "d", "d")
    p.add_argument("--method", choices=["qw", "s", "w", "auto"], default="auto")

    p = sub.add_parser("lifshitz", parents=[common], help="layer between two half spaces")
    sweep(p, "gap", "gap")

    p = sub.add_parser("action3", parents=[common], help="three finite layers between mirrors")
    sweep(p, "d", "d")
    p.add_argument("--vary", type=int, choices=[1, 2, 3], default=2)

    p = sub.add_parser("bounds", parents=[common], help="check the attraction bounds")
    p.add_argument("--d-grid", dest="d_grid", type=float, nargs="+")
    p.add_argument("--d-min", dest="d_min", type=float, default=0.1)
    p.add_argument("--d-max", dest="d_max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--method", choices=["qw", "s", "w"], default="qw")

    p = sub.add_parser("kk-check", parents=[common], help="Kramers-Kronig transform vs closed form")
    p.add_argument("--wmin", type=float, default=0.01)
    p.add_argument("--wmax", type=float, default=100.0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-4)

    p = sub.add_parser("greens", parents=[common], help="tabulate the scalar Green function")
    p.add_argument("--sigma", choices=["TE", "TM"], required=True)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--zp", type=float, required=True)
    p.add_argument("--z", type=float, nargs="+")
    p.add_argument("--z-min", dest="z_min", type=float)
    p.add_argument("--z-max", dest="z_max", type=float)
    p.add_argument("--points", type=int, default=11)
    return parser


def _read_config(path: str, stdin) -> RunConfig:
    if path == "-":
        return load_config(stdin.read())
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return load_config(text)


def main(argv: Sequence[str] | None = None, stdin=None, stdout=None, stderr=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    saved = sys.stderr
    sys.stderr = stderr
    try:
        try:
            args = build_parser().parse_args(argv)
            cfg = _read_config(args.config, stdin)
            if args.si and cfg.reference_frequency is None:
                raise UsageError("--si needs reference_frequency in the configuration")
            rows, status = COMMANDS[args.command](cfg, args)
        except (UsageError, ConfigError) as exc:
            print(f"error: {exc}", file=stderr)
            return EXIT_USAGE
        except AccuracyError as exc:
            print(f"numerical error: {exc}", file=stderr)
            return EXIT_NUMERIC
        except DomainError as exc:
            print(f"error: {exc}", file=stderr)
            return EXIT_USAGE
        except CasimirError as exc:
            print(f"physics error: {type(exc).__name__}: {exc}", file=stderr)
            return EXIT_PHYSICS
        buf = io.StringIO()
        emit(args.command, rows, args.format or cfg.output, buf,
             cfg.reference_frequency if args.si else None)
        stdout.write(buf.getvalue())
        return status
    finally:
        sys.stderr = saved


if __name__ == "__main__":
    sys.exit(main())
