"""Command-line front end.

Every subcommand writes CSV (or JSON) to ``--out`` or stdout.  CSV output
starts with one ``# {json}`` metadata line followed by a header row; reals
are printed with 17 significant digits.  Exit status: 0 success, 2 bad
configuration, 3 a validation subcommand exceeded its tolerance.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import __version__
from .deviation import TV_EXPONENT_THRESHOLD, deviation_report
from .distribution import Grid, helly_subsequence
from .eigensolve import PIVOT_FLOOR, all_eigenvalues, default_tolerance, max_threads
from .ensembles import Ensemble, builtin, registry_ids
from .errors import ConfigurationError, JacobiTraceError, RegistryError
from .jacobi import assemble, write_bands_csv
from .measures import (
    CurvePushforward,
    LimitMeasure,
    ProductAtom,
    WeightedAtoms,
    arcsine_density,
    marchenko_pastur_density,
    nevai_ullman_density,
    semicircle_density,
    uniform_square,
)
from .moments import MAX_ORDER, moment_deviation_ladder
from .quadrature import DEFAULT_ORDER, DEFAULT_PANELS
from .sequences import CoefficientSequence, load_config
from .traceformula import convergence_ladder, spectral_interval, suite_lookup, test_function_suite
from ._expr import compile_expr

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3

CONSTANTS = {
    "pivot_floor": PIVOT_FLOOR,
    "quadrature_panels": DEFAULT_PANELS,
    "quadrature_order": DEFAULT_ORDER,
    "max_moment_order": MAX_ORDER,
}


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------


def parse_ks(text: str) -> list[int]:
    """Comma list of sizes; ``a,b,...,z`` extends the first two terms.

    The extension is geometric when b/a is an integer > 1 and z is reached
    exactly by that ratio, arithmetic otherwise.  The result must be
    strictly increasing.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if "..." in parts:
        pos = parts.index("...")
        if pos != len(parts) - 2 or pos < 2:
            raise ConfigurationError(f"malformed ladder {text!r}: use 'a,b,...,z'", field="ks")
        head = [_int(p) for p in parts[:pos]]
        end = _int(parts[-1])
        a, b = head[-2], head[-1]
        values = list(head)
        if a > 0 and b % a == 0 and b // a > 1 and _reaches(b, b // a, end):
            while values[-1] < end:
                values.append(values[-1] * (b // a))
        else:
            step = b - a
            if step <= 0 or (end - b) % step:
                raise ConfigurationError(f"ladder {text!r} does not reach {end}", field="ks")
            values.extend(range(b + step, end + 1, step))
    else:
        values = [_int(p) for p in parts]
    if not values:
        raise ConfigurationError("empty ladder", field="ks")
    if values[0] < 1 or any(k2 <= k1 for k1, k2 in zip(values, values[1:])):
        raise ConfigurationError(f"ladder must be positive and strictly increasing: {values}", field="ks")
    return values


def _reaches(start: int, ratio: int, end: int) -> bool:
    v = start
    while v < end:
        v *= ratio
    return v == end


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"not an integer: {text!r}", field="ks") from None


def _param_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


@dataclass
class ExperimentConfig:
    """Resolved inputs shared by the subcommands."""

    source: str
    sequence: CoefficientSequence
    ensemble: Ensemble | None
    seed: int | None
    abs_tol: float | None
    out: str | None
    fmt: str
    extra: dict = field(default_factory=dict)


def _ensemble_params(args) -> dict[str, Any]:
    params: dict[str, Any] = {}
    for name in ("a", "b", "alpha", "delta"):
        value = getattr(args, name, None)
        if value is not None:
            params[name] = value
    for item in getattr(args, "param", None) or []:
        if "=" not in item:
            raise ConfigurationError(f"--param expects KEY=VALUE, got {item!r}", field="param")
        key, value = item.split("=", 1)
        params[key.strip()] = _param_value(value)
    return params


def resolve(args) -> ExperimentConfig:
    """Turn ``--ensemble`` / ``--seq`` / ``--config`` into a sequence."""
    abs_tol = getattr(args, "abs_tol", None)
    if abs_tol is not None and not abs_tol > 0:
        raise ConfigurationError("--abs-tol must be positive", field="abs_tol")
    seed = getattr(args, "seed", None)
    source = args.ensemble or args.seq or args.config
    if source is None:
        raise ConfigurationError("one of --ensemble, --seq or --config is required", field="ensemble")
    ensemble = None
    if args.ensemble or (source in registry_ids() and not Path(source).exists()):
        params = _ensemble_params(args)
        if seed is not None:
            params["seed"] = seed
        try:
            ensemble = builtin(source, **params)
        except RegistryError as exc:
            raise ConfigurationError(str(exc), field="ensemble") from None
        seq = ensemble.sequence
    else:
        seq = load_config(source)
        if seed is not None:
            seq = seq.with_seed(seed)
    return ExperimentConfig(source, seq, ensemble, seed, abs_tol, args.out, getattr(args, "format", "csv"))


def load_measure(source: str, cfg: ExperimentConfig) -> LimitMeasure:
    """``ensemble`` or a JSON file ``{"type": atom|atoms|curve|uniform_square, ...}``."""
    if source == "ensemble":
        if cfg.ensemble is None or cfg.ensemble.mu is None:
            raise ConfigurationError("--mu ensemble needs an ensemble with a limit measure", field="mu")
        return cfg.ensemble.mu
    try:
        data = json.loads(Path(source).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"measure file not found: {source}", field="mu") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON in {source}: {exc}", field="mu") from None
    kind = data.get("type")
    try:
        if kind == "atom":
            return ProductAtom(float(data["a"]), float(data["b"]))
        if kind == "atoms":
            return WeightedAtoms([tuple(map(float, row)) for row in data["atoms"]])
        if kind == "curve":
            fa = compile_expr(data["a"], ("s",))
            fb = compile_expr(data["b"], ("s",))
            return CurvePushforward(lambda s: fa(s=s), lambda s: fb(s=s))
        if kind == "uniform_square":
            return uniform_square()
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"malformed measure {source}: {exc}", field="mu") from None
    raise ConfigurationError(f"unknown measure type {kind!r}", field="mu.type")


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def _meta(command: str, cfg: ExperimentConfig | None, **extra) -> dict:
    meta = {
        "command": command,
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "constants": CONSTANTS,
        "threads": max_threads(),
    }
    if cfg is not None:
        meta["source"] = cfg.source
        meta["sequence_id"] = cfg.sequence.id
        meta["seed"] = cfg.sequence.seed
        meta["abs_tol"] = cfg.abs_tol
    meta.update(extra)
    return meta


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def emit_table(columns: Sequence[str], rows, meta: dict, out: str | None, fmt: str = "csv") -> None:
    if fmt == "json":
        body = {
            "meta": meta,
            "columns": list(columns),
            "rows": [[_json_value(v) for v in row] for row in rows],
        }
        _emit(json.dumps(body, indent=2) + "\n", out)
        return
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    _emit(buf.getvalue(), out)


def _json_value(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = resolve(args)
    a, b = cfg.sequence.generate(args.k)
    meta = _meta("gen", cfg, k=args.k)
    if cfg.fmt == "json":
        rows = [[i + 1, a[i], b[i] if i < args.k - 1 else None] for i in range(args.k)]
        emit_table(["index", "diag", "offdiag"], rows, meta, cfg.out, "json")
    else:
        _emit("# " + json.dumps(meta, sort_keys=True) + "\n" + write_bands_csv(a, b), cfg.out)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    cfg = resolve(args)
    J = assemble(*cfg.sequence.generate(args.k))
    spectrum = all_eigenvalues(J, cfg.abs_tol)
    meta = _meta("spectrum", cfg, k=args.k, residual_bound=spectrum.residual_bound)
    rows = [[args.k, j + 1, lam] for j, lam in enumerate(spectrum.eigenvalues)]
    emit_table(["k", "index", "lambda"], rows, meta, cfg.out, cfg.fmt)
    return EXIT_OK


def cmd_moments(args) -> int:
    cfg = resolve(args)
    ks = parse_ks(args.ks)
    orders = [int(n) for n in args.n.split(",")]
    rows = []
    worst = 0.0
    for n in orders:
        for r in moment_deviation_ladder(cfg.sequence, n, ks, cfg.abs_tol):
            rows.append([r.n, r.k, r.exact_trace, r.approx_trace, r.deviation_per_k])
            if r.k == ks[-1]:
                worst = max(worst, r.deviation_per_k)
    meta = _meta("moments", cfg, ks=ks, orders=orders, max_deviation=args.max_deviation)
    emit_table(["n", "k", "exact", "approx", "deviation_per_k"], rows, meta, cfg.out, cfg.fmt)
    if args.max_deviation is not None and worst > args.max_deviation:
        print(f"deviation_per_k {worst:.3g} at k={ks[-1]} exceeds {args.max_deviation:g}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_deviation(args) -> int:
    cfg = resolve(args)
    ks = parse_ks(args.ks)
    idx = 0 if args.component == "a" else 1
    rows = []
    for k in ks:
        r = deviation_report(cfg.sequence.generate(k)[idx])
        rows.append([k, r.total_variation, r.tv_per_k, r.max_abs, r.monotone_fraction, r.discrepancy])
    meta = _meta("deviation", cfg, ks=ks, component=args.component, heuristic_tv_exponent_threshold=TV_EXPONENT_THRESHOLD)
    columns = ["k", "tv", "tv_per_k", "max_abs", "monotone_fraction", "discrepancy"]
    emit_table(columns, rows, meta, cfg.out, cfg.fmt)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = resolve(args)
    ks = parse_ks(args.ks)
    mu = load_measure(args.mu, cfg)
    interval = spectral_interval(mu)
    try:
        phis = suite_lookup(args.phis.split(","), interval) if args.phis else test_function_suite(interval)
    except KeyError as exc:
        raise ConfigurationError(str(exc.args[0]), field="phis") from None
    reports = convergence_ladder(cfg.sequence, mu, phis, ks, cfg.abs_tol)
    solver_tol = {
        str(k): cfg.abs_tol or default_tolerance(assemble(*cfg.sequence.generate(k))) for k in ks
    }
    meta = _meta(
        "compare", cfg, ks=ks, phis=[p.id for p in phis], interval=list(interval),
        solver_tolerances=solver_tol, max_err=args.max_err,
    )
    rows = [[r.phi_id, r.k, r.empirical, r.limit, r.abs_err] for r in reports]
    emit_table(["phi_id", "k", "empirical", "limit", "abs_err"], rows, meta, cfg.out, cfg.fmt)
    if args.max_err is not None:
        final = [r.abs_err for r in reports if r.k == ks[-1]]
        if max(final) > args.max_err:
            print(f"abs_err {max(final):.3g} at k={ks[-1]} exceeds {args.max_err:g}", file=sys.stderr)
            return EXIT_TOLERANCE
    return EXIT_OK


def _density_curve(args, cfg: ExperimentConfig | None):
    if args.kind:
        p = _ensemble_params(args)
        try:
            if args.kind == "arcsine":
                return arcsine_density(p.get("a", 0.0), p.get("b", 0.5))
            if args.kind == "semicircle":
                return semicircle_density(p.get("radius", 1.0))
            if args.kind == "marchenko-pastur":
                return marchenko_pastur_density()
            return nevai_ullman_density(p.get("alpha", 0.5), p.get("a", 0.0), p.get("b", 0.5))
        except TypeError as exc:
            raise ConfigurationError(str(exc), field="param") from None
    if cfg is None or cfg.ensemble is None or cfg.ensemble.expected_density is None:
        raise ConfigurationError("density needs --kind or an ensemble with a closed-form density", field="kind")
    return cfg.ensemble.expected_density


def cmd_density(args) -> int:
    cfg = resolve(args) if (args.ensemble or args.seq or args.config) else None
    curve = _density_curve(args, cfg)
    if args.points < 2:
        raise ConfigurationError("--points must be at least 2", field="points")
    lo, hi = curve.support
    x = np.linspace(lo, hi, args.points)
    y = curve(x)
    meta = _meta("density", cfg, density=curve.name, support=list(curve.support), mass=curve.mass())
    emit_table(["x", "density"], zip(x, y), meta, args.out, getattr(args, "format", "csv"))
    return EXIT_OK


def helly_report(selection, ks: list[int], meta: dict) -> dict:
    limit = selection.limit
    grid_payload = None
    if limit is not None:
        g = limit.grid
        xs = np.linspace(g.x_lo, g.x_hi, g.m)
        ys = np.linspace(g.y_lo, g.y_hi, g.m)
        grid_payload = {
            "k": limit.k,
            "x": xs.tolist(),
            "y": ys.tolist(),
            "values": limit.values.tolist(),
        }
    return {
        "meta": meta,
        "ks": ks,
        "tol": selection.tol,
        "success": selection.success,
        "selected_ks": selection.selected_ks,
        "sup_norm_trace": selection.sup_norm_trace,
        "best_sup_norm": selection.best_sup_norm,
        "limit_cdf_grid": grid_payload,
    }


def cmd_helly(args) -> int:
    cfg = resolve(args)
    ks = parse_ks(args.ks)
    if not args.tol > 0:
        raise ConfigurationError("--tol must be positive", field="tol")
    if args.box:
        try:
            x0, x1, y0, y1 = (float(v) for v in args.box.split(","))
        except ValueError:
            raise ConfigurationError("--box expects x0,x1,y0,y1", field="box") from None
        grid = Grid(x0, x1, y0, y1, args.grid)
    else:
        grid = Grid.unit(args.grid)
    selection = helly_subsequence(cfg.sequence, ks, args.tol, grid)
    meta = _meta("helly", cfg, grid={"m": grid.m, "box": [grid.x_lo, grid.x_hi, grid.y_lo, grid.y_hi]})
    _emit(json.dumps(helly_report(selection, ks, meta), indent=2) + "\n", cfg.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _source_args(p: argparse.ArgumentParser, required_k: bool = False) -> None:
    src = p.add_argument_group("coefficient source")
    src.add_argument("--ensemble", help=f"builtin ensemble ({', '.join(registry_ids())})")
    src.add_argument("--seq", help="sequence JSON config path (or builtin id)")
    src.add_argument("--config", help="sequence JSON config path")
    src.add_argument("--seed", type=int, help="seed for random sequences")
    src.add_argument("--a", type=float)
    src.add_argument("--b", type=float)
    src.add_argument("--alpha", type=float)
    src.add_argument("--delta", type=float)
    src.add_argument("--param", action="append", metavar="KEY=VALUE", help="extra ensemble parameter")
    p.add_argument("--abs-tol", type=float, dest="abs_tol", help="eigenvalue bracket width")
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    if required_k:
        p.add_argument("--k", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jacobitrace", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="dump the coefficient bands of one size")
    _source_args(p, required_k=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("spectrum", help="eigenvalues of one size")
    _source_args(p, required_k=True)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("moments", help="exact versus approximate power traces")
    _source_args(p)
    p.add_argument("--ks", required=True)
    p.add_argument("--n", default="2,3,4,5,6", help="comma list of orders")
    p.add_argument("--max-deviation", type=float, dest="max_deviation")
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("deviation", help="variation and magnitude diagnostics")
    _source_args(p)
    p.add_argument("--ks", required=True)
    p.add_argument("--component", choices=("a", "b"), default="a")
    p.set_defaults(func=cmd_deviation)

    p = sub.add_parser("compare", help="trace averages versus the limit functional")
    _source_args(p)
    p.add_argument("--ks", required=True)
    p.add_argument("--mu", default="ensemble", help="'ensemble' or a measure JSON path")
    p.add_argument("--phis", help="comma list of test function ids (default: full suite)")
    p.add_argument("--max-err", type=float, dest="max_err")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("density", help="closed-form limit density on a grid")
    _source_args(p)
    p.add_argument("--kind", choices=("arcsine", "semicircle", "marchenko-pastur", "nevai-ullman"))
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("helly", help="sub-ladder with stabilizing joint CDFs")
    _source_args(p)
    p.add_argument("--ks", required=True)
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--box", help="x0,x1,y0,y1 (default unit square)")
    p.set_defaults(func=cmd_helly)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        where = f" [{exc.field}]" if exc.field else ""
        print(f"configuration error{where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except JacobiTraceError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
