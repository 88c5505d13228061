"""Command-line front end.

Subcommands
-----------
point         metrics of both modes at one G, as JSON (or one CSV row)
sweep         CSV/JSON table over a G grid and one or more squeezings
probe-sim     finite-shot probe estimate of a Wigner origin value
oracle-check  closed form against the Fock-space oracle on a G grid

Exit codes: 0 ok, 1 usage error, 2 domain error (overdamped coupling,
unconverged truncation, oracle too large), 3 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .dynamics import ExperimentConfig
from .exceptions import DegenerateError, OracleBudgetError, OverdampedError, TruncationError
from .metrics import mode_metrics
from .phase_space import cat_params, wigner

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

CSV_COLUMNS = ["G", "r"] + [
    f"{name}_{mode}" for mode in ("S", "E") for name in ("R", "D", "O", "N", "RD", "P", "S", "F")
]
_CONFIG_KEYS = {
    "xi0": float, "r": float, "kappa": float, "gamma_s": float, "gamma_e": float,
    "n_s": float, "n_e": float, "sign": str, "g": float, "g_max": float, "steps": int,
    "shots": int, "seed": int, "format": str, "workers": int, "nmax": int, "tol": float,
    "dt": float, "trunc_tol": float, "r_grid": str, "mode": str,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _row(G: float, r: float, s, e) -> list[float]:
    out = [G, r]
    for rec in (s, e):
        out += [rec.R, rec.D, rec.O, rec.N, rec.RD, rec.purity, rec.renyi, rec.fidelity]
    return out


def read_config_file(path: str) -> dict:
    """Flat ``key = value`` file; ``#`` starts a comment, dashes and underscores are equivalent."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in _CONFIG_KEYS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                values[key] = _CONFIG_KEYS[key](value)
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def _add_physics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value file; explicit flags override it")
    p.add_argument("--xi0", type=float, default=2.0, help="cat amplitude xi(0)")
    p.add_argument("--r", type=float, default=2.0, help="environment squeezing")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--gamma-s", dest="gamma_s", type=float, default=0.0)
    p.add_argument("--gamma-e", dest="gamma_e", type=float, default=0.0)
    p.add_argument("--n-s", dest="n_s", type=float, default=0.0)
    p.add_argument("--n-e", dest="n_e", type=float, default=0.0)
    p.add_argument("--sign", choices=("plus", "minus"), default="plus")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--out", help="output file (default stdout)")


def _add_grid(p: argparse.ArgumentParser, g_max: float, steps: int) -> None:
    p.add_argument("--g-max", dest="g_max", type=float, default=g_max)
    p.add_argument("--steps", type=int, default=steps, help="number of G points from 0 to g-max")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cavitycat", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("point", help="metrics at one G")
    _add_physics(p)
    p.add_argument("--g", type=float, default=0.0)

    p = sub.add_parser("sweep", help="metrics over a G grid")
    _add_physics(p)
    _add_grid(p, math.pi, 41)
    p.add_argument("--r-grid", dest="r_grid", help="comma-separated squeezings (default: --r); write --r-grid=-1,0,1 when the first is negative")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("probe-sim", help="finite-shot probe of W(0)")
    _add_physics(p)
    p.add_argument("--g", type=float, default=0.0)
    p.add_argument("--mode", choices=("S", "E"), default="S")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("oracle-check", help="closed form vs Fock oracle")
    _add_physics(p)
    _add_grid(p, math.pi / 2, 5)
    p.add_argument("--tol", type=float, default=1e-6, help="max allowed |closed - oracle|")
    p.add_argument("--nmax", type=int, default=None, help="total-photon cutoff (default: automatic)")
    p.add_argument("--trunc-tol", dest="trunc_tol", type=float, default=1e-10,
                   help="allowed discarded population of the initial state")
    p.add_argument("--dt", type=float, default=0.05, help="RK4 step for damped runs")
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = read_config_file(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]  # noqa: SLF001
    known = {a.dest for a in sub._actions}  # noqa: SLF001
    sub.set_defaults(**{k: v for k, v in values.items() if k in known})
    return parser.parse_args(argv)


def _config(args) -> ExperimentConfig:
    try:
        return ExperimentConfig(
            xi0=args.xi0, r=args.r, kappa=args.kappa, gamma_s=args.gamma_s,
            gamma_e=args.gamma_e, n_s=args.n_s, n_e=args.n_e, sign=args.sign,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _grid(args) -> list[float]:
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    if args.g_max < 0:
        raise UsageError("--g-max must be >= 0")
    if args.steps == 1:
        return [0.0]
    return [float(g) for g in np.linspace(0.0, args.g_max, args.steps)]


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def _csv_text(rows: list[list[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return buf.getvalue()


def cmd_point(args) -> int:
    config = _config(args)
    s, e = mode_metrics(config, args.g)
    if args.format == "csv":
        _emit(_csv_text([_row(args.g, config.r, s, e)]), args.out)
    else:
        _emit(json.dumps({"S": s.as_dict(), "E": e.as_dict()}, indent=2) + "\n", args.out)
    return EXIT_OK


def _sweep_row(task):
    config, G = task
    s, e = mode_metrics(config, G)
    return _row(G, config.r, s, e)


def cmd_sweep(args) -> int:
    config = _config(args)
    grid = _grid(args)
    if args.r_grid:
        try:
            r_values = [float(v) for v in args.r_grid.split(",") if v.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --r-grid: {args.r_grid!r}") from exc
    else:
        r_values = [config.r]
    if not r_values or any(b <= a for a, b in zip(r_values, r_values[1:])):
        raise UsageError("--r-grid must be non-empty and strictly increasing")
    tasks = [(config.replace(r=r), G) for r in r_values for G in grid]
    for cfg, _ in tasks[:: len(grid)]:
        mode_metrics(cfg, 0.0)  # surface domain errors before forking
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * args.workers))))
    else:
        rows = [_sweep_row(t) for t in tasks]
    if args.format == "json":
        data = [dict(zip(CSV_COLUMNS, row)) for row in rows]
        _emit(json.dumps(data, indent=1) + "\n", args.out)
    else:
        _emit(_csv_text(rows), args.out)
    return EXIT_OK


def cmd_probe_sim(args) -> int:
    from .probe import probe_wigner_origin

    config = _config(args)
    if args.shots < 1:
        raise UsageError("--shots must be >= 1")
    params = cat_params(config, args.g, args.mode)
    true_w = float(wigner(params, 0.0, 0.0))
    est = probe_wigner_origin(true_w, args.shots, args.seed)
    out = est.as_dict()
    out.update(G=args.g, mode=args.mode, wigner_normalized=true_w, estimate_normalized=est.normalized)
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


_CHECK_FIELDS = ("R", "O", "D", "N", "purity", "fidelity")


def cmd_oracle_check(args) -> int:
    from .oracle import OracleConfig, oracle_mode_metrics

    config = _config(args)
    grid = _grid(args)
    oracle = OracleConfig(nmax=args.nmax, tol=args.trunc_tol, dt=args.dt)
    reference = [mode_metrics(config, G) for G in grid]
    got = oracle_mode_metrics(config, grid, oracle)
    worst = {f"{name}_{mode}": 0.0 for mode in ("S", "E") for name in _CHECK_FIELDS}
    for (cs, ce), (os_, oe) in zip(reference, got):
        for mode, c, o in (("S", cs, os_), ("E", ce, oe)):
            for name in _CHECK_FIELDS:
                key = f"{name}_{mode}"
                worst[key] = max(worst[key], abs(getattr(c, name) - getattr(o, name)))
    ok = all(v <= args.tol for v in worst.values())
    if args.format == "json":
        report = {"pass": ok, "tol": args.tol, "G": grid, "max_abs_dev": worst}
        _emit(json.dumps(report, indent=2) + "\n", args.out)
    else:
        lines = [f"{'metric':<12} {'max |dev|':>12}  status"]
        for key, val in worst.items():
            lines.append(f"{key:<12} {val:12.3e}  {'ok' if val <= args.tol else 'FAIL'}")
        lines.append(f"overall: {'PASS' if ok else 'FAIL'} (tol {args.tol:g}, {len(grid)} G points)")
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "point": cmd_point,
    "sweep": cmd_sweep,
    "probe-sim": cmd_probe_sim,
    "oracle-check": cmd_oracle_check,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config_file(parser, argv)
        return COMMANDS[args.command](args)
    except (UsageError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OverdampedError, TruncationError, OracleBudgetError, DegenerateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
