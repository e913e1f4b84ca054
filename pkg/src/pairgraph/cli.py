"""Command-line interface: ``pairgraph run|matchings|perm|haf|rates|scenarios list``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import _backend
from .matrix import hafnian, permanent_ryser
from .rates import rate_table
from .scenarios import SCENARIOS, FORMATS, SpecError, UnknownScenario, emit, load_specs, parse_spec, run_spec
from .scenarios.runner import fmt_complex, fmt_float


def _add_source(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", metavar="NAME", help="bundled scenario (see `scenarios list`)")
    src.add_argument("--spec", metavar="FILE", type=Path, help="experiment file")


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="table")
    p.add_argument("--order", type=int, metavar="K", help="Fock expansion order")
    p.add_argument("--loss", type=float, metavar="ETA", help="per-photon survival probability")
    p.add_argument("--phase-sweep", metavar="START:END:STEPS", help="sweep the phase parameter")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker processes for sweep points")
    p.add_argument("--seed", type=int, metavar="S", help="recorded in the report conventions")


def _add_matrix_flags(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("matrix", nargs="?", type=Path, help="text file of complex entries (1+2j) or .npy")
    src.add_argument("--random", type=int, metavar="N", help="random complex N x N matrix")
    p.add_argument("--seed", type=int, default=0, metavar="S")
    p.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")
    p.add_argument("--format", choices=FORMATS, default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pairgraph", description="Photon-pair networks as weighted graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario or experiment file")
    _add_source(p)
    _add_run_flags(p)

    p = sub.add_parser("matchings", help="list perfect matchings and the post-selected state")
    _add_source(p)
    _add_run_flags(p)

    p = sub.add_parser("perm", help="permanent of a matrix (Ryser)")
    _add_matrix_flags(p)

    p = sub.add_parser("haf", help="hafnian of a symmetric matrix")
    _add_matrix_flags(p)

    p = sub.add_parser("rates", help="n-fold rate estimates for three sampling schemes")
    p.add_argument("--m", type=int, help="number of sources / modes")
    p.add_argument("--n", type=int, help="number of photon pairs")
    p.add_argument("--p", type=float, default=0.01, help="pair probability per source")
    p.add_argument("--format", choices=FORMATS, default="table")

    p = sub.add_parser("scenarios", help="bundled scenarios")
    p.add_argument("action", choices=("list",))
    return parser


def _specs(args):
    if args.scenario:
        return args.scenario, load_specs(args.scenario)
    spec = parse_spec(args.spec.read_text(encoding="utf-8"), args.spec.stem)
    return spec.name, [spec]


def cmd_run(args, matchings_only: bool = False) -> str:
    name, specs = _specs(args)
    report = None
    for spec in specs:
        if matchings_only:
            spec = replace(spec, outputs=("state", "matchings"))
        part = run_spec(
            spec,
            order=args.order,
            loss=args.loss,
            sweep=args.phase_sweep,
            jobs=args.jobs,
            seed=args.seed,
            scenario=name,
        )
        if report is None:
            report = part
        else:
            report.results.extend(part.results)
    return emit(report, args.format)


def _load_matrix(args) -> np.ndarray:
    if args.random is not None:
        rng = np.random.default_rng(args.seed)
        m = rng.normal(size=(args.random, args.random)) + 1j * rng.normal(size=(args.random, args.random))
        return (m + m.T) / 2 if args.command == "haf" else m
    if args.matrix.suffix == ".npy":
        return np.load(args.matrix)
    return np.atleast_2d(np.loadtxt(args.matrix, dtype=complex))


def cmd_matrix(args) -> str:
    a = _load_matrix(args)
    backend = None if args.backend == "auto" else args.backend
    fn = hafnian if args.command == "haf" else permanent_ryser
    value = fn(a, backend=backend)
    used = backend or _backend.BACKEND
    re, im = fmt_complex(value)
    if args.format == "json-lines":
        return json.dumps({"function": args.command, "n": a.shape[0], "backend": used, "re": re, "im": im}) + "\n"
    if args.format == "csv":
        return f"function,n,backend,re,im\n{args.command},{a.shape[0]},{used},{re!r},{im!r}\n"
    return f"{args.command}({a.shape[0]}x{a.shape[1]}) = {re!r} {im:+}i   [backend {used}]\n"


def cmd_rates(args) -> str:
    if (args.m is None) != (args.n is None):
        raise ValueError("--m and --n go together")
    rows = [(args.m, args.n, args.p)] if args.m is not None else [(13, 3, 0.01), (12, 5, 0.01)]
    table = rate_table(rows)
    keys = ["m", "n", "p", "R_BS", "R_SS", "R_PI", "ratio"]
    if args.format == "json-lines":
        return "".join(json.dumps({k: fmt_float(r[k]) if isinstance(r[k], float) else r[k] for k in keys}) + "\n" for r in table)
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in table:
            w.writerow([repr(fmt_float(r[k])) if isinstance(r[k], float) else r[k] for k in keys])
        return buf.getvalue()
    out = [f"{'m':>4} {'n':>3} {'p':>8} {'R_BS':>11} {'R_SS':>11} {'R_PI':>11} {'PI/SS':>11}"]
    for r in table:
        out.append(
            f"{r['m']:>4} {r['n']:>3} {r['p']:>8g} {r['R_BS']:>11.4e} {r['R_SS']:>11.4e} {r['R_PI']:>11.4e} {r['ratio']:>11.4g}"
        )
    return "\n".join(out) + "\n"


def cmd_scenarios(args) -> str:
    width = max(len(n) for n in SCENARIOS)
    return "".join(f"{s.name:<{width}}  {s.description}  [{', '.join(s.files)}]\n" for s in SCENARIOS.values())


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            text = cmd_run(args)
        elif args.command == "matchings":
            text = cmd_run(args, matchings_only=True)
        elif args.command in ("perm", "haf"):
            text = cmd_matrix(args)
        elif args.command == "rates":
            text = cmd_rates(args)
        else:
            text = cmd_scenarios(args)
    except SpecError as exc:
        for d in exc.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 2
    except (UnknownScenario, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, UnknownScenario) else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return 2
    sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
