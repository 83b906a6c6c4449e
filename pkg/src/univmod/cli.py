"""Command line entry point: ``univmod <subcommand> ...``.

Exit status: 0 on success, 2 on invalid input, 3 when a run breaks an
invariant it checks (an error-free session below its rate floor).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bounds
from .core import SymbolSeq
from .harness import (
    ExperimentPlan,
    PlanEntry,
    atomic_write,
    render_csv,
    render_json,
    run_plan,
    sweep_csv,
    sweep_rates,
)
from .noise import FixedFile, TestChannel, noise_generate, parse_noise, read_modz, write_modz
from .refsys import BlockCode, collapsed_entropy, iterated_mapping_eval
from .scheme import SchemeConfig
from .srccode import LZ78State, kt_code_length

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INVARIANT = 3


class InvariantViolation(RuntimeError):
    pass


def _emit(text: str, out: str | None) -> None:
    if out and out != "-":
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _load_noise(text: str, n: int | None, q: int, seed: int) -> SymbolSeq:
    spec = parse_noise(text, q)
    if n is None:
        if not isinstance(spec, FixedFile):
            raise ValueError("--n is required for generated noise")
        return read_modz(spec.path)
    return noise_generate(spec, n, seed)


def _n_grid(text: str) -> list[int]:
    """``start:stop:points`` (geometric) or a comma list of lengths."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"n grid must be start:stop:points, got {text!r}")
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
        if not 1 <= start <= stop or points < 1:
            raise ValueError(f"bad n grid {text!r}")
        grid = np.geomspace(start, stop, points) if points > 1 else np.array([start])
        return sorted({int(round(v)) for v in grid})
    return [int(float(v)) for v in text.split(",") if v.strip()]


def cmd_simulate(args) -> int:
    config = SchemeConfig(n=args.n, q=args.q, K=args.K, epsilon=args.eps, seed=args.seed,
                          metric=args.metric, kt_k_max=args.kt_k_max)
    plan = ExperimentPlan((PlanEntry(config, args.noise, args.trials),), None, args.format)
    record = run_plan(plan, jobs=args.jobs)
    text = render_csv(record.rows, plan.hash) if args.format == "csv" else render_json(record, plan.to_dict())
    _emit(text, args.out)
    if record.floor_violations:
        raise InvariantViolation(f"{record.floor_violations} error-free session(s) fell below the rate floor")
    return EXIT_OK


def cmd_compress(args) -> int:
    z = _load_noise(args.noise, args.n, args.q, args.seed)
    coder = LZ78State(z.q).feed_many(z.data.tolist())
    L_S, L_T = coder.lengths()
    result = {
        "n": len(z),
        "L_S": L_S,
        "L_T": L_T,
        "rho78": L_T / (len(z) * math.log2(z.q)),
        "kt_bits": kt_code_length(z),
    }
    _emit(json.dumps(result, indent=2) + "\n", args.out)
    return EXIT_OK


BOUNDS_FIELDS = ("n", "delta_minus", "delta_plus", "n_star_lower", "n_star_upper")


def cmd_bounds(args) -> int:
    lower, upper, _ = bounds.n_star_bounds(args.k, args.delta, args.q)
    rows = []
    for n in _n_grid(args.n_grid):
        dm = bounds.delta_minus(n, args.k, args.q)
        dp = bounds.delta_plus(n, args.k, args.q) if args.q ** args.k <= n else ""
        rows.append((n, dm, dp, lower, upper))
    if args.format == "json":
        _emit(json.dumps([dict(zip(BOUNDS_FIELDS, r)) for r in rows], indent=2) + "\n", args.out)
        return EXIT_OK
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(BOUNDS_FIELDS)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in r])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_ifb_eval(args) -> int:
    text = args.code
    if not text.lstrip().startswith("{"):
        with open(text) as fh:
            text = fh.read()
    code = BlockCode.from_json(json.loads(text))
    if args.k is not None and args.k != code.k:
        raise ValueError(f"--k {args.k} differs from the code's k={code.k}")
    z = _load_noise(args.noise, args.n, code.q, args.seed)
    b = args.b if args.b is not None else len(z) // code.k
    err = iterated_mapping_eval(code, z, b, trials=args.trials, seed=args.seed, exhaustive=args.exhaustive)
    H = collapsed_entropy(z, code.k, b)
    result = {
        "k": code.k,
        "b": b,
        "M": code.M,
        "rate": code.rate,
        "avg_error": err,
        "effective_rate": bounds.effective_rate(code.rate, err, code.k),
        "collapsed_entropy": H,
        "fano_bound": bounds.fano_rate_bound(code.k, err, H, code.q) if err < 1 else None,
    }
    _emit(json.dumps(result, indent=2) + "\n", args.out)
    return EXIT_OK


def cmd_testchannel(args) -> int:
    if not args.out or args.out == "-":
        raise ValueError("testchannel needs --out <path> for the MODZ file")
    n = args.k * args.blocks
    z = noise_generate(TestChannel(args.k, args.d, args.q), n, args.seed)
    write_modz(args.out, z)
    summary = {"path": args.out, "n": n, "q": args.q, "k": args.k, "d": args.d, "seed": args.seed}
    sys.stdout.write(json.dumps(summary) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    table = sweep_rates(args.q, args.noise, _n_grid(args.n_grid), args.K, args.eps,
                        trials=args.trials, seed=args.seed, jobs=args.jobs)
    text = sweep_csv(table) if args.format == "csv" else json.dumps(table, indent=2) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="common-randomness seed")
    parser.add_argument("--jobs", type=int, default=default(1), help="parallel worker processes")
    parser.add_argument("--out", default=default(None), help="output path ('-' or omitted: stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default=default("csv"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="univmod", description=__doc__.splitlines()[0])
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="run feedback sessions")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--metric", choices=("lz78", "kt"), default="lz78")
    p.add_argument("--kt-k-max", type=int, default=None)
    p.add_argument("--noise", default="zero")
    p.add_argument("--trials", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compress", parents=[common], help="LZ78 and KT code lengths of a noise sequence")
    p.add_argument("--noise", required=True, help="MODZ path or spec string")
    p.add_argument("--n", type=int, default=None, help="length, for generated noise")
    p.add_argument("--q", type=int, default=2)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("bounds", parents=[common], help="redundancy bounds over an n grid")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.01)
    p.add_argument("--n-grid", required=True, help="start:stop:points or a comma list")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("ifb-eval", parents=[common], help="iterated-mapping error of a block code")
    p.add_argument("--code", required=True, help="JSON file or inline JSON")
    p.add_argument("--noise", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--exhaustive", action="store_true")
    p.set_defaults(func=cmd_ifb_eval)

    p = sub.add_parser("testchannel", parents=[common], help="write a test-channel noise file")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--blocks", type=int, required=True)
    p.set_defaults(func=cmd_testchannel)

    p = sub.add_parser("sweep", parents=[common], help="median rates across horizons")
    p.add_argument("--q", type=int, default=2)
    p.add_argument("--noise", required=True)
    p.add_argument("--n-grid", required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=3)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except InvariantViolation as exc:
        print(f"univmod: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"univmod: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
