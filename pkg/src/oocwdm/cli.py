"""Command-line entry point.

Exit codes: 0 success, 1 config or input error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import U64_MAX, ConfigError, load_config
from .ooc import generate_family, max_cardinality, read_family, validate_family, write_family
from .sweep import format_prob, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oocwdm", description="BER models for DWDM/OOC optical access links.")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen-codes", help="Generate an (F, W, 1, 1) optical orthogonal code family.")
    g.add_argument("--length", type=int, required=True, help="code length F")
    g.add_argument("--weight", type=int, required=True, help="code weight W")
    g.add_argument("--out", type=Path, required=True)

    for name, helptext in (
        ("ber", "Evaluate a config and write the result CSV."),
        ("sweep", "Evaluate a config grid and write CSV plus plot data."),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", type=Path, required=True)
        s.add_argument("--out-dir", type=Path, required=True)
        s.add_argument("--seed", type=_seed, default=None, help="override the config's master seed")

    v = sub.add_parser("validate", help="Check a code-family file exhaustively.")
    v.add_argument("--codes", type=Path, required=True)
    return p


def _gen_codes(args) -> int:
    if args.length < 2 or args.weight < 2:
        print("error: need --length >= 2 and --weight >= 2", file=sys.stderr)
        return EXIT_CONFIG
    fam = generate_family(args.length, args.weight)
    write_family(fam, args.out)
    print(
        f"wrote {len(fam)} codewords (bound {max_cardinality(args.length, args.weight)}) "
        f"for F={args.length}, W={args.weight} to {args.out}"
    )
    return EXIT_OK


def _validate(args) -> int:
    try:
        fam = read_family(args.codes)
    except (OSError, ValueError, UnicodeDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = validate_family(fam)
    for v in report.violations:
        print(f"{v.kind}: codeword {v.i} pair {v.j} shift {v.shift} value {v.value}")
    status = "pass" if report.passed else "fail"
    print(f"{status}: {len(fam)} codewords, F={fam.length}, W={fam.weight}, ha={fam.ha}, hc={fam.hc}")
    return EXIT_OK if report.passed else EXIT_CONFIG


def _run(args, plots: bool) -> int:
    try:
        spec = load_config(args.config)
    except ConfigError as exc:
        print(f"config error in {args.config}:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    rows = run_sweep(spec, args.out_dir, plots=plots and spec.plotdata)
    if not plots:
        for r in rows:
            tail = r.error or format_prob(r.pe, r.log10_pe)
            print(f"{r.receiver} F={r.F} W={r.W} N={r.N} S={r.S} S2={r.S2 or '-'} plan={r.plan} {r.method}: {tail}")
    failed = sum(1 for r in rows if r.error)
    print(f"{len(rows)} rows ({failed} with errors) -> {args.out_dir / spec.csv_name}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are input errors here
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.cmd == "gen-codes":
            return _gen_codes(args)
        if args.cmd == "validate":
            return _validate(args)
        return _run(args, plots=args.cmd == "sweep")
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
