"""Command-line interface: `aliasfft bench ...` and `aliasfft report ...`."""

from __future__ import annotations

import argparse
import sys

from .bench import ALGORITHMS, ExperimentConfig, run_suite


def _parse_snr(token: str) -> float | str:
    if token.lower() == "exact":
        return "exact"
    try:
        return float(token)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"snr must be a dB value or 'exact', got {token!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aliasfft", description="Sparse FFT benchmark harness and report renderer"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    bench = sub.add_parser("bench", help="run the experiment grid and write a CSV")
    bench.add_argument("--algo", nargs="+", required=True, choices=ALGORITHMS,
                       help="algorithms to run")
    bench.add_argument("--n", nargs="+", type=int, required=True, help="signal sizes")
    bench.add_argument("--k", nargs="+", type=int, required=True, help="sparsity levels")
    bench.add_argument("--snr", nargs="+", type=_parse_snr, required=True,
                       help="SNR values in dB, or 'exact'")
    bench.add_argument("--trials", type=int, default=1, help="seeds per cell")
    bench.add_argument("--seed", type=int, default=0, help="base seed")
    bench.add_argument("--out", required=True, help="output CSV path")

    report = sub.add_parser("report", help="render figures from a bench CSV")
    report.add_argument("--csv", required=True, help="bench CSV to read")
    report.add_argument("--outdir", required=True, help="directory for the PNG figures")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench":
        config = ExperimentConfig(
            algos=list(args.algo),
            n_list=list(args.n),
            k_list=list(args.k),
            snr_list=list(args.snr),
            trials=args.trials,
            seed_base=args.seed,
            out_path=args.out,
        )
        try:
            config.validate()
        except ValueError as exc:
            parser.error(str(exc))  # exits with status 2
        rows = run_suite(config)
        print(f"wrote {len(rows)} rows to {config.out_path}")
        return 0
    if args.command == "report":
        from .report import render_report

        written = render_report(args.csv, args.outdir)
        for path in written:
            print(f"wrote {path}")
        if not written:
            print("no plottable rows found", file=sys.stderr)
        return 0
    parser.error(f"unknown command {args.command!r}")
    return 2


if __name__ == "__main__":
    sys.exit(main())
