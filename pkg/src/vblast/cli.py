"""Command line front end.

Subcommands
-----------
``equiv``  run all detectors against the brute-force oracle and record
           agreement per trial; nonzero exit if any gated assertion fails.
``flops``  per-algorithm operation counts vs. the dominant-complexity
           models, plus a ratios file with the headline speedups.
``mem``    peak working-set words per algorithm; asserts the single-buffer
           algorithm stays within 0.55x of ``mem_saving`` at M = N >= 16.
``ber``    Monte-Carlo bit error rates per algorithm.

``VBLAST_WORKERS`` bounds the trial worker pool; it changes speed only,
never output bytes.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .detectors import ALGORITHMS, DETECTOR_NAMES
from .errors import ContractViolationError
from .harness import (
    BER_HEADER,
    EQUIV_HEADER,
    FLOPS_HEADER,
    MEM_HEADER,
    RATIOS_HEADER,
    SweepConfig,
    run_ber,
    run_equiv,
    run_flops,
    run_mem,
    write_csv,
)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok]


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _algo_list(text: str) -> list[str]:
    names = [tok for tok in text.split(",") if tok]
    if names == ["all"]:
        return list(DETECTOR_NAMES)
    for name in names:
        if name not in ALGORITHMS:
            raise argparse.ArgumentTypeError(
                f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)} or 'all'"
            )
    return names


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--algo", type=_algo_list, default=list(DETECTOR_NAMES),
                     help="comma-separated algorithm names, or 'all' (default: all)")
    sub.add_argument("--m", type=_int_list, default=[4],
                     help="comma-separated transmit antenna counts (default: 4)")
    sub.add_argument("--n", type=_int_list, default=None,
                     help="receive antenna counts; default N=M")
    sub.add_argument("--snr-db", type=_float_list, default=[20.0],
                     help="comma-separated SNR points in dB (default: 20)")
    sub.add_argument("--trials", type=int, default=100,
                     help="Monte-Carlo trials per grid point (default: 100)")
    sub.add_argument("--seed", type=int, default=1, help="RNG seed (default: 1)")
    sub.add_argument("--cancel-soft", action="store_true",
                     help="cancel with the soft estimate instead of the sliced symbol")
    sub.add_argument("--out", type=Path, required=True, help="output CSV path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vblast",
                                     description="Instrumented recursive V-BLAST detector harness")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("equiv", "cross-check all detectors against the brute-force oracle"),
        ("flops", "operation counts and speedup ratios"),
        ("mem", "peak working-set comparison"),
        ("ber", "bit error rate simulation"),
    ]:
        _add_common(subs.add_parser(name, help=help_text))
    return parser


def _config(args) -> SweepConfig:
    return SweepConfig(
        algorithms=args.algo,
        m_list=args.m,
        n_list=args.n,
        snr_db_list=args.snr_db,
        trials=args.trials,
        seed=args.seed,
        cancel_soft=args.cancel_soft,
        out_path=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
    except ContractViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    failures: list[str] = []
    if args.command == "equiv":
        rows, failures = run_equiv(cfg)
        write_csv(cfg.out_path, EQUIV_HEADER, rows)
    elif args.command == "flops":
        rows, ratio_rows = run_flops(cfg)
        write_csv(cfg.out_path, FLOPS_HEADER, rows)
        ratios_path = Path(cfg.out_path).with_suffix(".ratios.csv")
        write_csv(ratios_path, RATIOS_HEADER, ratio_rows)
        print(f"wrote {cfg.out_path} and {ratios_path}")
    elif args.command == "mem":
        rows, failures = run_mem(cfg)
        write_csv(cfg.out_path, MEM_HEADER, rows)
    elif args.command == "ber":
        rows = run_ber(cfg)
        write_csv(cfg.out_path, BER_HEADER, rows)

    if failures:
        print(f"FAIL: {failures[0]}", file=sys.stderr)
        if len(failures) > 1:
            print(f"({len(failures) - 1} further failures)", file=sys.stderr)
        return 1
    print(f"ok: wrote {cfg.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
