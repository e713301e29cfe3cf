"""Command-line front end.

Exit status: 0 when every check passes, 1 when any check fails, 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .config import ConfigError, load_config
from .study import (PARTITION_FIELDS, _context, bound_report, partition_table, run_rate_study,
                    write_csv, write_rate_study)
from ..bounds import BOUND_FIELDS
from .suite import run_kernel_demo, run_verification_suite, write_kernel_demo, write_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="study configuration (built-in default if omitted)")
    common.add_argument("--seed", type=int, help="override [study] seed")
    common.add_argument("--out", metavar="DIR", help="override [study] out")
    common.add_argument("--workers", type=int, help="override [study] workers")
    common.add_argument("--gnuplot", action="store_true", help="whitespace-separated .dat files instead of CSV")

    parser = argparse.ArgumentParser(prog="densequiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("rate-study", parents=[common], help="error functionals and bounds over the (n, m) schedule")
    sub.add_parser("verify", parents=[common], help="run the verification suite")
    sub.add_parser("kernel-demo", parents=[common], help="kernel and Y* reconstruction diagnostics")
    p = sub.add_parser("partition", parents=[common], help="dump the partition and hat masses")
    p.add_argument("--m", type=int, required=True)
    b = sub.add_parser("bounds", parents=[common], help="one bound report for the battery")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--m", type=int, required=True)
    return parser


def _config(args):
    config = load_config(args.config)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out"] = args.out
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        changes["workers"] = args.workers
    config = dataclasses.replace(config, **changes)
    try:
        _context(config)
    except ValueError as exc:
        raise ConfigError(f"cannot build measure or battery: {exc}") from None
    return config


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _config(args)
        if args.command in ("partition", "bounds") and args.m < 1 or \
                args.command == "bounds" and (args.n < 1 or args.m < 2):
            raise ConfigError("need n >= 1 and m >= 1 (m >= 2 for bounds)")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out, gp = config.out, args.gnuplot
    ext = ".dat" if gp else ".csv"

    if args.command == "rate-study":
        study = run_rate_study(config)
        paths = write_rate_study(study, out, gp)
        for r in study.slopes:
            if r["axis"] == "m":
                print(f"{r['member']:>16} {r['column']}-slope vs m: {r['slope']:.4f} (R2 {r['r2']:.5f}, {r['status']})")
        _report(paths)
        return EXIT_OK

    if args.command == "verify":
        report = run_verification_suite(config)
        _report([write_suite(report, out, gp)])
        for c in report.checks:
            print(f"{c.status.upper():4} {c.name} value={c.value:.6g} threshold={c.threshold:.6g} "
                  f"({c.runtime:.2f}s){' ' + c.detail if c.detail else ''}")
        print("overall:", "PASS" if report.passed else "FAIL")
        return EXIT_OK if report.passed else EXIT_FAIL

    if args.command == "kernel-demo":
        demo = run_kernel_demo(config)
        _report(write_kernel_demo(demo, out, gp))
        ks = demo.ks
        print(f"KS {ks['ks_statistic']:.5f} (critical {ks['critical_value']:.5f}); "
              f"max |w_j - 1| {ks['max_normalization_defect']:.3g}; "
              f"cell discrepancy {ks['cell_probability_discrepancy']:.3g}")
        print("overall:", "PASS" if demo.passed else "FAIL")
        return EXIT_OK if demo.passed else EXIT_FAIL

    if args.command == "partition":
        measure = config.build_measure()
        path = write_csv(os.path.join(out, f"partition_m{args.m}{ext}"), PARTITION_FIELDS,
                         partition_table(measure, args.m), gp)
        _report([path])
        return EXIT_OK

    report = bound_report(config, args.n, args.m)
    path = write_csv(os.path.join(out, f"bound_n{args.n}_m{args.m}{ext}"), BOUND_FIELDS, [report.row()], gp)
    for k in BOUND_FIELDS:
        print(f"{k:>20} {report.row()[k]}")
    _report([path])
    return EXIT_OK


def _report(paths):
    for p in paths:
        print("wrote", p)


if __name__ == "__main__":
    sys.exit(main())
