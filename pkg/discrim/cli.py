"""
The `discrim` command line.

Data goes to stdout and diagnostics to stderr. Exit codes: 0 when every check
passes, 1 when a check or certificate fails, 2 on a usage error.

"""

from typing import Callable, List, Optional
import argparse
import json
import logging
import math
import os
import sys

import pandas as pd

from . import __version__
from .backends import BACKENDS, get_backend
from .casekit import (
    ClassificationError,
    ExhaustionError,
    classify,
    collide,
    factorize,
)
from .expsum import (
    BudgetExceededError,
    CheckReport,
    IdentityMismatchError,
    check_bounds,
    identity_report,
    kloosterman_checks,
    make_ctx,
    threshold_check,
)
from .verify import CheckpointError, check_theorem, range_scan

log = logging.getLogger("discrim.cli")

FORMATS = ["human", "json", "csv"]
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_format() -> str:
    fmt = os.environ.get("DISCRIM_FORMAT", "human")
    return fmt if fmt in FORMATS else "human"


def _to_csv(records: List[dict]) -> str:
    df = pd.DataFrame(records)
    for column in df.columns:
        if df[column].dtype == bool:
            df[column] = df[column].map({True: "true", False: "false"})
    return df.to_csv(index=False)


def _emit(fmt: str, records: List[dict], human: List[str], document=None):
    """
    Print one result in the chosen format.

    Arguments:
        fmt (str): One of FORMATS
        records (list): Flat rows, used for csv (and json when no document)
        human (list): Lines for the human format
        document: The single JSON document to print, if not the records

    """
    if fmt == "json":
        if document is None:
            document = records[0] if len(records) == 1 else records
        print(json.dumps(document))
    elif fmt == "csv":
        sys.stdout.write(_to_csv(records))
    else:
        print("\n".join(human))


def _bool(value: bool) -> str:
    return "true" if value else "false"


def _emit_checks(fmt: str, title: str, report: CheckReport) -> int:
    records = report.to_dict()
    human = [title] + [
        f"  {'PASS' if entry.passed else 'FAIL'} {entry.name}: "
        f"{entry.measured:.6g} <= {entry.bound:.6g}"
        for entry in report.entries
    ]
    document = {"checks": records, "pass": report.passed}
    _emit(fmt, records, human, document)
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_dvalue(args: argparse.Namespace) -> int:
    backend = get_backend(args.backend) if args.backend else None
    row = check_theorem(args.n, backend)
    _emit(
        args.format,
        [row.to_dict()],
        [f"D({row.n})={row.D} k={row.k} match={_bool(row.match)}"],
    )
    return EXIT_OK if row.match else EXIT_FAIL


def cmd_scan(args: argparse.Namespace) -> int:
    report = range_scan(
        args.lo,
        args.hi,
        workers=args.workers,
        checkpoint_path=args.checkpoint,
        backend_name=args.backend,
        chunk_size=args.chunk_size,
    )
    if args.format == "json":
        print(report.to_json(include_timing=False))
    elif args.format == "csv":
        sys.stdout.write(report.to_csv())
    else:
        print(
            f"scanned n in [{report.n_lo}, {report.n_hi}]: "
            f"{len(report.rows)} rows, {len(report.failures)} failures"
        )
        for n in report.failures:
            print(f"  failure at n={n}")
    log.info("Scan took %.2fs on %d worker(s)", report.wall_time, report.worker_count)
    return EXIT_FAIL if report.failures else EXIT_OK


def cmd_collide(args: argparse.Namespace) -> int:
    cert = collide(args.n, args.m)
    record = cert.to_dict()
    _emit(
        args.format,
        [record],
        [" ".join(f"{key}={value}" for key, value in record.items())],
    )
    return EXIT_OK


def cmd_classify(args: argparse.Namespace) -> int:
    tag = classify(factorize(args.m))
    record = {"m": args.m, **tag.to_dict()}
    _emit(args.format, [record], [f"m={args.m} case={tag}"])
    return EXIT_OK


def cmd_expsum_identity(args: argparse.Namespace) -> int:
    ctx = make_ctx(args.delta, args.p, args.r)
    title = f"identities for delta={ctx.delta} p={ctx.p} r={ctx.r} X={ctx.X} rho={ctx.rho}"
    return _emit_checks(args.format, title, identity_report(ctx))


def cmd_expsum_bounds(args: argparse.Namespace) -> int:
    if args.p % 3 == 1:
        # No counting context exists for p = 1 (mod 3); only K(p^j; u) applies.
        report = kloosterman_checks(args.p, args.j)
    else:
        r = args.r if args.r is not None else math.ceil(args.j / 2)
        report = check_bounds(make_ctx(args.delta, args.p, r), args.j)
    return _emit_checks(args.format, f"bounds for p={args.p} j={args.j}", report)


def cmd_thresholds(args: argparse.Namespace) -> int:
    report = threshold_check(args.p, args.r)
    record = report.to_dict()
    human = [
        f"p={report.p} r={report.r}",
        f"  check1={_bool(report.check1)}",
        f"  check2={'n/a' if report.check2 is None else _bool(report.check2)}",
        f"  check3={_bool(report.check3)}",
        f"  q={report.q:.6g} f(q)={report.f_q:.6g}",
    ]
    _emit(args.format, [record], human)
    return EXIT_OK if report.relevant_check else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--format",
        choices=FORMATS,
        default=None,
        help="Output format (default: $DISCRIM_FORMAT or human)",
    )
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="Log more to stderr"
    )

    parser = argparse.ArgumentParser(
        prog="discrim",
        description="Verify D(n) = 3^k(n) for the discriminator of a^3 + a.",
    )
    parser.add_argument("--version", action="version", version=f"discrim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dvalue", parents=[common], help="Compute D(N)")
    p.add_argument("n", type=int)
    p.add_argument("--backend", choices=list(BACKENDS), default=None)
    p.set_defaults(func=cmd_dvalue)

    p = sub.add_parser("scan", parents=[common], help="Check D(n) = 3^k over a range")
    p.add_argument("lo", type=int)
    p.add_argument("hi", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--chunk-size", type=int, default=None)
    p.add_argument("--backend", choices=list(BACKENDS), default=None)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("collide", parents=[common], help="Certify a collision mod M^2")
    p.add_argument("n", type=int)
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_collide)

    p = sub.add_parser("classify", parents=[common], help="Classify a modulus")
    p.add_argument("m", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("expsum", help="Exponential sum checks")
    expsum_sub = p.add_subparsers(dest="expsum_command", required=True)

    q = expsum_sub.add_parser("identity", parents=[common], help="Identity suite")
    q.add_argument("--delta", type=int, required=True)
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--r", type=int, required=True)
    q.set_defaults(func=cmd_expsum_identity)

    q = expsum_sub.add_parser("bounds", parents=[common], help="Bound reports")
    q.add_argument("--p", type=int, required=True)
    q.add_argument("--j", type=int, required=True)
    q.add_argument("--delta", type=int, default=1)
    q.add_argument("--r", type=int, default=None)
    q.set_defaults(func=cmd_expsum_bounds)

    p = sub.add_parser("thresholds", parents=[common], help="Size thresholds")
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.set_defaults(func=cmd_thresholds)

    return parser


# Errors that mean the request itself was invalid (RangeError and DomainError
# are ValueErrors).
_USAGE_ERRORS = (ValueError, CheckpointError, BudgetExceededError, KeyError)
# Errors that mean a check ran and failed.
_FAILURE_ERRORS = (ExhaustionError, ClassificationError, IdentityMismatchError)


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run the command line and return its exit code.

    Arguments:
        argv (list: None): Arguments without the program name; sys.argv[1:]
            when omitted

    Returns:
        int: 0, 1 or 2

    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    args.format = args.format or _default_format()
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    handler: Callable[[argparse.Namespace], int] = args.func
    try:
        return handler(args)
    except _FAILURE_ERRORS as e:
        print(f"fail: {e}", file=sys.stderr)
        return EXIT_FAIL
    except _USAGE_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(run())
