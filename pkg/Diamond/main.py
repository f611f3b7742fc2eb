import argparse
import dataclasses
import json
import os
import sys

# Add parent directory to path for imports
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from Diamond.analysis import RateReport, analyze, report_violations, run_verification, sweep, write_csv
from Diamond.channel import ChannelGains
from Diamond.gdof import GdofExponents, gdof_closed_forms, gdof_numeric
from Diamond.settings import (
    AVG_POWER_RESOLUTION,
    AVG_SCHEDULE_RESOLUTION,
    GDOF_MIN_P,
    GDOF_P_GRID,
    SIGNIFICANT_DIGITS,
    SWEEP_DEFAULT_COUNT,
    SWEEP_DEFAULT_SEED,
    SWEEP_DEFAULT_WORKERS,
    SWEEP_GAIN_MAX,
    SWEEP_GAIN_MIN,
    VERIFY_DEFAULT_COUNT,
    VERIFY_DELTA0_COUNT,
)
from Diamond.utilities.errors import ChannelDomainError, DiamondError, StructuralError
from Diamond.utilities.logging_config import get_logger, log_debug, setup_logging

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _fmt(value) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def positive_int(v):
    """argparse type for counts that must be >= 1."""
    try:
        value = int(v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"integer expected, got {v!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"value must be >= 1, got {value}")
    return value


def report_payload(report: RateReport) -> dict:
    """RateReport as plain JSON types; field names mirror the dataclass."""
    payload = dataclasses.asdict(report)
    payload["violations"] = report_violations(report)
    return payload


def print_report(report: RateReport):
    caps = report.caps
    print("\n" + "=" * 60)
    print(f"           DIAMOND CHANNEL REPORT - REGION {report.region.label}")
    print("=" * 60)
    print(f"{'Gains (g01, g02, g13, g23)':<28}: {', '.join(_fmt(g) for g in report.gains.as_tuple())}")
    print(f"{'Region condition':<28}: {report.region.condition}")
    for name in ("Delta", "Gamma", "GammaPrime", "delta"):
        print(f"{name:<28}: {_fmt(getattr(caps, name))}")
    print("-" * 60)
    for scheme in (report.mdf, report.mdf_bc, report.mdf_mac):
        if scheme is None:
            continue
        schedule = ", ".join(_fmt(t) for t in scheme.schedule.as_array())
        print(f"{scheme.scheme.value:<28}: {_fmt(scheme.rate)}  [{scheme.case}]  t = ({schedule})")
    print("-" * 60)
    print(f"{'Recommended scheme':<28}: {report.achievable.scheme.value}")
    print(f"{'Achievable rate':<28}: {_fmt(report.achievable.rate)}")
    print(f"{'Cut-set optimum':<28}: {_fmt(report.lp_optimum)}")
    print(f"{'Upper bound (' + report.upper.bound.value + ')':<28}: {_fmt(report.upper.value)}")
    print(f"{'Gap':<28}: {_fmt(report.measured_gap)}")
    print(f"{'Gap guarantee':<28}: {_fmt(report.gap_guarantee)}")
    print(f"{'Certificate':<28}: {'passed' if report.certificate.passed else 'REJECTED'}")
    print("=" * 60 + "\n")


def cmd_analyze(args) -> int:
    values = (args.g01, args.g02, args.g13, args.g23)
    try:
        gains = ChannelGains.from_db(*values) if args.db else ChannelGains(*values)
    except ChannelDomainError as e:
        logger.error(f"Invalid channel: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        report = analyze(gains)
    except DiamondError as e:
        logger.error(f"Analysis failed for {values}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION

    violations = report_violations(report)
    if args.json:
        print(json.dumps(report_payload(report), indent=2))
    else:
        print_report(report)
        for issue in violations:
            print(f"VIOLATION: {issue}")
    return EXIT_VIOLATION if violations else EXIT_OK


def _writable(path: str) -> bool:
    directory = os.path.dirname(os.path.abspath(path))
    if os.path.isdir(path) or not os.path.isdir(directory):
        return False
    return os.access(directory, os.W_OK)


def cmd_sweep(args) -> int:
    if not _writable(args.out):
        print(f"error: cannot write to {args.out}", file=sys.stderr)
        return EXIT_USAGE
    try:
        result = sweep(args.count, args.seed, args.gain_min, args.gain_max, args.workers)
    except StructuralError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DiamondError as e:
        logger.error(f"Sweep failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION

    try:
        write_csv(result.frame, args.out)
    except OSError as e:
        logger.error(f"Writing {args.out} failed: {e}")
        print(f"error: cannot write to {args.out}: {e}", file=sys.stderr)
        return EXIT_USAGE

    summary = result.summary
    if args.json:
        print(json.dumps(summary.as_dict(), indent=2))
    else:
        print("\n" + "=" * 60)
        print(f"           SWEEP SUMMARY ({summary.evaluated}/{summary.count} channels)")
        print("=" * 60)
        print(f"{'REGION':<8}{'COUNT':>10}{'MAX GAP':>22}")
        print("-" * 40)
        for label in sorted(summary.region_counts):
            print(f"{label:<8}{summary.region_counts[label]:>10}{_fmt(summary.max_gap_by_region[label]):>22}")
        print("-" * 40)
        print(f"{'Max gap':<18}: {_fmt(summary.max_gap)}")
        print(f"{'Violations':<18}: {summary.violations}")
        print(f"{'CSV':<18}: {args.out}")
        print("=" * 60 + "\n")
        for detail in summary.violation_details:
            print(f"VIOLATION: {detail}")
    return EXIT_VIOLATION if summary.violations else EXIT_OK


def cmd_verify(args) -> int:
    try:
        table = run_verification(
            args.count, args.seed, args.gain_min, args.gain_max,
            avg_power=args.avg_power,
            avg_count=args.avg_count,
            schedule_resolution=args.schedule_resolution,
            power_resolution=args.power_resolution,
            delta0_count=args.delta0_count,
        )
    except StructuralError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DiamondError as e:
        logger.error(f"Verification failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION

    violations = int(table["violations"].sum())
    if args.json:
        print(json.dumps({"violations": violations, "checks": table.to_dict(orient="records")}, indent=2))
    else:
        print("\n" + "=" * 84)
        print("                                 VERIFICATION SUMMARY")
        print("=" * 84)
        print(f"{'CHECK':<42}{'EVALUATED':>10}{'VIOLATIONS':>12}{'WORST MARGIN':>20}")
        print("-" * 84)
        for row in table.itertuples():
            status = "" if row.violations == 0 else "  <-- FAIL"
            print(f"{row.check:<42}{row.evaluated:>10}{row.violations:>12}{row.worst_margin:>20.9g}{status}")
        print("=" * 84)
        print(f"{'ALL CHECKS PASSED' if violations == 0 else f'{violations} VIOLATIONS'}\n")
    return EXIT_VIOLATION if violations else EXIT_OK


def _power_grid(pmax: float):
    grid = [p for p in GDOF_P_GRID if p < pmax]
    return grid + [pmax]


def cmd_gdof(args) -> int:
    try:
        alphas = GdofExponents(args.a01, args.a02, args.a13, args.a23)
        if args.pmax < GDOF_MIN_P:
            raise ChannelDomainError(f"--pmax must be >= {GDOF_MIN_P:g}, got {args.pmax:g}")
        closed = gdof_closed_forms(alphas)
        table = gdof_numeric(alphas, _power_grid(args.pmax))
    except (ChannelDomainError, StructuralError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DiamondError as e:
        logger.error(f"GDOF run failed for {(args.a01, args.a02, args.a13, args.a23)}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VIOLATION

    if args.json:
        print(json.dumps({"closed_forms": closed.as_dict(), "numeric": table.to_dict(orient="records")}, indent=2))
        return EXIT_OK

    print("\n" + "=" * 60)
    print(f"           GDOF FOR EXPONENTS {alphas.as_tuple()}")
    print("=" * 60)
    for name, value in closed.values.items():
        print(f"{name:<12}: {_fmt(value)}")
    print("-" * 60)
    print(f"{'Upper (' + closed.upper_key + ')':<24}: {_fmt(closed.upper)}")
    achievable_key = "mdf" if closed.mdf_optimal else closed.achievable_key
    print(f"{'Achievable (' + achievable_key + ')':<24}: {_fmt(closed.achievable)}")
    print(f"{'MDF':<24}: {_fmt(closed.mdf)}")
    print("-" * 60)
    print(table.to_string(index=False, float_format=lambda v: f"{v:.6g}"))
    print("=" * 60 + "\n")
    return EXIT_OK


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(description="Rates, bounds and gap guarantees of the half-duplex diamond relay channel.")
    parser.add_argument("--log-level", type=str, default=None, help="Logging level (default from settings).")
    parser.add_argument("--log-file", type=str, default=None,
                        help="Detailed log file; an empty string disables file logging.")
    commands = parser.add_subparsers(dest="command", required=True)

    analyze_parser = commands.add_parser("analyze", help="Analyze one channel.")
    for name in ("g01", "g02", "g13", "g23"):
        analyze_parser.add_argument(f"--{name}", type=float, required=True, help=f"Power gain {name}.")
    analyze_parser.add_argument("--db", action="store_true", help="Gains are given in dB (g = 10^(dB/10)).")
    analyze_parser.add_argument("--json", action="store_true", help="Print the structured report.")

    def add_range(p):
        p.add_argument("--gain-min", type=float, default=SWEEP_GAIN_MIN, help="Smallest sampled gain.")
        p.add_argument("--gain-max", type=float, default=SWEEP_GAIN_MAX, help="Largest sampled gain.")

    sweep_parser = commands.add_parser("sweep", help="Analyze random channels and write a CSV.")
    sweep_parser.add_argument("--count", type=positive_int, default=SWEEP_DEFAULT_COUNT)
    sweep_parser.add_argument("--seed", type=int, default=SWEEP_DEFAULT_SEED)
    sweep_parser.add_argument("--out", type=str, required=True, help="CSV output path.")
    sweep_parser.add_argument("--workers", type=positive_int, default=SWEEP_DEFAULT_WORKERS)
    sweep_parser.add_argument("--json", action="store_true", help="Print the summary as JSON.")
    add_range(sweep_parser)

    verify_parser = commands.add_parser("verify", help="Run the property suite.")
    verify_parser.add_argument("--count", type=positive_int, default=VERIFY_DEFAULT_COUNT)
    verify_parser.add_argument("--seed", type=int, default=SWEEP_DEFAULT_SEED)
    verify_parser.add_argument("--avg-power", action="store_true", help="Also check the average-power slack.")
    verify_parser.add_argument("--avg-count", type=positive_int, default=None,
                               help="Channels for the average-power check (default: --count).")
    verify_parser.add_argument("--schedule-resolution", type=positive_int, default=AVG_SCHEDULE_RESOLUTION)
    verify_parser.add_argument("--power-resolution", type=positive_int, default=AVG_POWER_RESOLUTION)
    verify_parser.add_argument("--delta0-count", type=int, default=VERIFY_DELTA0_COUNT,
                               help="Constructed Delta = 0 channels.")
    verify_parser.add_argument("--json", action="store_true", help="Print the check table as JSON.")
    add_range(verify_parser)

    gdof_parser = commands.add_parser("gdof", help="Closed-form and numeric GDOF.")
    for name in ("a01", "a02", "a13", "a23"):
        gdof_parser.add_argument(f"--{name}", type=float, required=True, help=f"Exponent {name}.")
    gdof_parser.add_argument("--pmax", type=float, default=GDOF_P_GRID[-1], help="Largest P of the numeric run.")
    gdof_parser.add_argument("--json", action="store_true", help="Print closed forms and the table as JSON.")

    return parser.parse_args(argv)


COMMANDS = {
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "gdof": cmd_gdof,
}


def main(argv=None) -> int:
    try:
        args = parse_arguments(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    setup_logging(level=args.log_level, log_file=args.log_file)
    log_debug(f"Starting {args.command} run.")
    code = COMMANDS[args.command](args)
    log_debug(f"{args.command} run complete.", exit_code=code)
    return code


if __name__ == "__main__":
    sys.exit(main())
