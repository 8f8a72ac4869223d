"""Command-line front end.

Subcommands:
    run          execute a scenario file, write its outputs, print the summary
    validate     check a scenario file and report every problem at once
    diff         offline pre/post comparison of two capture logs
    occupancy    offline per-channel packet counts of a radio capture
    replay-plan  offline: turn a capture into an injection schedule file

Exit status: 0 success, 1 I/O failure, 2 validation or domain error.
"""

from __future__ import annotations

import argparse
import sys

from .attack import MessageMatch, Mutation, TIMING_FAST, TIMING_PRESERVE, channel_occupancy, diff_captures, plan_replay
from .capture import CaptureLog
from .errors import ScenarioValidationError, StaveError
from .runner import OCCUPANCY_SCHEMA, json_text, run_scenario
from .scenario import load_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stave",
        description="Simulated agricultural-vehicle CAN testbed and attack toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write its outputs")
    p_run.add_argument("scenario", help="scenario JSON file")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed (flag wins over file)")
    p_run.add_argument("--out", default=".", metavar="DIR",
                       help="directory for declared outputs (default: current directory)")

    p_val = sub.add_parser("validate", help="validate a scenario file")
    p_val.add_argument("scenario", help="scenario JSON file")

    p_diff = sub.add_parser("diff", help="compare two capture logs")
    p_diff.add_argument("pre", help="baseline capture log")
    p_diff.add_argument("post", help="active capture log")
    p_diff.add_argument("--report", required=True, metavar="OUT.json",
                        help="where to write the diff report")

    p_occ = sub.add_parser("occupancy", help="per-channel packet counts of a radio log")
    p_occ.add_argument("capture", help="radio capture log")
    p_occ.add_argument("--report", default=None, metavar="OUT.json",
                       help="also write the report to a file")

    p_plan = sub.add_parser("replay-plan", help="build an injection schedule from a capture")
    p_plan.add_argument("capture", help="capture log to replay from")
    group = p_plan.add_mutually_exclusive_group(required=True)
    group.add_argument("--match-pgn", default=None, metavar="HEX",
                       help="select frames by parameter group number")
    group.add_argument("--match-id", default=None, metavar="HEX",
                       help="select frames by exact 29-bit identifier")
    p_plan.add_argument("--mutate", default=None, metavar="SPEC",
                        help='mutation such as "byte0=reflect(250)"')
    p_plan.add_argument("--timing", choices=(TIMING_PRESERVE, TIMING_FAST),
                        default=TIMING_PRESERVE)
    p_plan.add_argument("--out", default=None, metavar="OUT.json",
                        help="write the schedule here instead of stdout")
    return parser


def _write_or_print(doc: dict, path: str | None) -> None:
    text = json_text(doc)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        scenario = scenario.with_seed(args.seed)
    result = run_scenario(scenario, out_dir=args.out)
    sys.stdout.write(json_text(result.summary))
    for label, path in sorted(result.written.items()):
        print(f"wrote {label}: {path}", file=sys.stderr)
    return 0


def _cmd_validate(args) -> int:
    load_scenario(args.scenario)
    print(f"{args.scenario}: ok")
    return 0


def _cmd_diff(args) -> int:
    pre = CaptureLog.load(args.pre)
    post = CaptureLog.load(args.post)
    report = diff_captures(pre, post).to_json_dict()
    _write_or_print(report, args.report)
    print(f"wrote report: {args.report}", file=sys.stderr)
    return 0


def _cmd_occupancy(args) -> int:
    log = CaptureLog.load(args.capture)
    counts = channel_occupancy(log)
    doc = {
        "schema": OCCUPANCY_SCHEMA,
        "capture": args.capture,
        "channels": [{"channel": c, "count": n} for c, n in counts],
        "total_packets": sum(n for _, n in counts),
    }
    _write_or_print(doc, args.report)
    return 0


def _cmd_replay_plan(args) -> int:
    log = CaptureLog.load(args.capture)
    if args.match_pgn is not None:
        match = MessageMatch(pgn=int(args.match_pgn, 0))
    else:
        match = MessageMatch(can_id=int(args.match_id, 0))
    mutation = Mutation.parse(args.mutate) if args.mutate is not None else None
    schedule = plan_replay(log, match, mutation, args.timing)
    _write_or_print(schedule.to_json_dict(), args.out)
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "validate": _cmd_validate,
    "diff": _cmd_diff,
    "occupancy": _cmd_occupancy,
    "replay-plan": _cmd_replay_plan,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ScenarioValidationError as exc:
        for error in exc.errors:
            print(f"error: {error}", file=sys.stderr)
        return 2
    except StaveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad numeric literals in flags such as --match-pgn
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
