"""``vlte`` command line entry point.

Exit status: 0 on success, 1 on scenario or input errors, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from ..attacks import run_plmn_fingerprint
from ..codec import CodecError, decode, encode
from ..codec.textfmt import dumps, loads
from ..tcu import TcuPolicy
from .compliance import compliance_map, render_compliance
from .render import render_tables
from .runner import run
from .scenario import ScenarioError, load_scenario


class CliError(Exception):
    pass


def _simulate_one(scenario_path: str, seed: Optional[int], trace_out: Optional[str],
                  report_out: Optional[str]) -> str:
    result = run(load_scenario(scenario_path), seed)
    if trace_out:
        result.write_trace(trace_out)
    if report_out:
        result.write_report(report_out)
    return f"{result.scenario.name}: {len(result.reports)} report(s), trace sha256 {result.trace.digest()}"


def cmd_simulate(args) -> int:
    paths = args.scenario
    if len(paths) == 1:
        print(_simulate_one(paths[0], args.seed, args.trace, args.report))
        return 0
    # batch mode: --trace/--report name output directories, one file pair per scenario
    jobs = []
    for p in paths:
        stem = Path(p).stem
        trace = str(Path(args.trace) / f"{stem}.trace.jsonl") if args.trace else None
        report = str(Path(args.report) / f"{stem}.json") if args.report else None
        jobs.append((p, args.seed, trace, report))
    for d in (args.trace, args.report):
        if d:
            Path(d).mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            lines = list(pool.map(_simulate_one, *zip(*jobs)))
    else:
        lines = [_simulate_one(*j) for j in jobs]
    print("\n".join(lines))
    return 0


def _read_list(path: str) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path!r}: {exc.strerror}") from None
    text = text.strip()
    if text.startswith("["):
        return [str(x) for x in json.loads(text)]
    return [tok for line in text.splitlines() for tok in line.replace(",", " ").split() if not tok.startswith("#")]


def cmd_fingerprint(args) -> int:
    plmns = _read_list(args.plmns)
    markets = _read_list(args.markets)
    policy = TcuPolicy.named(args.policy)
    for result in run_plmn_fingerprint(plmns, markets, args.seed, policy=policy):
        print(result.log_line)
    return 0


def cmd_codec(args) -> int:
    if args.op == "encode":
        try:
            text = Path(args.value).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot read {args.value!r}: {exc.strerror}") from None
        print(encode(loads(text)).hex())
    else:
        try:
            data = bytes.fromhex(args.value)
        except ValueError:
            raise CliError("decode expects a hex string") from None
        print(dumps(decode(data)), end="")
    return 0


def _load_reports(directory: str) -> list[dict]:
    d = Path(directory)
    if not d.is_dir():
        raise CliError(f"{directory!r} is not a directory")
    reports = []
    for path in sorted(d.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise CliError(f"{path}: invalid JSON at line {exc.lineno}") from None
        if isinstance(doc, dict) and "reports" in doc:
            reports.extend(doc["reports"])
    return reports


def cmd_tables(args) -> int:
    print(render_tables(_load_reports(args.source)), end="")
    return 0


def cmd_compliance(args) -> int:
    findings = compliance_map(_load_reports(args.source))
    if args.json:
        print(json.dumps([f.to_dict() for f in findings], indent=2))
    else:
        print(render_compliance(findings), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vlte", description="Vehicle LTE telematics attack simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one or more scenario files")
    p.add_argument("--scenario", required=True, nargs="+", help="scenario file(s)")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=None, help="override the scenario seed")
    p.add_argument("--trace", help="trace output file (directory when several scenarios are given)")
    p.add_argument("--report", help="report output file (directory when several scenarios are given)")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers for several scenarios")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fingerprint", help="classify PLMNs by connectivity outcome")
    p.add_argument("--plmns", required=True, help="file listing candidate PLMNs")
    p.add_argument("--markets", required=True, help="file listing roaming-market PLMNs")
    p.add_argument("--policy", choices=("observed", "mitigated"), default="observed")
    p.add_argument("--seed", type=lambda s: int(s, 0), default=0)
    p.set_defaults(func=cmd_fingerprint)

    p = sub.add_parser("codec", help="encode or decode one message")
    p.add_argument("op", choices=("encode", "decode"))
    p.add_argument("value", help="message file (encode) or hex string (decode)")
    p.set_defaults(func=cmd_codec)

    p = sub.add_parser("tables", help="render the result tables from report files")
    p.add_argument("--from", dest="source", required=True, help="directory of report files")
    p.set_defaults(func=cmd_tables)

    p = sub.add_parser("compliance", help="map report files onto regulation rows")
    p.add_argument("--from", dest="source", required=True, help="directory of report files")
    p.add_argument("--json", action="store_true", help="emit JSON instead of text")
    p.set_defaults(func=cmd_compliance)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ScenarioError, CodecError, CliError, OSError, ValueError, KeyError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
