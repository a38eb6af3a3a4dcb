"""courierctl: run scenarios, the attack suite and the throughput benchmark."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from ..netbus import PROFILES
from .attacks import parse_suite, run_attack_campaign
from .bench import DEFAULT_COUNTS, bench_throughput
from .config import ConfigInvalid, ScenarioConfig
from .report import orders_csv, run_scenario, validate_report


def _config(args: argparse.Namespace) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "adversary", None):
        cfg = cfg.replace(adversary=args.adversary)
    return cfg


def _counts(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigInvalid(f"bad order counts {text!r}") from None


def _emit(report: dict[str, Any], out: Optional[str]) -> None:
    validate_report(report)
    text = json.dumps(report, indent=2, sort_keys=False)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _summary(report: dict[str, Any]) -> str:
    kind = report["kind"]
    if kind == "scenario":
        s = report["summary"]
        return f"scenario: {s['accepted']}/{s['orders']} orders accepted; passed={report['passed']}"
    if kind == "attack":
        return f"attack: {report['rejected']}/{report['total']} attacks rejected; passed={report['passed']}"
    return f"bench: median ratio {report['median_ratio']:.3f} (bound {report['flatness_bound']}); passed={report['passed']}"


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="courierctl", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--config", help="JSON file with ScenarioConfig fields")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")

    run = sub.add_parser("run", help="end-to-end seeded scenario")
    common(run)
    run.add_argument("--adversary", help="policy name, e.g. passive, drop, modify:ORD_M1")
    run.add_argument("--csv", help="also write per-order phase rows as CSV")

    attack = sub.add_parser("attack", help="named attack suite")
    common(attack)
    attack.add_argument("--suite", default="all", help="all, or comma-separated attack names")
    attack.add_argument("--runs", type=int, default=1, help="number of consecutive seeds")

    bench = sub.add_parser("bench", help="latency against number of parallel orders")
    common(bench)
    bench.add_argument("--orders", default=",".join(map(str, DEFAULT_COUNTS)))
    bench.add_argument("--profile", choices=sorted(PROFILES), default=None)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        if args.command == "run":
            report = run_scenario(cfg)
            if args.csv:
                Path(args.csv).write_text(orders_csv(report))
        elif args.command == "attack":
            report = run_attack_campaign(cfg, parse_suite(args.suite), args.runs)
        else:
            report = bench_throughput(cfg, _counts(args.orders), args.profile)
    except ConfigInvalid as exc:
        print(f"courierctl: invalid configuration: {exc}", file=sys.stderr)
        return 2
    _emit(report, args.out)
    print(_summary(report), file=sys.stderr)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
