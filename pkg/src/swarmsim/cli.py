"""Command-line front end.

Exit codes: 0 success, 1 simulation failure, 2 usage error (argparse),
3 invalid scenario file.  Set SIM_LOG=DEBUG (or any logging level name)
for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

from .runner import run_batch, run_single, write_report
from .scenario import Scenario, ScenarioError, load_scenario

log = logging.getLogger("swarmsim")


def _parse_seeds(text: str) -> list[int]:
    if ".." in text:
        lo_s, hi_s = text.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    return [int(part) for part in text.split(",") if part]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Discrete-event simulator for clustered UAV swarms "
        "with trust-based intrusion detection.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and report metrics")
    run_p.add_argument("--scenario", required=True, help="path to a scenario JSON file")
    seed_group = run_p.add_mutually_exclusive_group()
    seed_group.add_argument("--seed", type=int, help="single seed (overrides the file)")
    seed_group.add_argument(
        "--seeds",
        type=_parse_seeds,
        help="seed sweep: 'A..B' inclusive or a comma list; aggregates results",
    )
    run_p.add_argument("--duration", type=float, help="override duration in seconds")
    run_p.add_argument("--trust", choices=["on", "off"], help="override the trust layer switch")
    run_p.add_argument(
        "--crypto", choices=["modeled", "real"], help="override the crypto backend"
    )
    run_p.add_argument("--trace", action="store_true", help="keep the event trace (json only)")
    run_p.add_argument("--out", type=Path, help="directory for report files")
    run_p.add_argument("--format", choices=["json", "csv"], default="json")
    run_p.add_argument("--quiet", action="store_true", help="suppress the stdout summary")

    val_p = sub.add_parser("validate", help="check a scenario file and print its digest")
    val_p.add_argument("--scenario", required=True)
    return parser


def _load(path: str, args: argparse.Namespace) -> Scenario:
    scenario = load_scenario(path)
    if getattr(args, "duration", None) is not None:
        if args.duration <= 0:
            raise ScenarioError(["duration override must be positive"])
        scenario = dataclasses.replace(scenario, duration_s=args.duration)
    return scenario


def _summary_lines(report: dict) -> list[str]:
    lines = [
        f"scenario     {report['scenario']} (seed {report['seed']}, "
        f"trust {'on' if report['trust_enabled'] else 'off'}, {report['crypto_backend']} crypto)",
        f"packets      {report['packets']['delivered']}/{report['packets']['generated']} "
        f"delivered (pdr {report['pdr']:.4f})",
    ]
    delay = report["delay"]
    if delay["mean_ms"] is not None:
        lines.append(
            f"delay        mean {delay['mean_ms']:.2f} ms, "
            f"p95 {delay['p95_ms']:.2f} ms over {delay['count']} packets"
        )
    lines.append(f"overhead     {report['overhead']['fraction']:.4f} of transmitted bytes")
    det = report["detection"]
    if det["detection_rate"] is not None:
        lines.append(
            f"detection    {det['detection_rate']:.2f} at t={det['horizon_s']:.0f}s, "
            f"fpr {det['false_positive_rate']:.4f}"
        )
    lines.append(
        f"energy       {report['energy']['consumed_total_j']:.3f} J consumed, "
        f"{report['lifetime']['alive_at_end']} nodes alive"
    )
    return lines


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        scenario = _load(args.scenario, args)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    trust = None if args.trust is None else args.trust == "on"
    if args.seeds:
        report = run_batch(scenario, args.seeds, trust_enabled=trust, crypto_backend=args.crypto)
        if not args.quiet:
            agg = report["aggregate"]
            print(f"scenario     {report['scenario']} ({len(args.seeds)} seeds)")
            print(f"pdr          mean {agg['pdr_mean']:.4f}")
            if agg["mean_delay_ms"] is not None:
                print(f"delay        mean {agg['mean_delay_ms']:.2f} ms")
            print(f"overhead     mean {agg['overhead_mean']:.4f}")
            if agg["detection_rate_mean"] is not None:
                print(
                    f"detection    mean {agg['detection_rate_mean']:.2f}, "
                    f"fpr mean {agg['false_positive_rate_mean']:.4f}"
                )
    else:
        report = run_single(
            scenario,
            seed=args.seed,
            trust_enabled=trust,
            crypto_backend=args.crypto,
            keep_trace=args.trace,
        )
        if not args.quiet:
            for line in _summary_lines(report):
                print(line)
    if args.out is not None:
        fmt = args.format
        if args.trace and fmt != "json":
            log.warning("event traces are only serialized with --format json")
        for path in write_report(report, args.out, fmt):
            print(f"wrote {path}")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"{args.scenario}: ok")
    print(f"name          {scenario.name}")
    print(f"nodes         {scenario.node_count}")
    print(f"duration      {scenario.duration_s} s")
    print(f"trust         {'on' if scenario.trust_enabled else 'off'}")
    print(f"adversaries   {sum(g.resolve_count(scenario.node_count) for g in scenario.adversary)}")
    print(f"digest        {scenario.digest()}")
    return 0


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("SIM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
    except KeyboardInterrupt:
        return 1
    except Exception:
        log.exception("simulation failed")
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
