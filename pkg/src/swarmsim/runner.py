"""Run orchestration: single runs, seed sweeps, and report serialization."""

from __future__ import annotations

import csv
import json
import statistics
from pathlib import Path

from .scenario import Scenario
from .world import World


def run_single(
    scenario: Scenario,
    seed: int | None = None,
    trust_enabled: bool | None = None,
    crypto_backend: str | None = None,
    keep_trace: bool = False,
) -> dict:
    world = World(
        scenario,
        seed=seed,
        trust_enabled=trust_enabled,
        crypto_backend=crypto_backend,
        keep_trace=keep_trace,
    )
    report = world.run()
    if keep_trace:
        report["trace"] = world.trace
    return report


def run_batch(
    scenario: Scenario,
    seeds: list[int],
    trust_enabled: bool | None = None,
    crypto_backend: str | None = None,
) -> dict:
    """Run one scenario across several seeds and aggregate the headline numbers."""
    runs = [
        run_single(scenario, seed=s, trust_enabled=trust_enabled, crypto_backend=crypto_backend)
        for s in seeds
    ]
    pdrs = [r["pdr"] for r in runs]
    delays = [r["delay"]["mean_ms"] for r in runs if r["delay"]["mean_ms"] is not None]
    overheads = [r["overhead"]["fraction"] for r in runs]
    detections = [
        r["detection"]["detection_rate"]
        for r in runs
        if r["detection"]["detection_rate"] is not None
    ]
    fprs = [r["detection"]["false_positive_rate"] for r in runs]

    def _mean(values: list[float]) -> float | None:
        return statistics.fmean(values) if values else None

    def _stdev(values: list[float]) -> float | None:
        return statistics.stdev(values) if len(values) > 1 else None

    return {
        "scenario": scenario.name,
        "seeds": seeds,
        "config_digest": runs[0]["config_digest"],
        "aggregate": {
            "pdr_mean": _mean(pdrs),
            "pdr_stdev": _stdev(pdrs),
            "mean_delay_ms": _mean(delays),
            "overhead_mean": _mean(overheads),
            "detection_rate_mean": _mean(detections),
            "false_positive_rate_mean": _mean(fprs),
        },
        "runs": runs,
    }


def write_report(report: dict, out_dir: Path, fmt: str = "json") -> list[Path]:
    """Persist a run or batch report; returns the files written."""
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report.get("scenario", "run")
    written: list[Path] = []
    if fmt == "json":
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
        written.append(path)
        return written
    if fmt == "csv":
        # one row per run (batch) or a single row (single run)
        runs = report.get("runs", [report])
        path = out_dir / f"{name}.csv"
        fields = [
            "scenario",
            "seed",
            "trust_enabled",
            "pdr",
            "mean_delay_ms",
            "p95_delay_ms",
            "overhead_fraction",
            "detection_rate",
            "false_positive_rate",
            "generated",
            "delivered",
        ]
        with path.open("w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields)
            writer.writeheader()
            for run in runs:
                writer.writerow(
                    {
                        "scenario": run["scenario"],
                        "seed": run["seed"],
                        "trust_enabled": run["trust_enabled"],
                        "pdr": run["pdr"],
                        "mean_delay_ms": run["delay"]["mean_ms"],
                        "p95_delay_ms": run["delay"]["p95_ms"],
                        "overhead_fraction": run["overhead"]["fraction"],
                        "detection_rate": run["detection"]["detection_rate"],
                        "false_positive_rate": run["detection"]["false_positive_rate"],
                        "generated": run["packets"]["generated"],
                        "delivered": run["packets"]["delivered"],
                    }
                )
        written.append(path)
        # timeseries sidecar for single runs
        if "timeseries" in report:
            ts_path = out_dir / f"{name}-timeseries.csv"
            rows = report["timeseries"]
            if rows:
                with ts_path.open("w", newline="") as fh:
                    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                    writer.writeheader()
                    writer.writerows(rows)
                written.append(ts_path)
        return written
    raise ValueError(f"unknown report format {fmt!r}")
