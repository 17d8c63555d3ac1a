"""Tracking report serialization (versioned schema) and plot-data emission."""

from __future__ import annotations

import csv
import json
import os

from kprism.errors import AnalysisError
from .tracking import Candidate, TrackingReport

REPORT_VERSION = "v1"


def report_to_json(report: TrackingReport) -> str:
    doc = {
        "version": REPORT_VERSION,
        "threshold": report.threshold,
        "window": list(report.window) if report.window else None,
        "entrypoints": [{"tgid": t, "tid": i} for t, i in report.entrypoints],
        "candidates": [
            {
                "tgid": c.tgid,
                "tid": c.tid,
                "metric": c.metric,
                "res": c.res,
                "score": c.score,
                "window": list(c.window),
            }
            for c in report.candidates
        ],
        "edges": [
            {
                "a": {"tgid": a[0], "tid": a[1]},
                "b": {"tgid": b[0], "tid": b[1]},
                "res": res,
                "mechanism": mech,
            }
            for a, b, res, mech in report.edges
        ],
        "frontier_history": [
            [{"tgid": t, "tid": i} for t, i in frontier]
            for frontier in report.frontier_history
        ],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def load_report(path) -> TrackingReport:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != REPORT_VERSION:
        raise AnalysisError(f"unsupported report version {doc.get('version')!r}")
    return TrackingReport(
        entrypoints=[(e["tgid"], e["tid"]) for e in doc["entrypoints"]],
        candidates=[
            Candidate(
                c["tgid"],
                c["tid"],
                c["metric"],
                c["res"],
                c["score"],
                tuple(c["window"]),
            )
            for c in doc["candidates"]
        ],
        edges=[
            (
                (e["a"]["tgid"], e["a"]["tid"]),
                (e["b"]["tgid"], e["b"]["tid"]),
                e["res"],
                e["mechanism"],
            )
            for e in doc["edges"]
        ],
        frontier_history=[
            [(t["tgid"], t["tid"]) for t in frontier]
            for frontier in doc["frontier_history"]
        ],
        threshold=doc["threshold"],
        window=tuple(doc["window"]) if doc.get("window") else None,
    )


def format_report(report: TrackingReport) -> str:
    """Human-readable rendering for the `report` subcommand."""
    lines = []
    lines.append(f"tracking report (threshold {report.threshold})")
    if report.window:
        lines.append(f"window: seconds {report.window[0]}..{report.window[1]}")
    lines.append(f"entrypoints ({len(report.entrypoints)}):")
    for tgid, tid in report.entrypoints:
        lines.append(f"  {tgid}/{tid}")
    lines.append(f"candidates ({len(report.candidates)}):")
    for c in report.candidates:
        res = c.res if c.res is not None else "-"
        lines.append(f"  {c.tgid}/{c.tid} {c.metric} [{res}] r={c.score:+.3f}")
    lines.append(f"edges ({len(report.edges)}):")
    for a, b, res, mech in report.edges:
        lines.append(f"  {a[0]}/{a[1]} <-> {b[0]}/{b[1]} via {mech} [{res}]")
    lines.append(f"iterations: {len(report.frontier_history)}")
    for i, frontier in enumerate(report.frontier_history, start=1):
        added = ", ".join(f"{t}/{i_}" for t, i_ in frontier)
        lines.append(f"  +{i}: {added}")
    return "\n".join(lines) + "\n"


def write_plot_data(plot_dir, index, kpi, report: TrackingReport) -> None:
    """One `second,value` CSV per flagged series, plus the KPI."""
    os.makedirs(plot_dir, exist_ok=True)
    _write_series(os.path.join(plot_dir, "kpi.csv"), kpi.points)
    for c in report.candidates:
        key = (c.tgid, c.tid, c.metric, c.res)
        points = index.series.get(key, {})
        seconds = range(c.window[0], c.window[1] + 1)
        name = f"{c.tgid}_{c.tid}_{c.metric}"
        if c.res:
            safe = c.res.replace(":", "-").replace("→", "_to_").replace("/", "-")
            name += f"_{safe}"
        _write_series(
            os.path.join(plot_dir, name + ".csv"),
            [(s, points.get(s, 0)) for s in seconds],
        )


def _write_series(path, points) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["second", "value"])
        for ts, value in points:
            writer.writerow([ts, value])
