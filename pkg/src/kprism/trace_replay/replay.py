"""Replay driver: pushes a trace through the aggregation engine.

Feeds events in file order, flushing each 1 s interval as soon as every event
before its boundary has been consumed, plus trailing flushes up to the trace
duration.  Output is deterministic: replaying the same trace twice yields
identical samples.
"""

from __future__ import annotations

from dataclasses import dataclass

from kprism.metrics_core import MetricsEngine
from kprism.types import NS_PER_S, EndpointObservation, MetricSample
from .traces import TraceHeader, read_trace


@dataclass
class ReplayResult:
    header: TraceHeader
    samples: list[MetricSample]
    endpoints: list[EndpointObservation]
    flush_count: int = 0
    drop_count: int = 0
    anomaly_count: int = 0


def replay_events(events, duration_s, engine=None):
    """Replay an in-memory event list.

    Returns (samples, endpoint observations, engine, flush count).  Samples
    are merged per (interval, thread, metric, resource): a flush may emit a
    late fragment for an earlier interval when a poll-family wait crosses the
    boundary (its resources are only known at exit).
    """
    engine = engine or MetricsEngine()
    acc: dict = {}
    next_boundary = NS_PER_S
    interval = 0
    flushes = 0

    def take(flush_interval):
        for s in engine.flush(flush_interval):
            key = (s.interval_s, s.tgid, s.tid, s.metric, s.resource)
            acc[key] = acc.get(key, 0) + s.value

    for ev in events:
        while ev["t"] >= next_boundary:
            take(interval)
            flushes += 1
            interval += 1
            next_boundary += NS_PER_S
        engine.feed(ev)
    while interval < duration_s:
        take(interval)
        flushes += 1
        interval += 1
    samples = [
        MetricSample(*key, value)
        for key, value in sorted(
            acc.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2], kv[0][3], kv[0][4] or "")
        )
    ]
    return samples, engine.drain_endpoints(), engine, flushes


def replay_trace(path) -> ReplayResult:
    header, events = read_trace(path)
    samples, endpoints, engine, flushes = replay_events(events, header.duration_s)
    return ReplayResult(
        header=header,
        samples=samples,
        endpoints=endpoints,
        flush_count=flushes,
        drop_count=engine.drop_count,
        anomaly_count=engine.anomaly_count,
    )
