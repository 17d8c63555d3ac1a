"""Selective thread tracking: degradation deconstruction over a metric store.

The procedure seeds a tracking list with socket-facing entrypoint threads,
flags per-second metric series whose Pearson correlation against the KPI
clears the threshold, walks shared resources to counterpart threads for
flagged IPC metrics, and iterates until no new thread appears.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from kprism.errors import AnalysisError
from kprism.types import EPOLL_PAIR_SEP, IPC_METRICS, MetricKind

MIN_OVERLAP_S = 10

_INET_FAMILIES = ("inet", "inet6")


@dataclass(frozen=True)
class Candidate:
    tgid: int
    tid: int
    metric: str
    res: str | None
    score: float  # Pearson r in [-1, 1]
    window: tuple  # (start second, end second) inclusive

    @property
    def thread(self):
        return (self.tgid, self.tid)


@dataclass
class TrackingReport:
    entrypoints: list  # sorted (tgid, tid)
    candidates: list  # ranked Candidate list
    edges: list  # (thread_a, thread_b, resource, mechanism)
    frontier_history: list  # per-iteration list of added threads
    threshold: float = 0.5
    window: tuple | None = None

    def threads(self) -> set:
        out = set(self.entrypoints)
        for frontier in self.frontier_history:
            out.update(frontier)
        return out


class SampleIndex:
    """Per-series timeline index over store records."""

    def __init__(self, records, endpoints=()):
        self.series = defaultdict(dict)  # (tgid,tid,metric,res) -> {ts: val}
        self.by_res = defaultdict(set)  # res -> set of (tgid,tid,metric)
        self.threads = set()
        self.comms = {}
        self.ts_min = None
        self.ts_max = None
        for rec in records:
            key = (rec.tgid, rec.tid, rec.metric, rec.res)
            self.series[key][rec.ts] = self.series[key].get(rec.ts, 0) + rec.val
            self.threads.add((rec.tgid, rec.tid))
            if rec.comm:
                self.comms.setdefault((rec.tgid, rec.tid), rec.comm)
            if rec.res is not None:
                self.by_res[rec.res].add((rec.tgid, rec.tid, rec.metric))
            if self.ts_min is None or rec.ts < self.ts_min:
                self.ts_min = rec.ts
            if self.ts_max is None or rec.ts > self.ts_max:
                self.ts_max = rec.ts
        self.endpoints = list(endpoints)
        # (tgid, tid, res) -> endpoint observations
        self.ep_by_key = defaultdict(list)
        for obs in self.endpoints:
            self.ep_by_key[(obs.tgid, obs.tid, obs.resource)].append(obs)


def detect_entrypoints(index: SampleIndex) -> set:
    """Threads with IPv4/IPv6 socket wait activity."""
    out = set()
    for obs in index.endpoints:
        if obs.family not in _INET_FAMILIES:
            continue
        thread = (obs.tgid, obs.tid)
        for metric in ("socket_wait_time", "socket_wait_count"):
            if (obs.tgid, obs.tid, metric, obs.resource) in index.series:
                out.add(thread)
                break
    return out


def _overlap_window(index: SampleIndex, kpi_map: dict, window=None):
    if index.ts_min is None or not kpi_map:
        raise AnalysisError("no samples or empty KPI series")
    lo = max(index.ts_min, min(kpi_map))
    hi = min(index.ts_max, max(kpi_map))
    if window is not None:
        lo = max(lo, window[0])
        hi = min(hi, window[1])
    seconds = [ts for ts in range(lo, hi + 1) if ts in kpi_map]
    if len(seconds) < MIN_OVERLAP_S:
        raise AnalysisError(
            f"only {len(seconds)} overlapping seconds between samples and KPI; "
            f"need >= {MIN_OVERLAP_S}"
        )
    return seconds


def _pearson(xs: np.ndarray, ys: np.ndarray) -> float | None:
    # zero-variance series have no defined correlation and are never flagged
    if xs.std() == 0.0 or ys.std() == 0.0:
        return None
    return float(np.corrcoef(xs, ys)[0, 1])


def _quartile_shift(xs: np.ndarray) -> float:
    q = max(len(xs) // 4, 1)
    first = float(xs[:q].mean())
    last = float(xs[-q:].mean())
    return abs(last - first) / max(abs(first), 1e-9)


def flag_candidates(
    index: SampleIndex,
    kpi,
    threshold: float = 0.5,
    window=None,
    threads=None,
) -> list[Candidate]:
    """Series with |Pearson r| >= threshold against the oriented KPI,
    ranked by |r| then by relative mean shift between the window's first
    and last quartile."""
    kpi_map = kpi.oriented()
    seconds = _overlap_window(index, kpi_map, window)
    kvec = np.array([kpi_map[ts] for ts in seconds], dtype=float)
    win = (seconds[0], seconds[-1])

    ranked = []
    for (tgid, tid, metric, res), points in index.series.items():
        if threads is not None and (tgid, tid) not in threads:
            continue
        xs = np.array([points.get(ts, 0) for ts in seconds], dtype=float)
        r = _pearson(xs, kvec)
        if r is None or abs(r) < threshold:
            continue
        cand = Candidate(tgid, tid, metric, res, round(r, 6), win)
        ranked.append((-abs(r), -_quartile_shift(xs), (tgid, tid, metric, res or ""), cand))
    ranked.sort(key=lambda item: item[:3])
    return [item[3] for item in ranked]


def counterpart_threads(candidate: Candidate, index: SampleIndex) -> set:
    """Threads communicating with the candidate through the same resource."""
    metric = candidate.metric
    if metric not in {m.value for m in IPC_METRICS}:
        raise AnalysisError(f"{metric} is not an IPC metric")
    subject = candidate.thread
    res = candidate.res
    out = set()

    if metric.startswith("futex_wait"):
        wanted = {"futex_wake_count"}
    elif metric == "futex_wake_count":
        wanted = {"futex_wait_time", "futex_wait_count"}
    else:
        wanted = None

    def same_res_threads(res_key, metrics_filter=None):
        found = set()
        for tgid, tid, m in index.by_res.get(res_key, ()):
            if (tgid, tid) == subject:
                continue
            if metrics_filter is not None and m not in metrics_filter:
                continue
            found.add((tgid, tid))
        return found

    if metric.startswith("futex_"):
        out |= same_res_threads(res, wanted)
    elif metric.startswith("pipe_"):
        out |= same_res_threads(res)
    elif metric.startswith("epoll_") or metric == "epoll_file_wait":
        out |= same_res_threads(res)
        if res and EPOLL_PAIR_SEP in res:
            epoll_res, file_res = res.split(EPOLL_PAIR_SEP, 1)
            out |= same_res_threads(epoll_res)
            out |= same_res_threads(file_res)
    elif metric.startswith("socket_"):
        out |= same_res_threads(res)
        for obs in index.ep_by_key.get((candidate.tgid, candidate.tid, res), ()):
            for other in index.endpoints:
                if (other.tgid, other.tid) == subject:
                    continue
                if _mirrors(obs, other):
                    out.add((other.tgid, other.tid))
    return out


def _mirrors(a, b) -> bool:
    if a.family != b.family:
        return False
    if a.family == "unix":
        return bool(a.path) and a.path == b.path
    return a.src == b.dst and a.dst == b.src and bool(a.src)


_MECHANISM = (
    ("futex_", "futex"),
    ("pipe_", "pipe"),
    ("socket_", "socket"),
    ("epoll_", "epoll"),
)


def _mechanism(metric: str) -> str:
    for prefix, mech in _MECHANISM:
        if metric.startswith(prefix):
            return mech
    return "unknown"


def track(index: SampleIndex, kpi, threshold: float = 0.5, window=None) -> TrackingReport:
    """Iterative selective thread tracking until no new thread appears."""
    entrypoints = detect_entrypoints(index)
    report = TrackingReport(
        entrypoints=sorted(entrypoints),
        candidates=[],
        edges=[],
        frontier_history=[],
        threshold=threshold,
        window=window,
    )
    if not entrypoints:
        return report

    tracked = set(entrypoints)
    best: dict = {}
    edge_set = set()
    ipc_values = {m.value for m in IPC_METRICS}
    for _ in range(len(index.threads) + 1):
        candidates = flag_candidates(index, kpi, threshold, window, threads=tracked)
        new_threads = set()
        for cand in candidates:
            key = (cand.tgid, cand.tid, cand.metric, cand.res)
            best.setdefault(key, cand)
            if cand.metric not in ipc_values:
                continue
            for peer in counterpart_threads(cand, index):
                edge_set.add(
                    (cand.thread, peer, cand.res, _mechanism(cand.metric))
                )
                if peer not in tracked:
                    new_threads.add(peer)
        if not new_threads:
            break
        report.frontier_history.append(sorted(new_threads))
        tracked |= new_threads
    report.window = None
    # final ranking over everything collected
    try:
        ranked = flag_candidates(index, kpi, threshold, window, threads=tracked)
    except AnalysisError:
        ranked = []
    report.candidates = ranked
    report.edges = sorted(edge_set)
    if ranked:
        report.window = ranked[0].window
    return report


def device_share(index: SampleIndex, device_res: str, tgids: set, window=None) -> list:
    """Per-second share of a device's sectors issued by the given tgids.

    Seconds with no sector traffic at all are absent, not zero.
    """
    totals = defaultdict(int)
    member = defaultdict(int)
    for (tgid, tid, metric, res), points in index.series.items():
        if metric != "sector_count" or res != device_res:
            continue
        for ts, val in points.items():
            if window is not None and not (window[0] <= ts <= window[1]):
                continue
            totals[ts] += val
            if tgid in tgids:
                member[ts] += val
    return [(ts, member[ts] / totals[ts]) for ts in sorted(totals) if totals[ts] > 0]
