"""Live-session orchestration: scope, once-per-second reads, differencing.

Ticks align to the session-start monotonic epoch; the wall-clock second of
each interval is recorded in the store for KPI cross-referencing.  Scope only
grows: the initial target tgids stay members forever and IPC discoveries add
peer thread groups before the next interval.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from kprism.errors import ConfigError, KprismError
from .sources import Snapshot
from .store import MetricStoreWriter, StoreRecord

log = logging.getLogger("kprism.collector")

GLOBAL_SCOPE_METRICS = frozenset({"sector_count"})


@dataclass
class SessionConfig:
    target_tgid: int | None = None
    target_comm: str | None = None
    duration_s: int = 0
    output_path: str = ""
    lossy_policy: str = "mark"  # "mark" | "abort"
    interval_s: int = 1  # fixed collection cadence

    def validate(self) -> None:
        if (self.target_tgid is None) == (self.target_comm is None):
            raise ConfigError("exactly one of target tgid / command name required")
        if self.duration_s < 1:
            raise ConfigError("duration must be >= 1 s")
        if self.interval_s != 1:
            raise ConfigError("collection interval is fixed at 1 s")
        if self.lossy_policy not in ("mark", "abort"):
            raise ConfigError(f"unknown lossy policy {self.lossy_policy!r}")


@dataclass
class ScopeState:
    member_tgids: set = field(default_factory=set)
    discovery_log: list = field(default_factory=list)  # (time_s, tgid, reason)

    def seed(self, tgids, now_s=0):
        for tgid in tgids:
            self.member_tgids.add(tgid)
            self.discovery_log.append((now_s, tgid, "initial"))

    def expand(self, tgid, reason, now_s):
        if tgid not in self.member_tgids:
            self.member_tgids.add(tgid)
            self.discovery_log.append((now_s, tgid, reason))
            return True
        return False


def resolve_target_by_comm(comm: str) -> set:
    """Scan the process table for thread groups whose comm matches."""
    import os

    found = set()
    for entry in os.listdir("/proc"):
        if not entry.isdigit():
            continue
        try:
            with open(f"/proc/{entry}/comm", "r", encoding="utf-8") as fh:
                if fh.read().strip() == comm:
                    found.add(int(entry))
        except OSError:
            continue
    return found


class Session:
    """Drives one collection session over a kernel summary source."""

    def __init__(self, cfg: SessionConfig, source, resolver=None):
        cfg.validate()
        self.cfg = cfg
        self.source = source
        self.scope = ScopeState()
        self._resolver = resolver or resolve_target_by_comm
        self._prev: dict = {}
        self._comms: dict = {}
        # cumulative IPC observations for peer matching
        self._pipe_tgids: dict = {}  # bri -> set of tgids
        self._flows: dict = {}  # (family, src, dst) -> set of tgids
        self._started = False

    def start(self) -> None:
        if self.cfg.target_tgid is not None:
            targets = {self.cfg.target_tgid}
        else:
            targets = self._resolver(self.cfg.target_comm)
        if not targets:
            raise ConfigError(f"target not found: {self.cfg.target_comm!r}")
        self.scope.seed(targets)
        self.source.attach(set(self.scope.member_tgids))
        self._started = True

    # -- IPC peer discovery ---------------------------------------------------

    def _observe_discovery(self, discovery, now_s) -> bool:
        """Record IPC observations; returns True if the member set grew."""
        grew = False
        for obs in discovery:
            kind = obs.get("kind")
            if kind == "pipe_bri":
                tgids = self._pipe_tgids.setdefault(obs["res"], set())
                tgids.add(obs["tgid"])
                grew |= self._link_group(tgids, "pipe_peer", now_s)
            elif kind == "endpoint":
                family = obs.get("family", "")
                if family == "unix":
                    key = ("unix", obs.get("path", ""))
                    mirror = key
                else:
                    key = (family, obs.get("src", ""), obs.get("dst", ""))
                    mirror = (family, obs.get("dst", ""), obs.get("src", ""))
                self._flows.setdefault(key, set()).add(obs["tgid"])
                peers = self._flows.get(mirror)
                if peers:
                    linked = self._flows[key] | peers
                    grew |= self._link_group(linked, "socket_peer", now_s)
        return grew

    def _link_group(self, tgids, reason, now_s) -> bool:
        if not (tgids & self.scope.member_tgids):
            return False
        grew = False
        for tgid in tgids:
            grew |= self.scope.expand(tgid, reason, now_s)
        return grew

    # -- per-interval work ----------------------------------------------------

    def tick(self, interval_idx: int, wall_ts: int) -> tuple[list[StoreRecord], list]:
        """Read summaries, difference against the previous snapshot, emit."""
        if not self._started:
            raise KprismError("session not started")
        snap: Snapshot = self.source.read()

        if snap.lossy and self.cfg.lossy_policy == "abort":
            raise KprismError(
                f"ring buffer overflow in interval {interval_idx} "
                f"({snap.drops} records dropped)"
            )

        if self._observe_discovery(snap.discovery, wall_ts):
            self.source.update_scope(set(self.scope.member_tgids))

        records = []
        for rec in snap.records:
            key = (rec.tgid, rec.tid, rec.metric, rec.res)
            if rec.comm:
                self._comms.setdefault(rec.tid, rec.comm)
            prev = self._prev.get(key, 0)
            if rec.val < prev:
                log.warning("accumulator went backwards for %s", key)
                prev = 0
            delta = rec.val - prev
            self._prev[key] = rec.val
            if delta == 0:
                continue
            if rec.metric not in GLOBAL_SCOPE_METRICS and (
                rec.tgid not in self.scope.member_tgids
            ):
                continue
            records.append(
                StoreRecord(
                    ts=wall_ts,
                    iv=interval_idx,
                    tgid=rec.tgid,
                    tid=rec.tid,
                    comm=self._comms.get(rec.tid, rec.comm),
                    metric=rec.metric,
                    res=rec.res,
                    val=delta,
                    lossy=snap.lossy,
                )
            )
        endpoints = [
            _endpoint_obs(obs)
            for obs in snap.discovery
            if obs.get("kind") == "endpoint"
        ]
        return records, endpoints

    def run(self, out_fh, clock=time.monotonic, sleep=time.sleep, wall=time.time):
        """Collect for the configured duration, persisting each tick."""
        self.start()
        writer = MetricStoreWriter(out_fh)
        epoch = clock()
        try:
            for idx in range(self.cfg.duration_s):
                deadline = epoch + (idx + 1) * self.cfg.interval_s
                delay = deadline - clock()
                if delay > 0:
                    sleep(delay)
                records, endpoints = self.tick(idx, int(wall()))
                writer.write_tick(records, endpoints)
        finally:
            self.source.close()


def _endpoint_obs(obs):
    from kprism.types import EndpointObservation

    return EndpointObservation(
        tgid=obs["tgid"],
        tid=obs.get("tid", 0),
        resource=obs.get("res", ""),
        family=obs.get("family", ""),
        src=obs.get("src", ""),
        dst=obs.get("dst", ""),
        path=obs.get("path", ""),
        protocol=obs.get("proto", 0),
    )
