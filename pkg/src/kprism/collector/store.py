"""Metric store: newline-delimited JSON, one record per MetricSample.

Sample records carry fixed keys::

    {"ts":<wall s>,"iv":<interval>,"tgid":N,"tid":N,"comm":"s",
     "metric":"futex_wait_time","res":"<canonical resource>","val":N,"lossy":bool}

Values are nanoseconds for *_time metrics, counts otherwise.  Resource
canonical forms: BRI ``dev_ino``, epoll hex address, futex ``tgid:0xADDR``,
device ``major:minor``, epoll file pair ``epollHex→dev_ino``; scheduler
metrics carry ``null``.

Socket endpoint metadata needed for analysis-time counterpart matching is
stored as sidecar lines marked with a ``meta`` key; sample readers skip them.
"""

from __future__ import annotations

import json
from typing import Iterable, NamedTuple, Optional

from kprism.errors import TraceError
from kprism.types import EndpointObservation, MetricSample


class StoreRecord(NamedTuple):
    ts: int
    iv: int
    tgid: int
    tid: int
    comm: str
    metric: str
    res: Optional[str]
    val: int
    lossy: bool


def _sample_line(rec: StoreRecord) -> str:
    return json.dumps(
        {
            "ts": rec.ts,
            "iv": rec.iv,
            "tgid": rec.tgid,
            "tid": rec.tid,
            "comm": rec.comm,
            "metric": rec.metric,
            "res": rec.res,
            "val": rec.val,
            "lossy": rec.lossy,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )


def _endpoint_line(obs: EndpointObservation) -> str:
    return json.dumps(
        {
            "meta": "endpoint",
            "tgid": obs.tgid,
            "tid": obs.tid,
            "res": obs.resource,
            "family": obs.family,
            "src": obs.src,
            "dst": obs.dst,
            "path": obs.path,
            "proto": obs.protocol,
        },
        sort_keys=True,
        separators=(",", ":"),
        ensure_ascii=False,
    )


class MetricStoreWriter:
    """Streaming writer used by the live collector (one tick at a time)."""

    def __init__(self, fh):
        self._fh = fh

    def write_tick(self, records: Iterable[StoreRecord], endpoints=()):
        for obs in endpoints:
            self._fh.write(_endpoint_line(obs) + "\n")
        for rec in records:
            self._fh.write(_sample_line(rec) + "\n")
        self._fh.flush()


def write_store(
    path,
    samples: Iterable[MetricSample],
    epoch_s: int = 0,
    comms: Optional[dict] = None,
    lossy_ivs=frozenset(),
    endpoints: Iterable[EndpointObservation] = (),
) -> None:
    """Persist replayed samples in the collector's store format."""
    comms = comms or {}
    with open(path, "w", encoding="utf-8") as fh:
        writer = MetricStoreWriter(fh)
        writer.write_tick([], endpoints)
        records = [
            StoreRecord(
                ts=epoch_s + s.interval_s,
                iv=s.interval_s,
                tgid=s.tgid,
                tid=s.tid,
                comm=comms.get(s.tid, ""),
                metric=s.metric,
                res=s.resource,
                val=s.value,
                lossy=s.interval_s in lossy_ivs,
            )
            for s in samples
        ]
        writer.write_tick(records)


def read_store(path) -> tuple[list[StoreRecord], list[EndpointObservation]]:
    """Load a metric store; returns (sample records, endpoint observations)."""
    samples: list[StoreRecord] = []
    endpoints: list[EndpointObservation] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise TraceError(f"{path}:{lineno}: bad store line: {exc}") from exc
            if obj.get("meta") == "endpoint":
                endpoints.append(
                    EndpointObservation(
                        tgid=obj["tgid"],
                        tid=obj["tid"],
                        resource=obj["res"],
                        family=obj["family"],
                        src=obj.get("src", ""),
                        dst=obj.get("dst", ""),
                        path=obj.get("path", ""),
                        protocol=obj.get("proto", 0),
                    )
                )
                continue
            try:
                samples.append(
                    StoreRecord(
                        ts=obj["ts"],
                        iv=obj["iv"],
                        tgid=obj["tgid"],
                        tid=obj["tid"],
                        comm=obj.get("comm", ""),
                        metric=obj["metric"],
                        res=obj.get("res"),
                        val=obj["val"],
                        lossy=bool(obj.get("lossy", False)),
                    )
                )
            except KeyError as exc:
                raise TraceError(f"{path}:{lineno}: missing key {exc}") from exc
    return samples, endpoints
