"""Trace file format v1: newline-delimited JSON.

Line 1 is the header; every further line is one raw event record.  The body
is in global ``t`` order and per-tid order is strict (validated on read).
Serialization is canonical (sorted keys, compact separators) so regeneration
with the same seed is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Iterable

from kprism.errors import TraceError
from kprism.types import NS_PER_S

TRACE_VERSION = "v1"


@dataclass
class TraceHeader:
    version: str
    scenario: str
    seed: int
    duration_s: int
    epoch_ns: int = 0


def dumps_record(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def write_trace(path, header: TraceHeader, events: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_record(asdict(header)) + "\n")
        for ev in events:
            fh.write(dumps_record(ev) + "\n")


def read_trace(path) -> tuple[TraceHeader, list[dict]]:
    """Load and validate a trace file; raises TraceError with line position."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise TraceError(f"{path}: empty trace file")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise TraceError(f"{path}:1: bad header: {exc}") from exc
    if head.get("version") != TRACE_VERSION:
        raise TraceError(f"{path}:1: unsupported trace version {head.get('version')!r}")
    header = TraceHeader(
        version=head["version"],
        scenario=head.get("scenario", ""),
        seed=int(head.get("seed", 0)),
        duration_s=int(head["duration_s"]),
        epoch_ns=int(head.get("epoch_ns", 0)),
    )
    events = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            ev = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"{path}:{lineno}: bad event: {exc}") from exc
        events.append(ev)
    validate_events(events, header.duration_s, origin=str(path))
    return header, events


def validate_events(events: list[dict], duration_s: int, origin: str = "trace") -> None:
    """Global and per-tid timestamp order, event extent within the duration."""
    end = duration_s * NS_PER_S
    last_global = 0
    last_by_tid: dict[int, int] = {}
    for i, ev in enumerate(events):
        pos = f"{origin}: event {i}"
        try:
            t = ev["t"]
            tid = ev["tid"]
        except KeyError as exc:
            raise TraceError(f"{pos}: missing field {exc}") from exc
        if t < 0 or t >= end:
            raise TraceError(f"{pos}: t={t} outside [0, {end})")
        if t < last_global:
            raise TraceError(f"{pos}: global t order violated ({t} < {last_global})")
        last_global = t
        prev = last_by_tid.get(tid)
        if prev is not None and t < prev:
            raise TraceError(f"{pos}: per-tid order violated for tid {tid}")
        last_by_tid[tid] = t
        if ev.get("kind") == "pollfam_exit" and not ev.get("fds"):
            raise TraceError(f"{pos}: pollfam_exit with empty fd list")
