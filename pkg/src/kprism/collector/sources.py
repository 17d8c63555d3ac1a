"""Kernel summary sources for the collector.

A source exposes once-per-second cumulative accumulator snapshots plus
discovery events (socket endpoints, pipe BRI sightings) drained alongside.
The live source needs the kernel probe backend; file/fake sources let the
collector pipeline run from recorded snapshots and in tests.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, NamedTuple, Optional, Protocol

from kprism.errors import ProbePrivilegeError, ProbeUnavailableError, TraceError


class CumulativeRecord(NamedTuple):
    """One kernel accumulator: value only grows between reads."""

    tgid: int
    tid: int
    comm: str
    metric: str
    res: Optional[str]
    val: int


class Snapshot(NamedTuple):
    records: list
    discovery: list  # dicts: {"kind": "endpoint"|"pipe_bri", ...}
    lossy: bool
    drops: int


class KernelSource(Protocol):
    def attach(self, member_tgids: set) -> None: ...

    def update_scope(self, member_tgids: set) -> None: ...

    def read(self) -> Snapshot: ...

    def close(self) -> None: ...


def _parse_record(obj) -> CumulativeRecord:
    return CumulativeRecord(
        tgid=obj["tgid"],
        tid=obj["tid"],
        comm=obj.get("comm", ""),
        metric=obj["metric"],
        res=obj.get("res"),
        val=obj["val"],
    )


class FakeKernelSource:
    """Scripted snapshots for tests; records scope updates it receives."""

    def __init__(self, snapshots: Iterable[dict]):
        self._snapshots = list(snapshots)
        self._i = 0
        self.scope_updates: list[set] = []
        self.attached = False

    def attach(self, member_tgids: set) -> None:
        self.attached = True
        self.scope_updates.append(set(member_tgids))

    def update_scope(self, member_tgids: set) -> None:
        self.scope_updates.append(set(member_tgids))

    def read(self) -> Snapshot:
        if self._i >= len(self._snapshots):
            return Snapshot([], [], False, 0)
        snap = self._snapshots[self._i]
        self._i += 1
        return Snapshot(
            records=[_parse_record(r) for r in snap.get("records", [])],
            discovery=list(snap.get("discovery", [])),
            lossy=bool(snap.get("lossy", False)),
            drops=int(snap.get("drops", 0)),
        )

    def close(self) -> None:
        pass


class FileKernelSource:
    """Reads snapshot JSONL produced by an out-of-process probe harness.

    One line per read: ``{"records": [...], "discovery": [...],
    "lossy": false, "drops": 0}``.
    """

    def __init__(self, path):
        self._path = path
        self._lines: list[dict] = []
        self._i = 0

    def attach(self, member_tgids: set) -> None:
        try:
            with open(self._path, "r", encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        self._lines.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise TraceError(
                            f"{self._path}:{lineno}: bad snapshot: {exc}"
                        ) from exc
        except OSError as exc:
            raise ProbeUnavailableError(f"cannot open snapshots: {exc}") from exc

    def update_scope(self, member_tgids: set) -> None:
        pass

    def read(self) -> Snapshot:
        if self._i >= len(self._lines):
            return Snapshot([], [], False, 0)
        snap = self._lines[self._i]
        self._i += 1
        return Snapshot(
            records=[_parse_record(r) for r in snap.get("records", [])],
            discovery=list(snap.get("discovery", [])),
            lossy=bool(snap.get("lossy", False)),
            drops=int(snap.get("drops", 0)),
        )

    def close(self) -> None:
        pass


class LiveKernelSource:
    """Attachment point for the in-kernel probe component.

    Loading the probe programs requires CAP_BPF (or root) and the probe
    object files; neither is bundled with the Python package, so attach
    reports the precise failure for the CLI to map to an exit code.
    """

    def attach(self, member_tgids: set) -> None:
        if hasattr(os, "geteuid") and os.geteuid() != 0:
            raise ProbePrivilegeError(
                "loading kernel probes requires root (CAP_BPF); re-run privileged"
            )
        raise ProbeUnavailableError(
            "kernel probe backend not present; build and load the probe objects "
            "(see probes/) or point KPRISM_KERNEL_SNAPSHOTS at a snapshot file"
        )

    def update_scope(self, member_tgids: set) -> None:
        pass

    def read(self) -> Snapshot:
        raise ProbeUnavailableError("no live probe session")

    def close(self) -> None:
        pass
