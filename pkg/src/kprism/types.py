"""Core domain types: thread/resource identities, metric kinds and samples.

Resource identities have a single canonical text rendering which is used as
the ``res`` field of metric-store records and as the aggregation key inside
the engine:

* non-epoll backing resources (pipes, sockets, regular files): ``"{dev}_{ino}"``
* epoll resources: the hexadecimal kernel object address, e.g. ``"ffff9a7a3f5e1740"``
* futexes: ``"{tgid}:0x{uaddr:x}"``
* block devices: ``"{major}:{minor}"``
* epoll->file wait pairs: ``"{epoll_hex}→{dev}_{ino}"``
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

EPOLL_PAIR_SEP = "→"  # arrow between epoll address and awaited file BRI

NS_PER_S = 1_000_000_000

# Accumulators are 64-bit and saturate instead of wrapping.
SATURATE_MAX = 2**64 - 1


class ResourceKind(str, enum.Enum):
    PIPE = "pipe"
    SOCKET_INET = "socket_inet"
    SOCKET_INET6 = "socket_inet6"
    SOCKET_UNIX = "socket_unix"
    EPOLL = "epoll"
    REGULAR_FILE = "regular_file"


SOCKET_KINDS = frozenset(
    {ResourceKind.SOCKET_INET, ResourceKind.SOCKET_INET6, ResourceKind.SOCKET_UNIX}
)


class MetricKind(str, enum.Enum):
    RUNTIME = "runtime"
    RQ_TIME = "rq_time"
    BLOCK_TIME = "block_time"
    IOWAIT_TIME = "iowait_time"
    SLEEP_TIME = "sleep_time"
    PIPE_WAIT_TIME = "pipe_wait_time"
    PIPE_WAIT_COUNT = "pipe_wait_count"
    SOCKET_WAIT_TIME = "socket_wait_time"
    SOCKET_WAIT_COUNT = "socket_wait_count"
    SECTOR_COUNT = "sector_count"
    EPOLL_WAIT_TIME = "epoll_wait_time"
    EPOLL_WAIT_COUNT = "epoll_wait_count"
    EPOLL_FILE_WAIT = "epoll_file_wait"
    FUTEX_WAIT_TIME = "futex_wait_time"
    FUTEX_WAIT_COUNT = "futex_wait_count"
    FUTEX_WAKE_COUNT = "futex_wake_count"


#: Metrics whose values are nanoseconds; the rest are counts.
TIME_METRICS = frozenset(
    {
        MetricKind.RUNTIME,
        MetricKind.RQ_TIME,
        MetricKind.BLOCK_TIME,
        MetricKind.IOWAIT_TIME,
        MetricKind.SLEEP_TIME,
        MetricKind.PIPE_WAIT_TIME,
        MetricKind.SOCKET_WAIT_TIME,
        MetricKind.EPOLL_WAIT_TIME,
        MetricKind.EPOLL_FILE_WAIT,
        MetricKind.FUTEX_WAIT_TIME,
    }
)

#: Scheduler metrics carry no resource.
SCHED_METRICS = frozenset(
    {
        MetricKind.RUNTIME,
        MetricKind.RQ_TIME,
        MetricKind.BLOCK_TIME,
        MetricKind.IOWAIT_TIME,
        MetricKind.SLEEP_TIME,
    }
)

#: IPC metrics admit counterpart-thread discovery in the analysis stage.
IPC_METRICS = frozenset(
    {
        MetricKind.PIPE_WAIT_TIME,
        MetricKind.PIPE_WAIT_COUNT,
        MetricKind.SOCKET_WAIT_TIME,
        MetricKind.SOCKET_WAIT_COUNT,
        MetricKind.EPOLL_WAIT_TIME,
        MetricKind.EPOLL_WAIT_COUNT,
        MetricKind.EPOLL_FILE_WAIT,
        MetricKind.FUTEX_WAIT_TIME,
        MetricKind.FUTEX_WAIT_COUNT,
        MetricKind.FUTEX_WAKE_COUNT,
    }
)


@dataclass(frozen=True)
class ThreadRef:
    """A kernel thread: (tgid, tid) is the identity, comm is informational."""

    tgid: int
    tid: int
    comm: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        if self.tgid < 1 or self.tid < 1:
            raise ValueError(f"tgid/tid must be >= 1, got ({self.tgid}, {self.tid})")


@dataclass(frozen=True)
class BackingResourceId:
    """Identity of a pipe/socket/file/epoll kernel resource.

    Non-epoll resources are identified by (kind, dev, ino); epoll resources
    solely by the kernel object address.
    """

    kind: ResourceKind
    dev: int = 0
    ino: int = 0
    object_addr: int = 0

    def __post_init__(self) -> None:
        if self.kind is ResourceKind.EPOLL:
            if self.object_addr == 0:
                raise ValueError("epoll BRI requires a nonzero object address")
            if self.dev or self.ino:
                raise ValueError("epoll BRI must not carry dev/ino")
        else:
            if self.object_addr:
                raise ValueError("non-epoll BRI must not carry an object address")
            if self.dev < 0 or self.ino < 0:
                raise ValueError("dev/ino must be nonnegative")

    def render(self) -> str:
        if self.kind is ResourceKind.EPOLL:
            return f"{self.object_addr:x}"
        return f"{self.dev}_{self.ino}"


def bri_from_inode(kind: ResourceKind, dev: int, ino: int) -> BackingResourceId:
    """BRI for a file-backed resource; equal (kind, dev, ino) give equal BRIs."""
    kind = ResourceKind(kind)
    if kind is ResourceKind.EPOLL:
        raise ValueError("epoll resources are keyed by object address, not inode")
    return BackingResourceId(kind=kind, dev=dev, ino=ino)


def bri_from_epoll_object(object_addr: int) -> BackingResourceId:
    """BRI for an epoll resource, keyed by its kernel object address."""
    return BackingResourceId(kind=ResourceKind.EPOLL, object_addr=object_addr)


@dataclass(frozen=True)
class SocketEndpoint:
    """Socket identity as seen at a recv/send probe.

    inet/inet6 endpoints carry the 5-tuple; unix endpoints carry the path (or
    abstract name) with zeroed ports.
    """

    family: str  # "inet" | "inet6" | "unix"
    src_addr: str = ""
    dst_addr: str = ""
    src_port: int = 0
    dst_port: int = 0
    path: str = ""
    protocol: int = 0

    def mirrors(self, other: "SocketEndpoint") -> bool:
        """True when the two endpoints are the opposite ends of one flow."""
        if self.family != other.family:
            return False
        if self.family == "unix":
            return bool(self.path) and self.path == other.path
        return (
            self.src_addr == other.dst_addr
            and self.dst_addr == other.src_addr
            and self.src_port == other.dst_port
            and self.dst_port == other.src_port
        )


@dataclass(frozen=True)
class FutexRef:
    """Futex identity: (tgid, uaddr).

    Cross-process shared futexes show up as one key per process; uaddr alone
    is ambiguous across address spaces.
    """

    tgid: int
    uaddr: int

    def render(self) -> str:
        return f"{self.tgid}:0x{self.uaddr:x}"


@dataclass(frozen=True)
class DeviceRef:
    major: int
    minor: int

    def render(self) -> str:
        return f"{self.major}:{self.minor}"


def render_epoll_file_pair(epoll: BackingResourceId, file: BackingResourceId) -> str:
    return f"{epoll.render()}{EPOLL_PAIR_SEP}{file.render()}"


class MetricSample(NamedTuple):
    """One per-second observation.

    ``resource`` is the canonical rendering (see module docstring) or None for
    scheduler metrics.  ``value`` is nanoseconds for *_time metrics, a count
    otherwise.
    """

    interval_s: int
    tgid: int
    tid: int
    metric: str
    resource: Optional[str]
    value: int


class EndpointObservation(NamedTuple):
    """Socket endpoint metadata seen on a recv/send probe, keyed by observer
    thread and socket BRI; analysis uses it for counterpart matching."""

    tgid: int
    tid: int
    resource: str
    family: str
    src: str
    dst: str
    path: str
    protocol: int
