"""Brute-force reference accumulator for trace files.

Deliberately written apart from the streaming engine: it loads the whole
event list, matches call pairs per thread, reconstructs scheduler spans, and
then projects every span onto the per-second grid with direct interval
overlap arithmetic.  Used as the independent oracle the engine is checked
against (exact integer equality).
"""

from __future__ import annotations

from collections import defaultdict

from kprism import events as EV
from kprism.errors import TraceError
from kprism.types import NS_PER_S, SATURATE_MAX, MetricSample

_SCHED_KINDS = (
    EV.SCHED_SWITCH_OUT,
    EV.SCHED_SWITCH_IN,
    EV.SCHED_WAKEUP,
    EV.THREAD_EXIT,
)

_SOCKET_KINDS = ("socket_inet", "socket_inet6", "socket_unix")


def _overlaps(a: int, b: int):
    """Yield (interval, overlap_ns) for span [a, b) against the 1 s grid."""
    if a >= b:
        return
    k = a // NS_PER_S
    last = (b - 1) // NS_PER_S
    while k <= last:
        lo = max(a, k * NS_PER_S)
        hi = min(b, (k + 1) * NS_PER_S)
        yield k, hi - lo
        k += 1


class _Acc:
    def __init__(self):
        self.data = defaultdict(int)

    def add(self, iv, tgid, tid, metric, res, value):
        if value > 0:
            key = (iv, tgid, tid, metric, res)
            self.data[key] = min(self.data[key] + value, SATURATE_MAX)

    def span(self, tgid, tid, metric, res, a, b):
        for iv, d in _overlaps(a, b):
            self.add(iv, tgid, tid, metric, res, d)


def _epoll_snapshots(events):
    """Interest set (sorted tuple of file BRIs) at each epoll_wait_enter.

    Walks the global stream once, mutating shadow sets per epoll address.
    Returns {event index: (epoll hex, snapshot)}.
    """
    sets: dict[int, set] = {}
    snaps = {}
    for i, ev in enumerate(events):
        kind = ev.get("kind")
        if kind == EV.EPOLL_INSERT:
            sets.setdefault(ev["eaddr"], set()).add(f"{ev['dev']}_{ev['ino']}")
        elif kind == EV.EPOLL_REMOVE:
            s = sets.get(ev["eaddr"])
            if s is not None:
                s.discard(f"{ev['dev']}_{ev['ino']}")
        elif kind == EV.EPOLL_WAIT_ENTER:
            snaps[i] = (
                f"{ev['eaddr']:x}",
                tuple(sorted(sets.get(ev["eaddr"], ()))),
            )
    return snaps


def _drop_out_of_order(indexed):
    """Mirror the engine's per-tid drop rule (thread_exit resets the clock)."""
    kept = []
    last = None
    for item in indexed:
        t = item[1]["t"]
        if last is not None and t < last:
            continue
        kept.append(item)
        last = None if item[1]["kind"] == EV.THREAD_EXIT else t
    return kept


def oracle_accumulate(events: list[dict], duration_s: int) -> list[MetricSample]:
    """Accumulate a full trace naively; returns canonically sorted samples."""
    end = duration_s * NS_PER_S
    acc = _Acc()
    snaps = _epoll_snapshots(events)

    per_tid: dict[int, list] = defaultdict(list)
    for i, ev in enumerate(events):
        kind = ev.get("kind")
        if kind not in EV.ALL_KINDS:
            raise TraceError(f"event {i}: unknown kind {kind!r}")
        if kind == EV.BLOCK_REQUEST:
            acc.add(
                ev["t"] // NS_PER_S,
                ev["tgid"],
                ev["tid"],
                "sector_count",
                f"{ev['major']}:{ev['minor']}",
                ev["sectors"],
            )
        elif kind not in (EV.EPOLL_INSERT, EV.EPOLL_REMOVE):
            per_tid[ev["tid"]].append((i, ev))

    for tid, items in per_tid.items():
        items = _drop_out_of_order(items)
        _accumulate_thread(acc, tid, items, snaps, end)

    out = [MetricSample(*key, value) for key, value in acc.data.items()]
    out.sort(key=lambda s: (s.interval_s, s.tgid, s.tid, s.metric, s.resource or ""))
    return out


def _accumulate_thread(acc, tid, items, snaps, end):
    state = "unknown"
    since = 0
    iowait = False
    call = None  # (class, start, detail)

    def close_state(t):
        nonlocal since
        if state == "running":
            acc.span(tgid, tid, "runtime", None, since, t)
        elif state == "runnable":
            acc.span(tgid, tid, "rq_time", None, since, t)
        elif state == "sleep_int":
            acc.span(tgid, tid, "sleep_time", None, since, t)
        elif state == "sleep_unint":
            acc.span(tgid, tid, "block_time", None, since, t)
            if iowait:
                acc.span(tgid, tid, "iowait_time", None, since, t)
        since = t

    def finish_wait(metric, count_metric, res, start, t):
        acc.span(tgid, tid, metric, res, start, t)
        acc.add(t // NS_PER_S, tgid, tid, count_metric, res, 1)

    tgid = items[0][1]["tgid"] if items else 0
    for i, ev in items:
        t = ev["t"]
        kind = ev["kind"]
        tgid = ev["tgid"]

        if kind in _SCHED_KINDS:
            close_state(t)
            if kind == EV.SCHED_SWITCH_OUT:
                prev = ev["prev_state"]
                if prev == EV.STATE_RUNNABLE:
                    state, iowait = "runnable", False
                elif prev == EV.STATE_INTERRUPTIBLE:
                    state, iowait = "sleep_int", False
                elif prev == EV.STATE_UNINTERRUPTIBLE:
                    state, iowait = "sleep_unint", bool(ev.get("iowait", False))
                else:
                    raise TraceError(f"event {i}: unknown prev_state {prev!r}")
            elif kind == EV.SCHED_WAKEUP:
                if state in ("sleep_int", "sleep_unint", "unknown"):
                    state, iowait = "runnable", False
            elif kind == EV.SCHED_SWITCH_IN:
                state, iowait = "running", False
            else:  # thread_exit
                state, iowait = "unknown", False
                call = None
            continue

        if kind == EV.FIFO_IO_ENTER:
            call = _replace(call, acc, ("pipe", t, f"{ev['dev']}_{ev['ino']}"))
        elif kind == EV.FIFO_IO_EXIT:
            if call and call[0] == "pipe":
                finish_wait("pipe_wait_time", "pipe_wait_count", call[2], call[1], t)
                call = None
            elif call and call[0] == "ignored":
                call = None
        elif kind in (EV.SOCK_RECV_ENTER, EV.SOCK_SEND_ENTER):
            if ev.get("family") in ("inet", "inet6", "unix"):
                call = _replace(call, acc, ("sock", t, f"{ev['dev']}_{ev['ino']}"))
            else:
                call = _replace(call, acc, ("ignored", t, None))
        elif kind in (EV.SOCK_RECV_EXIT, EV.SOCK_SEND_EXIT):
            if call and call[0] == "sock":
                finish_wait(
                    "socket_wait_time", "socket_wait_count", call[2], call[1], t
                )
                call = None
            elif call and call[0] == "ignored":
                call = None
        elif kind == EV.FUTEX_ENTER:
            cls = EV.classify_futex_op(ev["op"])
            res = f"{tgid}:0x{ev['uaddr']:x}"
            if cls == EV.OP_WAIT:
                call = _replace(call, acc, ("futex_wait", t, res))
            elif cls == EV.OP_WAKE:
                call = _replace(call, acc, ("futex_wake", t, res))
            else:
                call = _replace(call, acc, ("ignored", t, None))
        elif kind == EV.FUTEX_EXIT:
            if call and call[0] == "futex_wait":
                finish_wait("futex_wait_time", "futex_wait_count", call[2], call[1], t)
                call = None
            elif call and call[0] == "futex_wake":
                if ev.get("ret", 0) >= 1:
                    acc.add(t // NS_PER_S, tgid, tid, "futex_wake_count", call[2], 1)
                call = None
            elif call and call[0] == "ignored":
                call = None
        elif kind == EV.POLLFAM_ENTER:
            call = _replace(call, acc, ("poll", t, None))
        elif kind == EV.POLLFAM_EXIT:
            if not ev.get("fds"):
                raise TraceError(f"event {i}: pollfam_exit with empty fd list")
            if call and call[0] == "poll":
                for fd in ev["fds"]:
                    res = f"{fd['dev']}_{fd['ino']}"
                    if fd["kind"] == "pipe":
                        finish_wait(
                            "pipe_wait_time", "pipe_wait_count", res, call[1], t
                        )
                    elif fd["kind"] in _SOCKET_KINDS:
                        finish_wait(
                            "socket_wait_time", "socket_wait_count", res, call[1], t
                        )
                call = None
            elif call and call[0] == "ignored":
                call = None
        elif kind == EV.EPOLL_WAIT_ENTER:
            ehex, snapshot = snaps[i]
            call = _replace(call, acc, ("epoll", t, (ehex, snapshot)))
        elif kind == EV.EPOLL_WAIT_EXIT:
            if call and call[0] == "epoll":
                ehex, snapshot = call[2]
                finish_wait("epoll_wait_time", "epoll_wait_count", ehex, call[1], t)
                for fres in snapshot:
                    acc.span(
                        tgid, tid, "epoll_file_wait", f"{ehex}→{fres}", call[1], t
                    )
                call = None
            elif call and call[0] == "ignored":
                call = None

    # trailing open spans accrue to the final flushed boundary
    close_state(end)
    if call is not None:
        cls, start, detail = call
        if cls == "pipe":
            acc.span(tgid, tid, "pipe_wait_time", detail, start, end)
        elif cls == "sock":
            acc.span(tgid, tid, "socket_wait_time", detail, start, end)
        elif cls == "futex_wait":
            acc.span(tgid, tid, "futex_wait_time", detail, start, end)
        elif cls == "epoll":
            ehex, snapshot = detail
            acc.span(tgid, tid, "epoll_wait_time", ehex, start, end)
            for fres in snapshot:
                acc.span(tgid, tid, "epoll_file_wait", f"{ehex}→{fres}", start, end)


def _replace(call, acc, new_call):
    # nested enter without exit: the stale pending call is discarded
    return new_call
