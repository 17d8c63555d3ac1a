# cython: language_level=3
# cython: boundscheck=False
"""Reference aggregation engine: raw kernel events -> per-second metrics.

Single-writer state machine.  All events of a session are fed in global
timestamp order (per-tid order is mandatory, enforced by dropping); calling
``flush(k)`` after every event with ``t < (k+1)s`` has been consumed emits the
interval's nonzero accumulators as samples.

Interval semantics:

* scheduler-state spans and pending waits with a known resource are split at
  the 1 s boundary, each fragment accruing to its own interval;
* poll/select waits only reveal their registered resources at exit, so their
  duration is split at exit time and fragments belonging to already-flushed
  intervals are emitted by the next flush;
* count metrics accrue in the interval where the call completes;
* accumulators are 64-bit and saturate.

This module is compiled with Cython when available (as
``kprism.metrics_core._engine_cy``); the interpreted copy is the fallback and
the semantics are identical by construction.
"""

from kprism import events as EV
from kprism.errors import FlushError, TraceError
from kprism.types import NS_PER_S, SATURATE_MAX, EndpointObservation, MetricSample

# scheduler states
_UNKNOWN = 0
_RUNNING = 1
_RUNNABLE = 2
_SLEEP_INT = 3
_SLEEP_UNINT = 4

_STATE_METRIC = {
    _RUNNING: "runtime",
    _RUNNABLE: "rq_time",
    _SLEEP_INT: "sleep_time",
    _SLEEP_UNINT: "block_time",
}

# pending-call classes
_P_PIPE = "pipe"
_P_SOCK = "sock"
_P_FUTEX_WAIT = "futex_wait"
_P_FUTEX_WAKE = "futex_wake"
_P_POLL = "poll"
_P_EPOLL = "epoll"
_P_IGNORED = "ignored"


class MetricsEngine:
    """Turns a stream of raw event dicts into per-second MetricSamples."""

    def __init__(self):
        # (interval, tgid, tid, metric, res) -> value
        self._acc = {}
        # tid -> [state, since_ns, iowait]
        self._sched = {}
        # tid -> [class, start_ns, extra]
        self._pending = {}
        # tid -> last event timestamp
        self._last_t = {}
        # tid -> tgid (as last seen)
        self._tgid = {}
        # epoll object addr -> set of registered file BRI renderings
        self._epoll_sets = {}
        self._endpoints_seen = set()
        self._endpoints_new = []
        self._last_flushed = -1
        self.drop_count = 0
        self.anomaly_count = 0
        self.ignored_count = 0

    # -- accumulation helpers -------------------------------------------------

    def _add(self, iv, tgid, tid, metric, res, value):
        if value <= 0:
            return
        key = (iv, tgid, tid, metric, res)
        cur = self._acc.get(key, 0)
        cur += value
        if cur > SATURATE_MAX:
            cur = SATURATE_MAX
        self._acc[key] = cur

    def _accrue_span(self, tgid, tid, metric, res, start, end):
        """Add [start, end) to the accumulator, split at interval boundaries."""
        while start < end:
            iv = start // NS_PER_S
            bound = (iv + 1) * NS_PER_S
            seg_end = end if end < bound else bound
            self._add(iv, tgid, tid, metric, res, seg_end - start)
            start = seg_end

    # -- scheduler ------------------------------------------------------------

    def _close_sched(self, tgid, tid, t):
        rec = self._sched.get(tid)
        if rec is None:
            rec = [_UNKNOWN, t, False]
            self._sched[tid] = rec
            return rec
        state = rec[0]
        since = rec[1]
        if state != _UNKNOWN and since < t:
            self._accrue_span(tgid, tid, _STATE_METRIC[state], None, since, t)
            if state == _SLEEP_UNINT and rec[2]:
                self._accrue_span(tgid, tid, "iowait_time", None, since, t)
        rec[1] = t
        return rec

    # -- pending-call helpers -------------------------------------------------

    def _begin_call(self, tid, cls, t, extra):
        if tid in self._pending:
            self.anomaly_count += 1
        self._pending[tid] = [cls, t, extra]

    def _take_call(self, tid, cls):
        """Pop the pending call if it matches ``cls``; count anomalies."""
        rec = self._pending.get(tid)
        if rec is None:
            self.anomaly_count += 1
            return None
        if rec[0] == _P_IGNORED:
            del self._pending[tid]
            return None
        if rec[0] != cls:
            self.anomaly_count += 1
            return None
        del self._pending[tid]
        return rec

    # -- event intake ---------------------------------------------------------

    def feed(self, ev):
        t = ev["t"]
        kind = ev["kind"]
        tid = ev["tid"]
        tgid = ev["tgid"]
        last = self._last_t.get(tid)
        if last is not None and t < last:
            self.drop_count += 1
            return
        self._last_t[tid] = t
        self._tgid[tid] = tgid

        if kind == EV.SCHED_SWITCH_OUT:
            rec = self._close_sched(tgid, tid, t)
            prev = ev["prev_state"]
            if prev == EV.STATE_RUNNABLE:
                rec[0] = _RUNNABLE
                rec[2] = False
            elif prev == EV.STATE_INTERRUPTIBLE:
                rec[0] = _SLEEP_INT
                rec[2] = False
            elif prev == EV.STATE_UNINTERRUPTIBLE:
                rec[0] = _SLEEP_UNINT
                rec[2] = bool(ev.get("iowait", False))
            else:
                raise TraceError(f"unknown prev_state {prev!r} at t={t}")
        elif kind == EV.SCHED_WAKEUP:
            rec = self._close_sched(tgid, tid, t)
            if rec[0] in (_SLEEP_INT, _SLEEP_UNINT, _UNKNOWN):
                rec[0] = _RUNNABLE
                rec[2] = False
        elif kind == EV.SCHED_SWITCH_IN:
            rec = self._close_sched(tgid, tid, t)
            rec[0] = _RUNNING
            rec[2] = False
        elif kind == EV.THREAD_EXIT:
            self._close_sched(tgid, tid, t)
            self._sched.pop(tid, None)
            self._pending.pop(tid, None)
            self._last_t.pop(tid, None)
        elif kind == EV.FIFO_IO_ENTER:
            res = f"{ev['dev']}_{ev['ino']}"
            self._begin_call(tid, _P_PIPE, t, res)
        elif kind == EV.FIFO_IO_EXIT:
            rec = self._take_call(tid, _P_PIPE)
            if rec is not None:
                self._accrue_span(tgid, tid, "pipe_wait_time", rec[2], rec[1], t)
                self._add(t // NS_PER_S, tgid, tid, "pipe_wait_count", rec[2], 1)
        elif kind in (EV.SOCK_RECV_ENTER, EV.SOCK_SEND_ENTER):
            family = ev.get("family", "")
            if family not in ("inet", "inet6", "unix"):
                self.ignored_count += 1
                self._begin_call(tid, _P_IGNORED, t, None)
            else:
                res = f"{ev['dev']}_{ev['ino']}"
                self._begin_call(tid, _P_SOCK, t, res)
                obs = EndpointObservation(
                    tgid,
                    tid,
                    res,
                    family,
                    ev.get("src", ""),
                    ev.get("dst", ""),
                    ev.get("path", ""),
                    ev.get("proto", 0),
                )
                if obs not in self._endpoints_seen:
                    self._endpoints_seen.add(obs)
                    self._endpoints_new.append(obs)
        elif kind in (EV.SOCK_RECV_EXIT, EV.SOCK_SEND_EXIT):
            rec = self._take_call(tid, _P_SOCK)
            if rec is not None:
                self._accrue_span(tgid, tid, "socket_wait_time", rec[2], rec[1], t)
                self._add(t // NS_PER_S, tgid, tid, "socket_wait_count", rec[2], 1)
        elif kind == EV.FUTEX_ENTER:
            cls = EV.classify_futex_op(ev["op"])
            if cls == EV.OP_WAIT:
                self._begin_call(tid, _P_FUTEX_WAIT, t, f"{tgid}:0x{ev['uaddr']:x}")
            elif cls == EV.OP_WAKE:
                self._begin_call(tid, _P_FUTEX_WAKE, t, f"{tgid}:0x{ev['uaddr']:x}")
            else:
                self.ignored_count += 1
                self._begin_call(tid, _P_IGNORED, t, None)
        elif kind == EV.FUTEX_EXIT:
            rec = self._pending.get(tid)
            if rec is None:
                self.anomaly_count += 1
            elif rec[0] == _P_FUTEX_WAIT:
                del self._pending[tid]
                # timeouts and interrupted waits count too
                self._accrue_span(tgid, tid, "futex_wait_time", rec[2], rec[1], t)
                self._add(t // NS_PER_S, tgid, tid, "futex_wait_count", rec[2], 1)
            elif rec[0] == _P_FUTEX_WAKE:
                del self._pending[tid]
                # only operations that woke at least one thread count
                if ev.get("ret", 0) >= 1:
                    self._add(t // NS_PER_S, tgid, tid, "futex_wake_count", rec[2], 1)
            elif rec[0] == _P_IGNORED:
                del self._pending[tid]
            else:
                self.anomaly_count += 1
        elif kind == EV.POLLFAM_ENTER:
            self._begin_call(tid, _P_POLL, t, None)
        elif kind == EV.POLLFAM_EXIT:
            fds = ev.get("fds")
            if not fds:
                raise TraceError(f"pollfam_exit with empty fd list at t={t}")
            rec = self._take_call(tid, _P_POLL)
            if rec is not None:
                iv_exit = t // NS_PER_S
                for fd in fds:
                    fkind = fd["kind"]
                    res = f"{fd['dev']}_{fd['ino']}"
                    if fkind == "pipe":
                        tm, cnt = "pipe_wait_time", "pipe_wait_count"
                    elif fkind in ("socket_inet", "socket_inet6", "socket_unix"):
                        tm, cnt = "socket_wait_time", "socket_wait_count"
                    else:
                        self.ignored_count += 1
                        continue
                    self._accrue_span(tgid, tid, tm, res, rec[1], t)
                    self._add(iv_exit, tgid, tid, cnt, res, 1)
        elif kind == EV.EPOLL_INSERT:
            eaddr = ev["eaddr"]
            res = f"{ev['dev']}_{ev['ino']}"
            self._epoll_sets.setdefault(eaddr, set()).add(res)
        elif kind == EV.EPOLL_REMOVE:
            eaddr = ev["eaddr"]
            res = f"{ev['dev']}_{ev['ino']}"
            regset = self._epoll_sets.get(eaddr)
            if regset is None or res not in regset:
                self.anomaly_count += 1
            else:
                regset.discard(res)
        elif kind == EV.EPOLL_WAIT_ENTER:
            eaddr = ev["eaddr"]
            ehex = f"{eaddr:x}"
            # snapshot: in-flight waits attribute to the interest list at entry
            snapshot = tuple(sorted(self._epoll_sets.get(eaddr, ())))
            self._begin_call(tid, _P_EPOLL, t, (ehex, snapshot))
        elif kind == EV.EPOLL_WAIT_EXIT:
            rec = self._take_call(tid, _P_EPOLL)
            if rec is not None:
                ehex, snapshot = rec[2]
                self._accrue_span(tgid, tid, "epoll_wait_time", ehex, rec[1], t)
                self._add(t // NS_PER_S, tgid, tid, "epoll_wait_count", ehex, 1)
                for fres in snapshot:
                    self._accrue_span(
                        tgid, tid, "epoll_file_wait", f"{ehex}→{fres}", rec[1], t
                    )
        elif kind == EV.BLOCK_REQUEST:
            sectors = ev["sectors"]
            if sectors > 0:
                res = f"{ev['major']}:{ev['minor']}"
                self._add(t // NS_PER_S, tgid, tid, "sector_count", res, sectors)
        else:
            raise TraceError(f"unknown event kind {kind!r} at t={t}")

    # -- flushing -------------------------------------------------------------

    def flush(self, interval_s):
        """Close the interval at its boundary and emit its samples.

        Returns all not-yet-emitted samples with ``interval_s <= interval_s``,
        sorted canonically.  Thread states, pending calls and epoll interest
        sets persist across flushes.
        """
        if interval_s <= self._last_flushed:
            raise FlushError(f"interval {interval_s} already flushed")
        boundary = (interval_s + 1) * NS_PER_S

        for tid, rec in self._sched.items():
            if rec[0] != _UNKNOWN and rec[1] < boundary:
                tgid = self._tgid[tid]
                self._accrue_span(tgid, tid, _STATE_METRIC[rec[0]], None, rec[1], boundary)
                if rec[0] == _SLEEP_UNINT and rec[2]:
                    self._accrue_span(tgid, tid, "iowait_time", None, rec[1], boundary)
                rec[1] = boundary

        for tid, rec in self._pending.items():
            if rec[1] >= boundary:
                continue
            tgid = self._tgid[tid]
            cls = rec[0]
            if cls == _P_PIPE:
                self._accrue_span(tgid, tid, "pipe_wait_time", rec[2], rec[1], boundary)
            elif cls == _P_SOCK:
                self._accrue_span(tgid, tid, "socket_wait_time", rec[2], rec[1], boundary)
            elif cls == _P_FUTEX_WAIT:
                self._accrue_span(tgid, tid, "futex_wait_time", rec[2], rec[1], boundary)
            elif cls == _P_EPOLL:
                ehex, snapshot = rec[2]
                self._accrue_span(tgid, tid, "epoll_wait_time", ehex, rec[1], boundary)
                for fres in snapshot:
                    self._accrue_span(
                        tgid, tid, "epoll_file_wait", f"{ehex}→{fres}", rec[1], boundary
                    )
            else:
                # poll resources are unknown until exit; wake/ignored carry no time
                continue
            rec[1] = boundary

        out = []
        emitted = []
        for key, value in self._acc.items():
            if key[0] <= interval_s:
                emitted.append(key)
                out.append(MetricSample(key[0], key[1], key[2], key[3], key[4], value))
        for key in emitted:
            del self._acc[key]
        out.sort(key=lambda s: (s.interval_s, s.tgid, s.tid, s.metric, s.resource or ""))
        self._last_flushed = interval_s
        return out

    def drain_endpoints(self):
        """Return endpoint observations recorded since the previous drain."""
        out = self._endpoints_new
        self._endpoints_new = []
        return out
