"""Randomized scenario generator with ground-truth labels.

Each scenario builds an internally consistent trace: scheduler spans tile
every thread's timeline, blocking calls nest inside off-CPU spans, and the
scenario-specific signal (lock wait ramp, disk-share shift, runqueue ramp,
upstream stall) is injected with bounded seed-controlled jitter (±10% span
jitter) so correlation analysis is nontrivial but deterministic.

Ground truth is the set of (tgid, tid, metric, resource) series that shift
with the KPI by construction.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from kprism import events as EV
from kprism.errors import ConfigError
from kprism.types import NS_PER_S
from .traces import TRACE_VERSION, TraceHeader

MS = 1_000_000  # ns per millisecond

SCENARIO_KINDS = (
    "lock_contention",
    "disk_contention",
    "cpu_contention",
    "external_dependency",
    "idle",
    "random",
)


@dataclass
class ScenarioSpec:
    kind: str
    threads: int
    duration_s: int
    seed: int

    def __post_init__(self):
        if self.kind not in SCENARIO_KINDS:
            raise ConfigError(f"unknown scenario {self.kind!r}")
        if self.threads < 1:
            raise ConfigError("scenario needs at least 1 thread")
        if self.kind in ("lock_contention", "external_dependency") and self.threads < 2:
            raise ConfigError(f"{self.kind} needs at least 2 threads")
        if self.duration_s < 2:
            raise ConfigError("scenario duration must be >= 2 s")


@dataclass
class GeneratedScenario:
    header: TraceHeader
    events: list
    kpi: list  # (second, value)
    ground_truth: frozenset = field(default_factory=frozenset)


class _Thread:
    """Per-thread event script with a monotonic time cursor."""

    def __init__(self, tgid: int, tid: int):
        self.tgid = tgid
        self.tid = tid
        self.t = 0
        self.events: list[dict] = []

    def ev(self, kind, t, **payload):
        t = int(t)
        if t < self.t:
            raise AssertionError(f"tid {self.tid}: cursor moved backwards")
        self.t = t
        rec = {"t": t, "kind": kind, "tgid": self.tgid, "tid": self.tid}
        rec.update(payload)
        self.events.append(rec)

    def start_running(self, t=0):
        self.ev(EV.SCHED_SWITCH_IN, t)

    def blocked(
        self,
        t0,
        dur,
        enter=None,
        enter_payload=None,
        exit=None,
        exit_payload=None,
        sleep_state=EV.STATE_INTERRUPTIBLE,
        iowait=False,
        rq_delay=0,
    ):
        """A blocking call: enter, sleep for dur, wake, run again, exit.

        Returns the time at which the thread is running again.
        """
        if enter:
            self.ev(enter, t0, **(enter_payload or {}))
        self.ev(EV.SCHED_SWITCH_OUT, t0, prev_state=sleep_state, iowait=iowait)
        t1 = t0 + int(dur)
        self.ev(EV.SCHED_WAKEUP, t1)
        t2 = t1 + int(rq_delay)
        self.ev(EV.SCHED_SWITCH_IN, t2)
        if exit:
            self.ev(exit, t2, **(exit_payload or {}))
        return t2


def _jit(rng, ns):
    return int(ns * rng.uniform(0.9, 1.1))


def _merge(threads):
    evs = []
    for th in threads:
        evs.extend(th.events)
    evs.sort(key=lambda e: e["t"])
    return evs


def _inet_sock(dev, ino, src, sport, dst, dport):
    return {
        "dev": dev,
        "ino": ino,
        "family": "inet",
        "src": f"{src}:{sport}",
        "dst": f"{dst}:{dport}",
        "proto": 6,
    }


def generate_scenario(spec: ScenarioSpec) -> GeneratedScenario:
    rng = random.Random(spec.seed)
    builder = _BUILDERS[spec.kind]
    events, kpi, truth = builder(spec, rng)
    header = TraceHeader(
        version=TRACE_VERSION,
        scenario=spec.kind,
        seed=spec.seed,
        duration_s=spec.duration_s,
    )
    return GeneratedScenario(header, events, kpi, frozenset(truth))


def _ramp(s, duration, lo, hi):
    return lo + (hi - lo) * (s / max(duration - 1, 1))


# -- scenarios ----------------------------------------------------------------


def _lock_contention(spec, rng):
    d = spec.duration_s
    tgid = 1000
    uaddr = 0x76D594012F30
    futex_res = f"{tgid}:0x{uaddr:x}"
    holder = _Thread(tgid, 1001)
    holder.start_running()
    waiters = [_Thread(tgid, 1001 + i) for i in range(1, spec.threads)]
    truth = set()

    for w in waiters:
        w.start_running()
        for s in range(d):
            base = s * NS_PER_S
            t = w.blocked(
                base,
                _jit(rng, 20 * MS),
                enter=EV.SOCK_RECV_ENTER,
                enter_payload=_inet_sock(
                    8, 5000 + w.tid, "10.0.0.1", 8080, "10.0.1.1", 40000 + w.tid
                ),
                exit=EV.SOCK_RECV_EXIT,
            )
            t += 5 * MS
            wait_ns = _jit(rng, _ramp(s, d, 0.0, 0.7) * NS_PER_S)
            w.blocked(
                t,
                wait_ns,
                enter=EV.FUTEX_ENTER,
                enter_payload={"op": 128, "uaddr": uaddr},
                exit=EV.FUTEX_EXIT,
                exit_payload={"ret": 0},
            )
        truth.update(
            {
                (tgid, w.tid, "futex_wait_time", futex_res),
                (tgid, w.tid, "sleep_time", None),
                (tgid, w.tid, "runtime", None),
            }
        )

    for s in range(d):
        base = s * NS_PER_S
        for i in range(4):
            t = base + (i + 1) * 50 * MS
            holder.ev(EV.FUTEX_ENTER, t, op=129, uaddr=uaddr)
            holder.ev(EV.FUTEX_EXIT, t + 10_000, ret=1 if i < 3 else 0)

    kpi = [
        (s, round(5.0 + _ramp(s, d, 0.0, 95.0) + rng.gauss(0.0, 2.0), 6))
        for s in range(d)
    ]
    return _merge([holder] + waiters), kpi, truth


def _external_dependency(spec, rng):
    d = spec.duration_s
    webui_tgid, peer_tgid = 2000, 3000
    upstream_res = "8_7010"
    entry = _Thread(webui_tgid, 2001)
    workers = [_Thread(webui_tgid, 2001 + i) for i in range(1, spec.threads)]
    peer = _Thread(peer_tgid, 3001)
    truth = {
        (webui_tgid, 2001, "socket_wait_time", upstream_res),
        (webui_tgid, 2001, "sleep_time", None),
        (webui_tgid, 2001, "runtime", None),
        (peer_tgid, 3001, "block_time", None),
        (peer_tgid, 3001, "iowait_time", None),
        (peer_tgid, 3001, "runtime", None),
    }

    entry.start_running()
    peer.start_running()
    for th in workers:
        th.start_running()

    for s in range(d):
        base = s * NS_PER_S
        stall = _ramp(s, d, 0.05, 0.85)

        t = entry.blocked(
            base,
            _jit(rng, 30 * MS),
            enter=EV.SOCK_RECV_ENTER,
            enter_payload=_inet_sock(8, 7001, "10.0.0.1", 8080, "10.0.9.9", 50000),
            exit=EV.SOCK_RECV_EXIT,
        )
        t += 5 * MS
        entry.blocked(
            t,
            _jit(rng, stall * NS_PER_S),
            enter=EV.SOCK_RECV_ENTER,
            enter_payload=_inet_sock(8, 7010, "10.0.0.1", 43000, "10.0.0.2", 9000),
            exit=EV.SOCK_RECV_EXIT,
        )

        t = peer.blocked(
            base,
            _jit(rng, 20 * MS),
            enter=EV.SOCK_RECV_ENTER,
            enter_payload=_inet_sock(9, 8010, "10.0.0.2", 9000, "10.0.0.1", 43000),
            exit=EV.SOCK_RECV_EXIT,
        )
        t += 5 * MS
        peer.blocked(
            t,
            _jit(rng, 0.9 * stall * NS_PER_S),
            sleep_state=EV.STATE_UNINTERRUPTIBLE,
            iowait=True,
        )

        for th in workers:
            th.blocked(
                base,
                _jit(rng, 15 * MS),
                enter=EV.SOCK_RECV_ENTER,
                enter_payload=_inet_sock(
                    8, 7100 + th.tid, "10.0.0.1", 8080, "10.0.9.8", 50000 + th.tid
                ),
                exit=EV.SOCK_RECV_EXIT,
            )

    kpi = [
        (s, round(10.0 + _ramp(s, d, 0.0, 900.0) + rng.gauss(0.0, 15.0), 6))
        for s in range(d)
    ]
    return _merge([entry, peer] + workers), kpi, truth


def _cpu_contention(spec, rng):
    d = spec.duration_s
    tgid = 5000
    window = d // 2
    threads = [_Thread(tgid, 5001 + i) for i in range(spec.threads)]
    truth = set()
    for th in threads:
        th.start_running()
        for s in range(d):
            base = s * NS_PER_S
            t = th.blocked(
                base,
                _jit(rng, 10 * MS),
                enter=EV.SOCK_RECV_ENTER,
                enter_payload=_inet_sock(
                    8, 6000 + th.tid, "10.0.0.1", 8080, "10.0.2.2", 41000 + th.tid
                ),
                exit=EV.SOCK_RECV_EXIT,
            )
            if s >= window:
                rq = _jit(rng, _ramp(s - window, d - window, 0.05, 0.6) * NS_PER_S)
                th.ev(EV.SCHED_SWITCH_OUT, t + 5 * MS, prev_state=EV.STATE_RUNNABLE)
                th.ev(EV.SCHED_SWITCH_IN, t + 5 * MS + rq)
        truth.update(
            {(tgid, th.tid, "rq_time", None), (tgid, th.tid, "runtime", None)}
        )
    kpi = [
        (
            s,
            round(
                2.0
                + (_ramp(s - window, d - window, 10.0, 120.0) if s >= window else 0.0)
                + rng.gauss(0.0, 1.0),
                6,
            ),
        )
        for s in range(d)
    ]
    return _merge(threads), kpi, truth


def _disk_contention(spec, rng):
    d = spec.duration_s
    tgid, other_tgid = 6000, 6100
    dev_res = (259, 0)
    half = d // 2
    writers = [_Thread(tgid, 6001 + i) for i in range(spec.threads)]
    interferer = _Thread(other_tgid, 6101)
    interferer.start_running()

    # sectors per second: target 80 -> 34, co-located 20 -> 66 (share 0.80 -> 0.34)
    sectors_by_thread = {th.tid: [0] * d for th in writers}
    for s in range(d):
        base = s * NS_PER_S
        target_reqs = 40 if s < half else 17
        other_reqs = 10 if s < half else 33
        for i in range(target_reqs):
            th = writers[i % len(writers)]
            th.ev(
                EV.BLOCK_REQUEST,
                base + 400 * MS + i * 100_000,
                major=dev_res[0],
                minor=dev_res[1],
                sectors=2,
            )
            sectors_by_thread[th.tid][s] += 2
        for i in range(other_reqs):
            interferer.ev(
                EV.BLOCK_REQUEST,
                base + 400 * MS + i * 100_000,
                major=dev_res[0],
                minor=dev_res[1],
                sectors=2,
            )

    # block requests above interleave with the sched script below per thread,
    # so build sched events on fresh scripts and merge.
    sched = []
    for th in writers:
        s_th = _Thread(tgid, th.tid)
        s_th.start_running()
        for s in range(d):
            base = s * NS_PER_S
            t = s_th.blocked(
                base,
                _jit(rng, 10 * MS),
                enter=EV.SOCK_RECV_ENTER,
                enter_payload=_inet_sock(
                    8, 6500 + th.tid, "10.0.0.1", 3306, "10.0.3.3", 42000 + th.tid
                ),
                exit=EV.SOCK_RECV_EXIT,
            )
            if th.tid == 6001:
                iow = _jit(rng, (0.1 if s < half else 0.5) * NS_PER_S)
                s_th.blocked(
                    t + 5 * MS,
                    iow,
                    sleep_state=EV.STATE_UNINTERRUPTIBLE,
                    iowait=True,
                )
        sched.append(s_th)

    truth = {
        (tgid, 6001, "iowait_time", None),
        (tgid, 6001, "block_time", None),
        (tgid, 6001, "runtime", None),
    }
    res = f"{dev_res[0]}:{dev_res[1]}"
    for tid, series in sectors_by_thread.items():
        if len(set(series)) > 1:
            truth.add((tgid, tid, "sector_count", res))

    kpi = [
        (s, round((10.0 if s < half else 100.0) + rng.gauss(0.0, 2.0), 6))
        for s in range(d)
    ]
    return _merge(writers + sched + [interferer]), kpi, truth


def _idle(spec, rng):
    tgid = 7000
    threads = []
    for i in range(spec.threads):
        th = _Thread(tgid, 7001 + i)
        th.ev(EV.SCHED_SWITCH_OUT, 0, prev_state=EV.STATE_INTERRUPTIBLE)
        threads.append(th)
    kpi = [(s, 1.0) for s in range(spec.duration_s)]
    return _merge(threads), kpi, set()


def _random(spec, rng):
    d = spec.duration_s
    tgid = 9000
    end = d * NS_PER_S
    threads = []
    for i in range(spec.threads):
        th = _Thread(tgid, 9001 + i)
        start = 0 if rng.random() < 0.7 else rng.randrange(0, end // 2)
        th.start_running(start)
        exits = rng.random() < 0.3
        stop = end - rng.randrange(1, NS_PER_S) if exits else end
        epoll_addr = 0xFFFF9A7A00000000 + th.tid
        registered: list[tuple[int, int]] = []
        margin = 2 * MS
        while th.t < stop - margin:
            t = th.t
            budget = stop - margin - t
            action = rng.choice(
                (
                    "run",
                    "run",
                    "sleep",
                    "pipe",
                    "sock",
                    "futex_wait",
                    "futex_wake",
                    "poll",
                    "epoll",
                    "block",
                )
            )
            if action == "run":
                th.t = t + min(rng.randrange(1 * MS, 80 * MS), budget)
            elif action == "sleep":
                dur = min(rng.randrange(10 * MS, 300 * MS), budget)
                unint = rng.random() < 0.4
                th.blocked(
                    t,
                    dur,
                    sleep_state=EV.STATE_UNINTERRUPTIBLE
                    if unint
                    else EV.STATE_INTERRUPTIBLE,
                    iowait=unint and rng.random() < 0.5,
                    rq_delay=min(rng.randrange(0, 10 * MS), max(budget - dur, 0)),
                )
            elif action == "pipe":
                dur = 0 if rng.random() < 0.1 else min(
                    rng.randrange(1 * MS, 400 * MS), budget
                )
                ino = 2159680 + rng.randrange(4)
                th.blocked(
                    t,
                    dur,
                    enter=EV.FIFO_IO_ENTER,
                    enter_payload={"dev": 14, "ino": ino},
                    exit=EV.FIFO_IO_EXIT,
                )
            elif action == "sock":
                dur = min(rng.randrange(1 * MS, 400 * MS), budget)
                if rng.random() < 0.1:
                    payload = {"dev": 8, "ino": 7200, "family": "netlink"}
                elif rng.random() < 0.3:
                    payload = {
                        "dev": 8,
                        "ino": 7300 + rng.randrange(3),
                        "family": "unix",
                        "path": "/run/app.sock",
                    }
                else:
                    payload = _inet_sock(
                        8,
                        7100 + rng.randrange(4),
                        "10.0.0.1",
                        8080,
                        "10.0.4.4",
                        45000 + th.tid,
                    )
                recv = rng.random() < 0.7
                th.blocked(
                    t,
                    dur,
                    enter=EV.SOCK_RECV_ENTER if recv else EV.SOCK_SEND_ENTER,
                    enter_payload=payload,
                    exit=EV.SOCK_RECV_EXIT if recv else EV.SOCK_SEND_EXIT,
                )
            elif action == "futex_wait":
                dur = min(rng.randrange(0, 1500 * MS), budget)
                op = rng.choice((0, 128, 128 | 256, 9, 5))  # incl. one "other" op
                th.blocked(
                    t,
                    dur,
                    enter=EV.FUTEX_ENTER,
                    enter_payload={
                        "op": op,
                        "uaddr": 0x7F0000C000 + 8 * rng.randrange(3),
                    },
                    exit=EV.FUTEX_EXIT,
                    exit_payload={"ret": rng.choice((0, -110))},
                )
            elif action == "futex_wake":
                th.ev(
                    EV.FUTEX_ENTER,
                    t,
                    op=rng.choice((1, 129, 10)),
                    uaddr=0x7F0000C000 + 8 * rng.randrange(3),
                )
                th.ev(EV.FUTEX_EXIT, t + 10_000, ret=rng.choice((0, 1, 2)))
            elif action == "poll":
                dur = min(rng.randrange(1 * MS, 1200 * MS), budget)
                fds = []
                for _ in range(rng.randrange(1, 4)):
                    kind = rng.choice(("pipe", "socket_inet", "regular_file"))
                    fds.append(
                        {"kind": kind, "dev": 14, "ino": 2159690 + rng.randrange(5)}
                    )
                th.blocked(
                    t,
                    dur,
                    enter=EV.POLLFAM_ENTER,
                    exit=EV.POLLFAM_EXIT,
                    exit_payload={"fds": fds},
                )
            elif action == "epoll":
                roll = rng.random()
                if roll < 0.35 or not registered:
                    fd = (8, 7400 + rng.randrange(6))
                    if fd not in registered:
                        registered.append(fd)
                        th.ev(
                            EV.EPOLL_INSERT,
                            t,
                            eaddr=epoll_addr,
                            dev=fd[0],
                            ino=fd[1],
                        )
                elif roll < 0.5:
                    fd = registered.pop(rng.randrange(len(registered)))
                    th.ev(EV.EPOLL_REMOVE, t, eaddr=epoll_addr, dev=fd[0], ino=fd[1])
                else:
                    dur = min(rng.randrange(1 * MS, 900 * MS), budget)
                    th.blocked(
                        t,
                        dur,
                        enter=EV.EPOLL_WAIT_ENTER,
                        enter_payload={"eaddr": epoll_addr},
                        exit=EV.EPOLL_WAIT_EXIT,
                    )
            elif action == "block":
                th.ev(
                    EV.BLOCK_REQUEST,
                    t,
                    major=259,
                    minor=rng.randrange(2),
                    sectors=rng.choice((0, 8, 16, 64)),
                )
                th.t = t + 1 * MS
        if exits:
            th.ev(EV.THREAD_EXIT, stop)
        threads.append(th)

    kpi = [(s, round(10.0 + rng.gauss(0.0, 1.0), 6)) for s in range(d)]
    return _merge(threads), kpi, set()


_BUILDERS = {
    "lock_contention": _lock_contention,
    "disk_contention": _disk_contention,
    "cpu_contention": _cpu_contention,
    "external_dependency": _external_dependency,
    "idle": _idle,
    "random": _random,
}
