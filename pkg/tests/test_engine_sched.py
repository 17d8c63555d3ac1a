"""Scheduler state machine: span accounting, boundary splitting, iowait."""

import pytest

from kprism import events as EV
from kprism.errors import FlushError, TraceError
from kprism.types import NS_PER_S

MS = 1_000_000


def ev(kind, t, tid=5, tgid=4, **payload):
    rec = {"t": t, "kind": kind, "tgid": tgid, "tid": tid}
    rec.update(payload)
    return rec


def as_map(samples):
    out = {}
    for s in samples:
        key = (s.interval_s, s.tgid, s.tid, s.metric, s.resource)
        out[key] = out.get(key, 0) + s.value
    return out


def test_run_then_sleep_single_interval(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(ev(EV.SCHED_SWITCH_OUT, 300 * MS, prev_state=EV.STATE_INTERRUPTIBLE))
    engine.feed(ev(EV.SCHED_WAKEUP, 700 * MS))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 800 * MS))
    m = as_map(engine.flush(0))
    assert m[(0, 4, 5, "runtime", None)] == 500 * MS
    assert m[(0, 4, 5, "sleep_time", None)] == 400 * MS
    assert m[(0, 4, 5, "rq_time", None)] == 100 * MS


def test_spans_split_at_interval_boundary(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 600 * MS))
    engine.feed(
        ev(EV.SCHED_SWITCH_OUT, 2 * NS_PER_S + 400 * MS, prev_state=EV.STATE_INTERRUPTIBLE)
    )
    m0 = as_map(engine.flush(0))
    m1 = as_map(engine.flush(1))
    m2 = as_map(engine.flush(2))
    assert m0[(0, 4, 5, "runtime", None)] == 400 * MS
    assert m1[(1, 4, 5, "runtime", None)] == NS_PER_S
    assert m2[(2, 4, 5, "runtime", None)] == 400 * MS
    assert m2[(2, 4, 5, "sleep_time", None)] == 600 * MS


def test_uninterruptible_sleep_is_block_time(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(ev(EV.SCHED_SWITCH_OUT, 100 * MS, prev_state=EV.STATE_UNINTERRUPTIBLE))
    engine.feed(ev(EV.SCHED_WAKEUP, 600 * MS))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 600 * MS))
    m = as_map(engine.flush(0))
    assert m[(0, 4, 5, "block_time", None)] == 500 * MS
    assert (0, 4, 5, "iowait_time", None) not in m


def test_iowait_flag_accrues_iowait_inside_block_time(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(
        ev(EV.SCHED_SWITCH_OUT, 100 * MS, prev_state=EV.STATE_UNINTERRUPTIBLE, iowait=True)
    )
    engine.feed(ev(EV.SCHED_WAKEUP, 900 * MS))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 900 * MS))
    m = as_map(engine.flush(0))
    assert m[(0, 4, 5, "block_time", None)] == 800 * MS
    assert m[(0, 4, 5, "iowait_time", None)] == 800 * MS


def test_preemption_switch_out_runnable(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(ev(EV.SCHED_SWITCH_OUT, 200 * MS, prev_state=EV.STATE_RUNNABLE))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 450 * MS))
    m = as_map(engine.flush(0))
    assert m[(0, 4, 5, "rq_time", None)] == 250 * MS
    assert m[(0, 4, 5, "runtime", None)] == 200 * MS + 550 * MS


def test_unknown_until_first_event(engine):
    # nothing accrues before the first sched event for a tid
    engine.feed(ev(EV.SCHED_SWITCH_IN, 700 * MS))
    m = as_map(engine.flush(0))
    assert m == {(0, 4, 5, "runtime", None): 300 * MS}


def test_open_state_accrues_at_flush_and_continues(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    m0 = as_map(engine.flush(0))
    assert m0[(0, 4, 5, "runtime", None)] == NS_PER_S
    m1 = as_map(engine.flush(1))
    assert m1[(1, 4, 5, "runtime", None)] == NS_PER_S


def test_thread_exit_stops_accounting(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(ev(EV.THREAD_EXIT, 250 * MS))
    m = as_map(engine.flush(0))
    assert m == {(0, 4, 5, "runtime", None): 250 * MS}
    assert as_map(engine.flush(1)) == {}


def test_out_of_order_event_dropped(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 500 * MS))
    engine.feed(ev(EV.SCHED_SWITCH_OUT, 400 * MS, prev_state=EV.STATE_INTERRUPTIBLE))
    assert engine.drop_count == 1
    m = as_map(engine.flush(0))
    assert m[(0, 4, 5, "runtime", None)] == 500 * MS


def test_unknown_prev_state_rejected(engine):
    with pytest.raises(TraceError):
        engine.feed(ev(EV.SCHED_SWITCH_OUT, 0, prev_state="zombie"))


def test_unknown_event_kind_rejected(engine):
    with pytest.raises(TraceError):
        engine.feed(ev("sched_tick", 0))


def test_flush_rejects_rewind(engine):
    engine.flush(0)
    engine.flush(1)
    with pytest.raises(FlushError):
        engine.flush(1)
    with pytest.raises(FlushError):
        engine.flush(0)


def test_flush_output_sorted_and_nonzero(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0, tid=9))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0, tid=2))
    samples = engine.flush(0)
    keys = [(s.interval_s, s.tgid, s.tid, s.metric, s.resource or "") for s in samples]
    assert keys == sorted(keys)
    assert all(s.value > 0 for s in samples)


def test_conservation_on_fully_covered_interval(engine):
    engine.feed(ev(EV.SCHED_SWITCH_IN, 0))
    engine.feed(ev(EV.SCHED_SWITCH_OUT, 123 * MS, prev_state=EV.STATE_RUNNABLE))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 234 * MS))
    engine.feed(
        ev(EV.SCHED_SWITCH_OUT, 456 * MS, prev_state=EV.STATE_UNINTERRUPTIBLE, iowait=True)
    )
    engine.feed(ev(EV.SCHED_WAKEUP, 789 * MS))
    engine.feed(ev(EV.SCHED_SWITCH_IN, 900 * MS))
    m = as_map(engine.flush(0))
    total = sum(
        m.get((0, 4, 5, k, None), 0)
        for k in ("runtime", "rq_time", "sleep_time", "block_time")
    )
    assert total == NS_PER_S
    assert m.get((0, 4, 5, "iowait_time", None), 0) <= m[(0, 4, 5, "block_time", None)]
