"""Property tests over generated traces and engine arithmetic."""

from collections import defaultdict

from hypothesis import given, settings, strategies as st

from kprism import events as EV
from kprism.metrics_core import MetricsEngine
from kprism.trace_replay import (
    ScenarioSpec,
    generate_scenario,
    oracle_accumulate,
    replay_events,
)
from kprism.types import NS_PER_S

SCHED = ("runtime", "rq_time", "sleep_time", "block_time")


def _coverage(events, duration_s):
    """(tid, interval) pairs where the thread existed for the whole second."""
    first = {}
    gone_at = {}
    for ev in events:
        first.setdefault(ev["tid"], ev["t"])
        if ev["kind"] == EV.THREAD_EXIT:
            gone_at.setdefault(ev["tid"], ev["t"])
    covered = set()
    for tid, t0 in first.items():
        t_end = gone_at.get(tid, duration_s * NS_PER_S)
        for iv in range(duration_s):
            if t0 <= iv * NS_PER_S and t_end >= (iv + 1) * NS_PER_S:
                covered.add((tid, iv))
    return covered


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(0, 10**6),
    kind=st.sampled_from(
        ["random", "lock_contention", "cpu_contention", "external_dependency"]
    ),
)
def test_conservation_and_iowait_bound(seed, kind):
    spec = ScenarioSpec(kind=kind, threads=3, duration_s=4, seed=seed)
    sc = generate_scenario(spec)
    samples, _, _, _ = replay_events(sc.events, spec.duration_s)
    sched = defaultdict(int)
    iowait = defaultdict(int)
    block = defaultdict(int)
    for s in samples:
        if s.metric in SCHED:
            sched[(s.tid, s.interval_s)] += s.value
        if s.metric == "iowait_time":
            iowait[(s.tid, s.interval_s)] += s.value
        if s.metric == "block_time":
            block[(s.tid, s.interval_s)] += s.value
    for key in _coverage(sc.events, spec.duration_s):
        assert abs(sched[key] - NS_PER_S) <= 1000  # 1 µs
    for key, v in iowait.items():
        assert v <= block[key]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_oracle_equivalence_property(seed):
    sc = generate_scenario(ScenarioSpec("random", threads=3, duration_s=3, seed=seed))
    samples, _, _, _ = replay_events(sc.events, 3)
    assert sorted(samples) == sorted(oracle_accumulate(sc.events, 3))


@settings(max_examples=50, deadline=None)
@given(
    start=st.integers(0, 5 * NS_PER_S),
    length=st.integers(1, 3 * NS_PER_S),
)
def test_span_splitting_preserves_total(start, length):
    engine = MetricsEngine()
    engine.feed({"t": start, "kind": EV.SCHED_SWITCH_IN, "tgid": 1, "tid": 2})
    engine.feed(
        {
            "t": start + length,
            "kind": EV.THREAD_EXIT,
            "tgid": 1,
            "tid": 2,
        }
    )
    total = 0
    for iv in range(((start + length) // NS_PER_S) + 1):
        for s in engine.flush(iv):
            assert s.metric == "runtime"
            assert 0 < s.value <= NS_PER_S
            assert s.interval_s == iv
            total += s.value
    assert total == length


@settings(max_examples=100, deadline=None)
@given(op=st.integers(0, 13), flags=st.sampled_from([0, 128, 256, 384]))
def test_futex_classification_ignores_flag_bits(op, flags):
    assert EV.classify_futex_op(op | flags) == EV.classify_futex_op(op)
