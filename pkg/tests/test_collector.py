"""Collection sessions: scoping, snapshot differencing, lossy handling."""

import io

import pytest

from kprism.collector import Session, SessionConfig
from kprism.collector.sources import FakeKernelSource, FileKernelSource, LiveKernelSource
from kprism.collector.store import read_store
from kprism.errors import ConfigError, KprismError, ProbeUnavailableError


def rec(tgid, tid, metric, val, res=None, comm=""):
    return {"tgid": tgid, "tid": tid, "comm": comm, "metric": metric, "res": res, "val": val}


def cfg(**kw):
    base = dict(target_tgid=100, duration_s=3, output_path="out.jsonl")
    base.update(kw)
    return SessionConfig(**base)


# -- configuration ------------------------------------------------------------


def test_config_requires_exactly_one_target():
    with pytest.raises(ConfigError):
        cfg(target_tgid=None).validate()
    with pytest.raises(ConfigError):
        cfg(target_comm="mysqld").validate()
    cfg().validate()
    cfg(target_tgid=None, target_comm="mysqld").validate()


def test_config_rejects_bad_duration_interval_policy():
    with pytest.raises(ConfigError):
        cfg(duration_s=0).validate()
    with pytest.raises(ConfigError):
        cfg(interval_s=2).validate()
    with pytest.raises(ConfigError):
        cfg(lossy_policy="drop").validate()


def test_comm_target_must_resolve():
    session = Session(
        cfg(target_tgid=None, target_comm="nope"),
        FakeKernelSource([]),
        resolver=lambda comm: set(),
    )
    with pytest.raises(ConfigError, match="not found"):
        session.start()


# -- differencing -------------------------------------------------------------


def test_cumulative_counters_are_differenced():
    source = FakeKernelSource(
        [
            {"records": [rec(100, 101, "runtime", 500)]},
            {"records": [rec(100, 101, "runtime", 1200)]},
            {"records": [rec(100, 101, "runtime", 1200)]},  # no growth -> no record
        ]
    )
    session = Session(cfg(), source)
    session.start()
    vals = []
    for idx in range(3):
        records, _ = session.tick(idx, idx)
        vals.append([(r.iv, r.val) for r in records])
    assert vals == [[(0, 500)], [(1, 700)], []]


def test_backwards_counter_clamped():
    source = FakeKernelSource(
        [
            {"records": [rec(100, 101, "runtime", 500)]},
            {"records": [rec(100, 101, "runtime", 300)]},  # probe restart
        ]
    )
    session = Session(cfg(), source)
    session.start()
    session.tick(0, 0)
    records, _ = session.tick(1, 1)
    assert [(r.iv, r.val) for r in records] == [(1, 300)]


# -- scoping ------------------------------------------------------------------


def test_non_member_threads_filtered_sector_count_global():
    source = FakeKernelSource(
        [
            {
                "records": [
                    rec(100, 101, "runtime", 5),
                    rec(999, 991, "runtime", 7),  # out of scope
                    rec(999, 991, "sector_count", 8, res="259:0"),  # global metric
                ]
            }
        ]
    )
    session = Session(cfg(), source)
    session.start()
    records, _ = session.tick(0, 0)
    assert {(r.tgid, r.metric) for r in records} == {
        (100, "runtime"),
        (999, "sector_count"),
    }


def test_socket_peer_discovery_expands_scope():
    source = FakeKernelSource(
        [
            {
                "records": [],
                "discovery": [
                    {
                        "kind": "endpoint",
                        "tgid": 100,
                        "tid": 101,
                        "res": "8_1",
                        "family": "inet",
                        "src": "10.0.0.1:43000",
                        "dst": "10.0.0.2:9000",
                    },
                    {
                        "kind": "endpoint",
                        "tgid": 200,
                        "tid": 201,
                        "res": "9_2",
                        "family": "inet",
                        "src": "10.0.0.2:9000",
                        "dst": "10.0.0.1:43000",
                    },
                ],
            },
            {"records": [rec(200, 201, "runtime", 9)]},
        ]
    )
    session = Session(cfg(), source)
    session.start()
    session.tick(0, 0)
    assert 200 in session.scope.member_tgids
    assert source.scope_updates[-1] == {100, 200}
    records, _ = session.tick(1, 1)
    assert [(r.tgid, r.val) for r in records] == [(200, 9)]


def test_pipe_peer_discovery_transitive():
    """A->B via pipe then B->C via pipe: C joins through B."""

    def pipe(tgid, res):
        return {"kind": "pipe_bri", "tgid": tgid, "res": res}

    source = FakeKernelSource(
        [
            {"records": [], "discovery": [pipe(100, "14_1"), pipe(200, "14_1")]},
            {"records": [], "discovery": [pipe(200, "14_2"), pipe(300, "14_2")]},
        ]
    )
    session = Session(cfg(), source)
    session.start()
    session.tick(0, 0)
    assert session.scope.member_tgids == {100, 200}
    session.tick(1, 1)
    assert session.scope.member_tgids == {100, 200, 300}
    reasons = {tgid: reason for _, tgid, reason in session.scope.discovery_log}
    assert reasons[200] == "pipe_peer"
    assert reasons[300] == "pipe_peer"


def test_unrelated_flows_do_not_expand_scope():
    source = FakeKernelSource(
        [
            {
                "records": [],
                "discovery": [
                    {
                        "kind": "endpoint",
                        "tgid": 300,
                        "tid": 301,
                        "res": "8_9",
                        "family": "inet",
                        "src": "10.9.9.9:1",
                        "dst": "10.9.9.8:2",
                    },
                    {
                        "kind": "endpoint",
                        "tgid": 400,
                        "tid": 401,
                        "res": "8_8",
                        "family": "inet",
                        "src": "10.9.9.8:2",
                        "dst": "10.9.9.9:1",
                    },
                ],
            }
        ]
    )
    session = Session(cfg(), source)
    session.start()
    session.tick(0, 0)
    assert session.scope.member_tgids == {100}


def test_scope_only_grows():
    session = Session(cfg(), FakeKernelSource([]))
    session.start()
    session.scope.expand(200, "pipe_peer", 1)
    assert not session.scope.expand(200, "pipe_peer", 2)
    assert session.scope.member_tgids == {100, 200}


# -- lossy intervals ----------------------------------------------------------


def test_lossy_mark_policy_marks_records():
    source = FakeKernelSource(
        [{"records": [rec(100, 101, "runtime", 5)], "lossy": True, "drops": 3}]
    )
    session = Session(cfg(lossy_policy="mark"), source)
    session.start()
    records, _ = session.tick(0, 0)
    assert records[0].lossy is True


def test_lossy_abort_policy_raises():
    source = FakeKernelSource(
        [{"records": [rec(100, 101, "runtime", 5)], "lossy": True, "drops": 3}]
    )
    session = Session(cfg(lossy_policy="abort"), source)
    session.start()
    with pytest.raises(KprismError, match="overflow"):
        session.tick(0, 0)


# -- full run with injected clocks -------------------------------------------


def test_run_writes_store(tmp_path):
    source = FakeKernelSource(
        [
            {"records": [rec(100, 101, "runtime", 500, comm="app")]},
            {"records": [rec(100, 101, "runtime", 900, comm="app")]},
        ]
    )
    session = Session(cfg(duration_s=2), source)
    tick = [0]

    def clock():
        return float(tick[0])

    def sleep(_):
        tick[0] += 1

    out = tmp_path / "m.jsonl"
    with open(out, "w") as fh:
        session.run(fh, clock=clock, sleep=sleep, wall=lambda: 1000 + tick[0])
    records, _ = read_store(out)
    assert [(r.iv, r.val, r.comm) for r in records] == [(0, 500, "app"), (1, 400, "app")]
    assert all(r.ts >= 1000 for r in records)


# -- sources ------------------------------------------------------------------


def test_file_source_replays_snapshots(tmp_path):
    path = tmp_path / "snap.jsonl"
    path.write_text(
        '{"records":[{"tgid":1,"tid":2,"metric":"runtime","val":7}],"discovery":[],"lossy":false,"drops":0}\n'
    )
    src = FileKernelSource(path)
    src.attach({1})
    snap = src.read()
    assert snap.records[0].val == 7
    assert src.read().records == []  # exhausted


def test_file_source_missing_file():
    src = FileKernelSource("/nonexistent/snap.jsonl")
    with pytest.raises(ProbeUnavailableError):
        src.attach({1})


def test_live_source_reports_missing_backend_or_privilege():
    import os

    src = LiveKernelSource()
    if os.geteuid() == 0:
        with pytest.raises(ProbeUnavailableError):
            src.attach({1})
    else:
        from kprism.errors import ProbePrivilegeError

        with pytest.raises(ProbePrivilegeError):
            src.attach({1})
