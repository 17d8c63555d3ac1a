"""Metric store wire format: fixed keys, sidecar endpoint lines, roundtrip."""

import json

import pytest

from kprism.collector.store import StoreRecord, read_store, write_store
from kprism.errors import TraceError
from kprism.types import EndpointObservation, MetricSample


def test_write_read_roundtrip(tmp_path):
    samples = [
        MetricSample(0, 10, 11, "futex_wait_time", "10:0xa0", 123456),
        MetricSample(1, 10, 11, "runtime", None, 999),
    ]
    eps = [
        EndpointObservation(10, 11, "8_7010", "inet", "1.2.3.4:5", "6.7.8.9:10", "", 6)
    ]
    path = tmp_path / "m.jsonl"
    write_store(path, samples, epoch_s=100, comms={11: "worker"}, endpoints=eps)
    records, endpoints = read_store(path)
    assert endpoints == eps
    assert [
        (r.ts, r.iv, r.tgid, r.tid, r.comm, r.metric, r.res, r.val, r.lossy)
        for r in records
    ] == [
        (100, 0, 10, 11, "worker", "futex_wait_time", "10:0xa0", 123456, False),
        (101, 1, 10, 11, "worker", "runtime", None, 999, False),
    ]


def test_sample_lines_have_fixed_keys(tmp_path):
    path = tmp_path / "m.jsonl"
    write_store(path, [MetricSample(0, 1, 2, "runtime", None, 5)])
    obj = json.loads(path.read_text().strip())
    assert set(obj) == {"ts", "iv", "tgid", "tid", "comm", "metric", "res", "val", "lossy"}


def test_epoll_pair_arrow_survives_roundtrip(tmp_path):
    res = "ffff9a7a3f5e1740→14_2159682"
    path = tmp_path / "m.jsonl"
    write_store(path, [MetricSample(0, 1, 2, "epoll_file_wait", res, 5)])
    assert "→" in path.read_text()
    records, _ = read_store(path)
    assert records[0].res == res


def test_lossy_intervals_marked(tmp_path):
    path = tmp_path / "m.jsonl"
    write_store(
        path,
        [MetricSample(0, 1, 2, "runtime", None, 5), MetricSample(1, 1, 2, "runtime", None, 5)],
        lossy_ivs={1},
    )
    records, _ = read_store(path)
    assert [r.lossy for r in records] == [False, True]


def test_bad_json_line_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"ts":0,"iv":0\n')
    with pytest.raises(TraceError):
        read_store(path)


def test_missing_key_rejected(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"ts":0,"iv":0,"tgid":1,"tid":2,"metric":"runtime"}\n')
    with pytest.raises(TraceError, match="missing key"):
        read_store(path)


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "m.jsonl"
    write_store(path, [MetricSample(0, 1, 2, "runtime", None, 5)])
    path.write_text(path.read_text() + "\n\n")
    records, _ = read_store(path)
    assert len(records) == 1
