"""Overhead benchmark: latency parsing, phases, error handling."""

import contextlib
import sys

import pytest

from kprism.bench import measure_overhead, parse_latencies
from kprism.errors import ConfigError, WorkloadError

PY = sys.executable

FAKE_WORKLOAD = (
    f"{PY} -c \"print('tgid=4242'); [print(f'latency_ms=%.3f' % (1.0 + i * 0.1)) for i in range(5)]\""
)


def test_parse_latencies_ignores_noise():
    text = "starting\nlatency_ms=1.5\nnote latency_ms=9\nlatency_ms=2.25e0\n"
    assert parse_latencies(text) == [1.5, 2.25]


def test_reps_must_be_positive():
    with pytest.raises(ConfigError):
        measure_overhead("true", 0)


def test_workload_without_latency_lines_is_error():
    with pytest.raises(WorkloadError, match="no latency lines"):
        measure_overhead(f"{PY} -c 'print(1)'", 1, session_factory=lambda tgid: contextlib.nullcontext())


def test_failing_workload_is_error():
    with pytest.raises(WorkloadError, match="status"):
        measure_overhead(f"{PY} -c 'raise SystemExit(3)'", 1,
                         session_factory=lambda tgid: contextlib.nullcontext())


def test_measure_overhead_reports_both_phases():
    seen = []

    @contextlib.contextmanager
    def factory(tgid):
        seen.append(tgid)
        yield None

    summary = measure_overhead(FAKE_WORKLOAD, 2, session_factory=factory)
    assert summary.baseline.samples == 10
    assert summary.instrumented.samples == 10
    assert summary.baseline.mean_ms == pytest.approx(1.2)
    assert summary.delta_ms == pytest.approx(0.0)
    assert len(seen) == 2  # one session per instrumented rep
    text = summary.format()
    assert "baseline" in text and "delta" in text


def test_tgid_from_child_reads_announced_tgid():
    seen = []

    @contextlib.contextmanager
    def factory(tgid):
        seen.append(tgid)
        yield None

    measure_overhead(FAKE_WORKLOAD, 1, tgid_from_child=True, session_factory=factory)
    assert seen == [4242]


def test_tgid_from_child_requires_announcement():
    with pytest.raises(WorkloadError, match="tgid"):
        measure_overhead(
            f"{PY} -c \"print('latency_ms=1.0')\"",
            1,
            tgid_from_child=True,
            session_factory=lambda tgid: contextlib.nullcontext(),
        )
