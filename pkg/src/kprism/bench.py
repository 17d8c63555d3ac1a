"""Instrumentation overhead benchmark.

Runs a latency-emitting workload command N times without instrumentation and
N times with a live collection session attached, then reports mean ± stdev
per-request latency for both phases and the delta.

Workload contract: the command prints one line per request of the form
``latency_ms=<float>`` on stdout; all other output is ignored.  With
``tgid_from_child`` the workload must announce the thread group to target by
printing ``tgid=<N>`` before its latency lines (useful when the interesting
process is a server the command forks rather than the command itself).
"""

from __future__ import annotations

import contextlib
import io
import re
import statistics
import subprocess
import threading
from dataclasses import dataclass

from kprism.errors import ConfigError, WorkloadError

LATENCY_LINE = re.compile(r"^latency_ms=([0-9]*\.?[0-9]+(?:[eE][+-]?[0-9]+)?)\s*$")
TGID_LINE = re.compile(r"^tgid=([0-9]+)\s*$")


@dataclass
class PhaseStats:
    mean_ms: float
    stdev_ms: float
    samples: int

    def __str__(self) -> str:
        return f"{self.mean_ms:.3f} ms ± {self.stdev_ms:.3f} ms (n={self.samples})"


@dataclass
class OverheadSummary:
    baseline: PhaseStats
    instrumented: PhaseStats
    reps: int

    @property
    def delta_ms(self) -> float:
        return self.instrumented.mean_ms - self.baseline.mean_ms

    def format(self) -> str:
        return (
            f"baseline:     {self.baseline}\n"
            f"instrumented: {self.instrumented}\n"
            f"delta:        {self.delta_ms:+.3f} ms mean per request\n"
        )


def parse_latencies(text: str) -> list[float]:
    out = []
    for line in text.splitlines():
        m = LATENCY_LINE.match(line.strip())
        if m:
            out.append(float(m.group(1)))
    return out


def _run_once(cmd: str, session_factory=None, tgid_from_child=False) -> list[float]:
    proc = subprocess.Popen(
        cmd,
        shell=True,
        stdout=subprocess.PIPE,
        stderr=subprocess.DEVNULL,
        text=True,
    )
    chunks: list[str] = []
    try:
        target_tgid = proc.pid
        if session_factory is not None and tgid_from_child:
            for line in proc.stdout:
                chunks.append(line)
                m = TGID_LINE.match(line.strip())
                if m:
                    target_tgid = int(m.group(1))
                    break
            else:
                raise WorkloadError(
                    "workload never printed a 'tgid=<N>' line "
                    "(required with --tgid-from-child)"
                )
        session_cm = contextlib.nullcontext()
        if session_factory is not None:
            session_cm = session_factory(target_tgid)
        with session_cm:
            chunks.append(proc.stdout.read())
        proc.wait()
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
    if proc.returncode != 0:
        raise WorkloadError(f"workload exited with status {proc.returncode}")
    lats = parse_latencies("".join(chunks))
    if not lats:
        raise WorkloadError(
            "workload emitted no latency lines (expected 'latency_ms=<float>')"
        )
    return lats


def _phase(cmd: str, reps: int, session_factory=None, tgid_from_child=False) -> PhaseStats:
    samples: list[float] = []
    for _ in range(reps):
        samples.extend(_run_once(cmd, session_factory, tgid_from_child))
    mean = statistics.fmean(samples)
    stdev = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return PhaseStats(mean_ms=mean, stdev_ms=stdev, samples=len(samples))


@contextlib.contextmanager
def _live_session(tgid: int):
    """Attach a real collection session to the workload for one rep."""
    from kprism.collector import Session, SessionConfig
    from kprism.collector.sources import LiveKernelSource
    from kprism.collector.store import MetricStoreWriter

    cfg = SessionConfig(target_tgid=tgid, duration_s=3600, output_path="")
    session = Session(cfg, LiveKernelSource())
    session.start()
    sink = io.StringIO()
    stop = threading.Event()

    def _collect():
        writer = MetricStoreWriter(sink)
        idx = 0
        while not stop.wait(cfg.interval_s):
            records, endpoints = session.tick(idx, idx)
            writer.write_tick(records, endpoints)
            idx += 1

    worker = threading.Thread(target=_collect, daemon=True)
    worker.start()
    try:
        yield session
    finally:
        stop.set()
        worker.join(timeout=5)
        session.source.close()


def measure_overhead(
    cmd: str,
    reps: int,
    tgid_from_child: bool = False,
    session_factory=None,
) -> OverheadSummary:
    """Run the benchmark; ``session_factory(tgid) -> context manager`` can be
    injected for tests, otherwise a live session is attached."""
    if reps < 1:
        raise ConfigError("reps must be >= 1")
    if session_factory is None:
        session_factory = _live_session
    baseline = _phase(cmd, reps)
    instrumented = _phase(cmd, reps, session_factory, tgid_from_child)
    return OverheadSummary(baseline=baseline, instrumented=instrumented, reps=reps)
