#!/usr/bin/env python3
"""Compare the compiled and interpreted aggregation engines on replay work.

Usage: python3 benchmarks/bench_engine.py [--seeds N] [--threads N] [--duration S]
"""

import argparse
import time

from kprism.trace_replay import ScenarioSpec, generate_scenario, replay_events


def backends():
    from kprism.metrics_core import _engine_py

    out = [("python", _engine_py.MetricsEngine)]
    try:
        from kprism.metrics_core import _engine_cy

        out.append(("compiled", _engine_cy.MetricsEngine))
    except ImportError:
        pass
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=200)
    ap.add_argument("--threads", type=int, default=8)
    ap.add_argument("--duration", type=int, default=10)
    args = ap.parse_args()

    traces = []
    total_events = 0
    for seed in range(args.seeds):
        sc = generate_scenario(
            ScenarioSpec("random", threads=args.threads, duration_s=args.duration, seed=seed)
        )
        traces.append(sc.events)
        total_events += len(sc.events)
    print(f"{args.seeds} traces, {total_events} events total")

    results = {}
    for name, cls in backends():
        started = time.perf_counter()
        for events in traces:
            replay_events(events, args.duration, engine=cls())
        elapsed = time.perf_counter() - started
        results[name] = elapsed
        rate = total_events / elapsed
        print(f"{name:>9}: {elapsed:.3f} s  ({rate:,.0f} events/s)")

    if len(results) == 2:
        speedup = results["python"] / results["compiled"]
        print(f"compiled speedup: {speedup:.2f}x")


if __name__ == "__main__":
    main()
