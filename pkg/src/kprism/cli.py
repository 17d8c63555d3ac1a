"""Command-line entrypoint.

Subcommands: record, generate, replay, analyze, report, bench-overhead.
Exit codes: 0 success, 1 validation error, 2 runtime failure, 3 privilege
failure.  ``KPRISM_LOG`` controls diagnostic verbosity (debug/info/warning/
error); ``KPRISM_KERNEL_SNAPSHOTS`` points ``record`` at a recorded snapshot
file instead of the live kernel probes.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from kprism.errors import (
    AnalysisError,
    ConfigError,
    KprismError,
    ProbePrivilegeError,
    TraceError,
)

log = logging.getLogger("kprism.cli")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_RUNTIME = 2
EXIT_PRIVILEGE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad usage; we map usage to 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


def _setup_logging() -> None:
    level = os.environ.get("KPRISM_LOG", "warning").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kprism", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("record", help="collect live per-thread metrics")
    target = p.add_mutually_exclusive_group()
    target.add_argument("--tgid", type=int, help="target thread group id")
    target.add_argument("--comm", help="target command name")
    p.add_argument("--duration", type=int, required=True, metavar="SEC")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--lossy-policy", choices=("mark", "abort"), default="mark")

    p = sub.add_parser("generate", help="generate a labelled scenario trace")
    p.add_argument("--scenario", required=True, metavar="NAME")
    p.add_argument("--threads", type=int, required=True, metavar="N")
    p.add_argument("--duration", type=int, required=True, metavar="SEC")
    p.add_argument("--seed", type=int, required=True, metavar="N")
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("replay", help="replay a trace into a metric store")
    p.add_argument("--trace", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("analyze", help="selective thread tracking against a KPI")
    p.add_argument("--metrics", required=True, metavar="PATH")
    p.add_argument("--kpi", required=True, metavar="PATH")
    p.add_argument("--threshold", type=float, default=0.5, metavar="F")
    p.add_argument("--window", metavar="START,END")
    p.add_argument("--report", required=True, metavar="PATH")
    p.add_argument("--plot-dir", metavar="DIR")

    p = sub.add_parser("report", help="pretty-print a tracking report")
    p.add_argument("--report", required=True, metavar="PATH")

    p = sub.add_parser("bench-overhead", help="measure instrumentation overhead")
    p.add_argument("--cmd", required=True, metavar="STRING")
    p.add_argument("--reps", type=int, required=True, metavar="N")
    p.add_argument("--tgid-from-child", action="store_true")

    return parser


# -- subcommand bodies --------------------------------------------------------


def _cmd_record(args) -> int:
    from kprism.collector import Session, SessionConfig
    from kprism.collector.sources import FileKernelSource, LiveKernelSource

    cfg = SessionConfig(
        target_tgid=args.tgid,
        target_comm=args.comm,
        duration_s=args.duration,
        output_path=args.out,
        lossy_policy=args.lossy_policy,
    )
    snapshots = os.environ.get("KPRISM_KERNEL_SNAPSHOTS")
    if snapshots:
        source = FileKernelSource(snapshots)
        session = Session(cfg, source)
        # snapshot replays use a virtual clock: no real-time pacing
        tick = [0]

        def clock():
            return float(tick[0])

        def sleep(_):
            tick[0] += 1

        def wall():
            return tick[0]

        with open(args.out, "w", encoding="utf-8") as fh:
            session.run(fh, clock=clock, sleep=sleep, wall=wall)
    else:
        session = Session(cfg, LiveKernelSource())
        with open(args.out, "w", encoding="utf-8") as fh:
            session.run(fh)
    log.info("recorded %d s to %s", args.duration, args.out)
    return EXIT_OK


def _cmd_generate(args) -> int:
    from kprism.analysis.kpi import write_kpi_csv
    from kprism.trace_replay import ScenarioSpec, generate_scenario, write_trace

    spec = ScenarioSpec(
        kind=args.scenario,
        threads=args.threads,
        duration_s=args.duration,
        seed=args.seed,
    )
    scenario = generate_scenario(spec)
    write_trace(args.out, scenario.header, scenario.events)
    write_kpi_csv(args.out + ".kpi.csv", scenario.kpi)
    log.info(
        "wrote %s (%d events) and %s.kpi.csv", args.out, len(scenario.events), args.out
    )
    return EXIT_OK


def _cmd_replay(args) -> int:
    from kprism.collector.store import write_store
    from kprism.trace_replay import replay_trace

    result = replay_trace(args.trace)
    write_store(
        args.out,
        result.samples,
        epoch_s=result.header.epoch_ns // 1_000_000_000,
        endpoints=result.endpoints,
    )
    log.info(
        "replayed %s: %d samples, %d drops, %d anomalies",
        args.trace,
        len(result.samples),
        result.drop_count,
        result.anomaly_count,
    )
    return EXIT_OK


def _parse_window(text):
    if text is None:
        return None
    try:
        start, end = text.split(",", 1)
        window = (int(start), int(end))
    except ValueError as exc:
        raise ConfigError(f"bad --window {text!r}: expected START,END") from exc
    if window[0] > window[1]:
        raise ConfigError(f"bad --window {text!r}: start after end")
    return window


def _cmd_analyze(args) -> int:
    from kprism.analysis import load_kpi_csv, report_to_json, track, write_plot_data
    from kprism.analysis.tracking import SampleIndex
    from kprism.collector.store import read_store

    records, endpoints = read_store(args.metrics)
    index = SampleIndex(records, endpoints)
    kpi = load_kpi_csv(args.kpi)
    report = track(
        index, kpi, threshold=args.threshold, window=_parse_window(args.window)
    )
    with open(args.report, "w", encoding="utf-8") as fh:
        fh.write(report_to_json(report) + "\n")
    if args.plot_dir:
        write_plot_data(args.plot_dir, index, kpi, report)
    log.info(
        "analysis: %d entrypoints, %d candidates, %d edges",
        len(report.entrypoints),
        len(report.candidates),
        len(report.edges),
    )
    return EXIT_OK


def _cmd_report(args) -> int:
    from kprism.analysis import format_report, load_report

    sys.stdout.write(format_report(load_report(args.report)))
    return EXIT_OK


def _cmd_bench(args) -> int:
    from kprism.bench import measure_overhead

    summary = measure_overhead(
        args.cmd, args.reps, tgid_from_child=args.tgid_from_child
    )
    sys.stdout.write(summary.format())
    return EXIT_OK


_COMMANDS = {
    "record": _cmd_record,
    "generate": _cmd_generate,
    "replay": _cmd_replay,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "bench-overhead": _cmd_bench,
}


def run(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "record" and args.tgid is None and args.comm is None:
            parser.error("record needs a target: --tgid or --comm")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConfigError, TraceError, AnalysisError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ProbePrivilegeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRIVILEGE
    except (KprismError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
