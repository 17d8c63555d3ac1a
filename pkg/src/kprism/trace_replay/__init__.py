from .traces import TraceHeader, read_trace, write_trace
from .generate import ScenarioSpec, generate_scenario
from .oracle import oracle_accumulate
from .replay import replay_events, replay_trace

__all__ = [
    "TraceHeader",
    "read_trace",
    "write_trace",
    "ScenarioSpec",
    "generate_scenario",
    "oracle_accumulate",
    "replay_events",
    "replay_trace",
]
