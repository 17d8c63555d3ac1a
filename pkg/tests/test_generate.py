"""Scenario generator: spec validation, determinism, well-formed traces."""

import pytest

from kprism.errors import ConfigError
from kprism.trace_replay import ScenarioSpec, generate_scenario
from kprism.trace_replay.generate import SCENARIO_KINDS
from kprism.trace_replay.traces import validate_events


def test_unknown_scenario_rejected():
    with pytest.raises(ConfigError):
        ScenarioSpec(kind="quantum", threads=2, duration_s=10, seed=1)


def test_thread_minimums():
    with pytest.raises(ConfigError):
        ScenarioSpec(kind="random", threads=0, duration_s=10, seed=1)
    with pytest.raises(ConfigError):
        ScenarioSpec(kind="lock_contention", threads=1, duration_s=10, seed=1)
    with pytest.raises(ConfigError):
        ScenarioSpec(kind="external_dependency", threads=1, duration_s=10, seed=1)


def test_duration_minimum():
    with pytest.raises(ConfigError):
        ScenarioSpec(kind="random", threads=2, duration_s=1, seed=1)


@pytest.mark.parametrize("kind", SCENARIO_KINDS)
def test_all_scenarios_produce_valid_traces(kind):
    spec = ScenarioSpec(kind=kind, threads=3, duration_s=6, seed=11)
    sc = generate_scenario(spec)
    validate_events(sc.events, spec.duration_s)
    assert sc.header.scenario == kind
    assert sc.header.duration_s == spec.duration_s
    assert [s for s, _ in sc.kpi] == list(range(spec.duration_s))


@pytest.mark.parametrize("kind", SCENARIO_KINDS)
def test_generation_is_deterministic(kind):
    spec = ScenarioSpec(kind=kind, threads=4, duration_s=8, seed=99)
    a = generate_scenario(spec)
    b = generate_scenario(spec)
    assert a.events == b.events
    assert a.kpi == b.kpi
    assert a.ground_truth == b.ground_truth


def test_different_seeds_differ():
    mk = lambda seed: generate_scenario(
        ScenarioSpec(kind="random", threads=4, duration_s=5, seed=seed)
    )
    assert mk(1).events != mk(2).events


@pytest.mark.parametrize(
    "kind",
    ["lock_contention", "disk_contention", "cpu_contention", "external_dependency"],
)
def test_structured_scenarios_carry_ground_truth(kind):
    sc = generate_scenario(ScenarioSpec(kind=kind, threads=3, duration_s=10, seed=5))
    assert sc.ground_truth
    for tgid, tid, metric, res in sc.ground_truth:
        assert tgid >= 1 and tid >= 1
        assert isinstance(metric, str)


def test_idle_scenario_has_no_ground_truth():
    sc = generate_scenario(ScenarioSpec(kind="idle", threads=2, duration_s=5, seed=0))
    assert sc.ground_truth == frozenset()
    assert all(v == 1.0 for _, v in sc.kpi)


def test_lock_scenario_plants_waiter_futex_series():
    sc = generate_scenario(
        ScenarioSpec(kind="lock_contention", threads=3, duration_s=10, seed=2)
    )
    futex_series = [g for g in sc.ground_truth if g[2] == "futex_wait_time"]
    assert len(futex_series) == 2  # one per waiter; the holder never waits
    assert all(res is not None for _, _, _, res in futex_series)
