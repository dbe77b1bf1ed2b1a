"""
Tests for the two-agent scheduler.
"""

import io
import random

import pytest

from agents import Algorithm, Move, Observation, advance, agent_init
from bounds import known_d_bound, no_d_envelope
from errors import ConfigError
from line import GeneratorKind, LabelGenSpec, label_at, make_line
from numerics import log_star
from simulator import (
    AgentSpec,
    Met,
    Scenario,
    Timeout,
    run_rendezvous,
    scenario_bound,
    scenario_ell,
    scenario_from_config,
    stride_colour,
    write_trace_csv,
)


CANON = AgentSpec(Algorithm.CANON)
KNOWN = AgentSpec(Algorithm.KNOWN_D)
UNKNOWN = AgentSpec(Algorithm.UNKNOWN_D)


def _scenario(spec, agent, start_a, start_b, orientations=(1, 1), seed=0,
              wake_a=1, wake_b=1, max_rounds=100000, kappa=60):
    line = make_line(spec, seed=seed, orientations=orientations)
    return Scenario(
        line=line, start_a=start_a, start_b=start_b, algorithm_a=agent, algorithm_b=agent,
        wake_a=wake_a, wake_b=wake_b, kappa=kappa, max_rounds=max_rounds,
    )


def _assert_legal(trace, scenario):
    previous = (scenario.start_a, scenario.start_b)
    for row in trace:
        assert abs(row.pos_a - previous[0]) <= 1
        assert abs(row.pos_b - previous[1]) <= 1
        if row.move_a is None:
            assert row.pos_a == scenario.start_a
        if row.move_b is None:
            assert row.pos_b == scenario.start_b
        previous = (row.pos_a, row.pos_b)


@pytest.mark.parametrize("orientations, expected", [
    ((1, 1), 57), ((1, -1), 57), ((-1, 1), 61), ((-1, -1), 61),
])
def test_canon_distance_one_regression(orientations, expected):
    scenario = _scenario(LabelGenSpec(GeneratorKind.CANONICAL), CANON, 0, 1, orientations)
    outcome, trace = run_rendezvous(scenario)
    assert outcome == Met(global_round=expected, node=1, elapsed_from_earlier_wake=expected, delay=0)
    assert expected <= 704
    _assert_legal(trace, scenario)
    assert (trace[-1].pos_a, trace[-1].pos_b) == (1, 1)


def test_canon_symmetry_under_agent_swap():
    spec = LabelGenSpec(GeneratorKind.CANONICAL)
    forward = _scenario(spec, CANON, -3, 4, orientations=(1, -1), wake_a=1, wake_b=20)
    backward = _scenario(spec, CANON, 4, -3, orientations=(-1, 1), wake_a=20, wake_b=1)
    out_f, _ = run_rendezvous(forward)
    out_b, _ = run_rendezvous(backward)
    assert isinstance(out_f, Met)
    assert out_f == out_b
    assert out_f.elapsed_from_earlier_wake <= 704 * 7


def test_canon_within_bound_for_small_distances():
    spec = LabelGenSpec(GeneratorKind.CANONICAL)
    rng = random.Random(8)
    for distance in range(1, 9):
        for delay in (0, 1, 3, 40, 200):
            start = rng.randint(-10, 10)
            scenario = _scenario(spec, CANON, start, start + distance, (1, -1), wake_b=1 + delay)
            outcome, _ = run_rendezvous(scenario, record_trace=False)
            assert isinstance(outcome, Met)
            assert outcome.elapsed_from_earlier_wake <= 704 * distance


def test_zero_budget_times_out():
    scenario = _scenario(LabelGenSpec(GeneratorKind.CANONICAL), CANON, 0, 1, max_rounds=0)
    outcome, trace = run_rendezvous(scenario)
    assert outcome == Timeout(limit=0, delay=0)
    assert trace == ()


def test_late_agent_found_during_exploration():
    spec = LabelGenSpec(GeneratorKind.RANDOM_WINDOW)
    scenario = _scenario(spec, KNOWN, 0, 1, (1, 1), seed=21, wake_b=10**6, max_rounds=5000)
    outcome, trace = run_rendezvous(scenario)
    assert outcome == Met(global_round=1, node=1, elapsed_from_earlier_wake=1, delay=10**6 - 1)
    assert trace[0].move_b is None


def test_late_agent_found_after_sweeping_left_first():
    spec = LabelGenSpec(GeneratorKind.RANDOM_WINDOW)
    scenario = _scenario(spec, KNOWN, 0, 1, (-1, 1), seed=21, wake_b=10**6, max_rounds=5000)
    radius = 60 * log_star(label_at(scenario.line, 0))
    outcome, trace = run_rendezvous(scenario)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake == 2 * radius + 1
    _assert_legal(trace, scenario)


def test_known_d_meets_within_bound():
    spec = LabelGenSpec(GeneratorKind.RANDOM_WINDOW)
    scenario = _scenario(spec, KNOWN, 0, 3, (1, -1), seed=4, max_rounds=50000)
    outcome, trace = run_rendezvous(scenario)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake <= known_d_bound(3, scenario_ell(scenario), 60)
    _assert_legal(trace, scenario)


def test_known_d_on_canonical_line_with_label_shift():
    spec = LabelGenSpec(GeneratorKind.CANONICAL)
    agent = AgentSpec(Algorithm.KNOWN_D, label_shift=1)
    scenario = _scenario(spec, agent, 2, 4, (1, 1), wake_b=7, max_rounds=50000)
    outcome, _ = run_rendezvous(scenario, record_trace=False)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake <= scenario_bound(scenario)


def test_known_d_small_start_labels_among_huge_neighbours():
    spec = LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=4, starts=(0, 2))
    scenario = _scenario(spec, KNOWN, 0, 2, (1, 1), seed=9, max_rounds=50000)
    assert scenario_ell(scenario) < 100
    outcome, _ = run_rendezvous(scenario, record_trace=False)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake <= known_d_bound(2, scenario_ell(scenario), 60)


def test_unknown_d_meets_within_envelope():
    spec = LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=4, starts=(0, 1))
    scenario = _scenario(spec, UNKNOWN, 0, 1, (1, -1), seed=2, max_rounds=10**6)
    outcome, _ = run_rendezvous(scenario, record_trace=False)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake <= no_d_envelope(1, scenario_ell(scenario), 60)


def test_runs_are_deterministic():
    spec = LabelGenSpec(GeneratorKind.RANDOM_WINDOW)
    scenario = _scenario(spec, KNOWN, 5, 6, (1, -1), seed=13, wake_a=30, max_rounds=20000)
    assert run_rendezvous(scenario) == run_rendezvous(scenario)


@pytest.mark.parametrize("changes", [
    {"start_b": 0},
    {"wake_a": 0},
    {"algorithm_b": AgentSpec(Algorithm.KNOWN_D)},
    {"max_rounds": -1},
])
def test_invalid_scenarios(changes):
    fields = dict(
        line=make_line(LabelGenSpec(GeneratorKind.CANONICAL)), start_a=0, start_b=1,
        algorithm_a=CANON, algorithm_b=CANON, max_rounds=10,
    )
    fields.update(changes)
    with pytest.raises(ConfigError):
        run_rendezvous(Scenario(**fields))


def test_canon_needs_canonical_line():
    scenario = _scenario(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), CANON, 0, 1)
    with pytest.raises(ConfigError):
        run_rendezvous(scenario)


def test_trace_csv_format():
    scenario = _scenario(LabelGenSpec(GeneratorKind.CANONICAL), CANON, 0, 1, wake_b=3)
    _, trace = run_rendezvous(scenario)
    out = io.StringIO()
    write_trace_csv(trace, out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "global_round,pos_a,pos_b,move_a,move_b"
    assert lines[1] == "1,1,1,right,"
    assert len(lines) == len(trace) + 1


def test_trace_csv_to_path(tmp_path):
    scenario = _scenario(LabelGenSpec(GeneratorKind.CANONICAL), CANON, 0, 2)
    _, trace = run_rendezvous(scenario)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, str(path))
    assert path.read_text().startswith("global_round,")


def test_scenario_from_config_defaults():
    scenario = scenario_from_config({"algorithm": "canon", "distance": 7, "delay": 13})
    assert (scenario.start_a, scenario.start_b) == (0, 7)
    assert (scenario.wake_a, scenario.wake_b) == (1, 14)
    assert scenario.max_rounds == 4 * 704 * 7
    outcome, _ = run_rendezvous(scenario, record_trace=False)
    assert isinstance(outcome, Met)
    assert outcome.elapsed_from_earlier_wake <= 4928


@pytest.mark.parametrize("config", [
    {"algorithm": "teleport"},
    {"algorithm": "canon", "distance": 0},
    {"algorithm": "canon", "generator": "spiral"},
    {"algorithm": "canon", "delay": -1},
    {"algorithm": "canon", "orientation_a": 2},
    {"algorithm": "known-d", "generator": "explicit"},
    {"algorithm": "known-d", "generator": "canonical"},
    {"algorithm": "canon", "start_a": "x"},
])
def test_scenario_from_config_rejects(config):
    with pytest.raises(ConfigError):
        scenario_from_config(config)


def test_scenario_from_config_explicit_labels(tmp_path):
    path = tmp_path / "labels.txt"
    path.write_text("origin_offset=-3\n" + "\n".join(str(x) for x in range(10, 17)) + "\n")
    scenario = scenario_from_config({
        "algorithm": "known-d", "generator": "explicit", "labels_file": str(path),
        "start_a": 0, "start_b": 1, "kappa": 1,
    })
    assert scenario_ell(scenario) == 14


def test_stride_colour_matches_the_walking_agent():
    line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), seed=3)
    kappa, distance = 2, 2
    for orientation in (1, -1):
        state = agent_init(Algorithm.KNOWN_D, distance=distance, kappa=kappa)
        position = 10
        clock = 0
        while state.computed_colour is None:
            clock += 1
            move = advance(state, Observation(label_at(line, position), clock))
            position += move.delta * orientation
        assert state.computed_colour == stride_colour(line, 10, distance, kappa, orientation)


def test_stride_colours_differ_at_distance_d():
    rng = random.Random(17)
    for _ in range(4):
        line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), seed=rng.getrandbits(64))
        position = rng.randint(-100, 100)
        distance = rng.randint(1, 8)
        assert stride_colour(line, position, distance, 60) != stride_colour(line, position + distance, distance, 60)


def test_move_deltas():
    assert [m.delta for m in (Move.LEFT, Move.STAY, Move.RIGHT)] == [-1, 0, 1]
