"""
Tests for sweeps, reproduction commands and the verification criteria.
"""

import io
from dataclasses import replace

import pytest

from agents import Algorithm, first_epochs, phase_length
from errors import ConfigError
from harness import (
    GROWTH_EXPONENT_LIMIT,
    QUICK_SCALE,
    CellResult,
    RunSettings,
    SweepSpec,
    canon_growth_exponent,
    canon_rows,
    criterion_colour_oracle,
    criterion_colouring,
    criterion_growth,
    criterion_numerics,
    criterion_phase_arithmetic,
    criterion_window_stability,
    first_failure,
    known_d_delays,
    known_d_rows,
    measure_phase_lengths,
    no_d_delays,
    no_d_rows,
    repro_command,
    run_sweep,
    run_verify,
    start_log_star_ceiling,
    trial_config,
    write_sweep_csv,
)
from line import GeneratorKind
from simulator import scenario_from_config


TINY_SCALE = replace(
    QUICK_SCALE,
    colour_instances=5,
    colour_max_nodes=60,
    tower_instances=1,
    tower_max_nodes=4,
    numeric_samples=200,
    phase_count=7,
    window_samples=1,
)


def _cell(generator=GeneratorKind.HUGE_NEIGHBOURS, bound=100, ok=True, elapsed=10):
    return CellResult(
        algorithm=Algorithm.KNOWN_D, generator=generator, distance=1, delay=0,
        orientation_a=1, orientation_b=1, trials=1, max_elapsed=elapsed, bound=bound, ok=ok,
        failure=None if ok else {"algorithm": "known-d"},
    )


def test_repro_command_puts_kappa_first():
    command = repro_command({"algorithm": "canon", "start_a": 0, "kappa": 5, "max_rounds": 9})
    assert command == (
        "python Rendezvous_Lab/core/run_cli.py --kappa 5 rendezvous "
        "--algorithm canon --start-a 0 --max-rounds 9"
    )


def test_trial_config_is_deterministic():
    spec = SweepSpec(algorithm=Algorithm.KNOWN_D, distances=(3,), delays=(5,))
    first = trial_config(spec, GeneratorKind.CANONICAL, 3, 5, (1, -1), 0)
    assert first == trial_config(spec, GeneratorKind.CANONICAL, 3, 5, (1, -1), 0)
    assert first != trial_config(spec, GeneratorKind.CANONICAL, 3, 5, (1, -1), 1)
    assert abs(first["start_a"] - first["start_b"]) == 3
    assert abs(first["wake_a"] - first["wake_b"]) == 5
    assert first["label_shift"] == 1


def test_trial_config_keeps_canon_labels_unshifted():
    spec = SweepSpec(algorithm=Algorithm.CANON, distances=(2,), delays=(0,))
    assert trial_config(spec, GeneratorKind.CANONICAL, 2, 0, (1, 1), 0)["label_shift"] == 0


def test_trial_config_replays_as_scenario():
    spec = SweepSpec(algorithm=Algorithm.KNOWN_D, distances=(2,), delays=(0,), kappa=3)
    config = trial_config(spec, GeneratorKind.RANDOM_WINDOW, 2, 0, (1, 1), 0)
    scenario = scenario_from_config(config)
    assert scenario.distance == 2
    assert scenario.kappa == 3


def test_canon_sweep_passes_and_is_sorted():
    spec = SweepSpec(algorithm=Algorithm.CANON, distances=(3, 1, 2), delays=(7, 0), trials=2)
    results = run_sweep(spec)
    assert len(results) == 3 * 2 * 2
    assert all(result.ok for result in results)
    assert [r.key for r in results] == sorted(r.key for r in results)
    assert first_failure(results) is None


def test_sweep_is_the_same_with_worker_processes():
    spec = SweepSpec(algorithm=Algorithm.CANON, distances=(1, 2, 3), delays=(0, 4))
    assert run_sweep(spec, workers=3) == run_sweep(spec, workers=1)


def test_forced_budget_reports_failure():
    spec = SweepSpec(algorithm=Algorithm.CANON, distances=(3,), delays=(0,), max_rounds=1)
    results = run_sweep(spec)
    failed = first_failure(results)
    assert failed is not None
    assert failed.max_elapsed is None
    assert failed.failure["max_rounds"] == 1
    assert failed.as_row()[7] == "timeout"
    assert "--max-rounds 1" in repro_command(failed.failure)


@pytest.mark.parametrize("changes", [
    {"distances": ()},
    {"distances": (0, 1)},
    {"delays": (-1,)},
    {"trials": 0},
])
def test_sweep_spec_validation(changes):
    fields = dict(algorithm=Algorithm.CANON, distances=(1,), delays=(0,))
    fields.update(changes)
    with pytest.raises(ConfigError):
        run_sweep(SweepSpec(**fields))


def test_sweep_csv_header():
    out = io.StringIO()
    write_sweep_csv([_cell()], out)
    lines = out.getvalue().splitlines()
    assert lines[0] == "algorithm,generator,D,delay,orientation_a,orientation_b,trials,max_elapsed,bound,ok"
    assert lines[1] == "known-d,huge-neighbours,1,0,1,1,1,10,100,true"


def test_measure_phase_lengths():
    assert measure_phase_lengths(5, 1) == [phase_length(g, 1, 1) for g in range(1, 6)]


def test_small_criteria_pass():
    assert criterion_colouring(TINY_SCALE, 1).ok
    assert criterion_numerics(TINY_SCALE, 1).ok
    assert criterion_phase_arithmetic(TINY_SCALE, 1).ok
    assert criterion_window_stability(TINY_SCALE, 1, 60).ok


def test_growth_criterion_flags_failed_tier_five():
    result = criterion_growth([], [], [_cell(ok=False, elapsed=None)])
    assert not result.ok
    assert "rendezvous" in result.detail


def _canon_cell(distance, elapsed):
    return CellResult(
        algorithm=Algorithm.CANON, generator=GeneratorKind.CANONICAL, distance=distance, delay=0,
        orientation_a=1, orientation_b=1, trials=1, max_elapsed=elapsed, bound=704 * distance, ok=True,
    )


LINEAR_CANON = [_canon_cell(d, 300 * d) for d in (1, 2, 4, 8, 16, 32)]
QUADRATIC_CANON = [_canon_cell(d, d * d) for d in (1, 2, 4, 8, 16, 32)]

SMALL_SWEEPS = replace(
    TINY_SCALE,
    canon_distances=(1, 2),
    canon_max_doubling=1,
    no_d_distances=(1,),
    no_d_generators=(GeneratorKind.HUGE_NEIGHBOURS,),
    oracle_samples=2,
)
SETTINGS = RunSettings(seed=1, kappa=60)


def test_canon_growth_exponent():
    assert canon_growth_exponent(LINEAR_CANON) == pytest.approx(1.0)
    assert canon_growth_exponent(QUADRATIC_CANON) == pytest.approx(2.0)
    # distances 2 and 8 span too little to fit
    assert canon_growth_exponent([_canon_cell(2, 600), _canon_cell(8, 2400)]) is None
    assert canon_growth_exponent([]) is None


def test_growth_criterion_accepts_linear_canon():
    result = criterion_growth(LINEAR_CANON, [], [])
    assert result.ok
    assert "exponent 1.00" in result.detail


def test_growth_criterion_flags_quadratic_canon():
    result = criterion_growth(QUADRATIC_CANON, [], [])
    assert not result.ok
    assert "D**2.00" in result.detail


def test_growth_criterion_flags_slow_tier_five():
    result = criterion_growth([], [_cell(bound=100)], [_cell(bound=10 ** 6, elapsed=500)])
    assert not result.ok
    assert "tier-4 bound is 100" in result.detail


def test_growth_criterion_flags_label_dependent_bounds():
    assert criterion_growth([], [_cell(bound=100)], [_cell(bound=100)]).ok
    result = criterion_growth([], [_cell(bound=100)], [_cell(bound=200)])
    assert not result.ok
    assert "neighbour labels" in result.detail


def test_growth_criterion_needs_tier_four_counterpart():
    result = criterion_growth([], [], [_cell()])
    assert not result.ok
    assert "no tier-4 counterpart" in result.detail


def test_real_canon_runs_grow_linearly():
    spec = SweepSpec(algorithm=Algorithm.CANON, distances=(2, 4, 8, 16), delays=(0, 3))
    exponent = canon_growth_exponent(run_sweep(spec))
    assert exponent is not None
    assert exponent < GROWTH_EXPONENT_LIMIT


@pytest.mark.parametrize("generator, distance, expected", [
    (GeneratorKind.RANDOM_WINDOW, 1, 5),
    (GeneratorKind.HUGE_NEIGHBOURS, 1, 4),
    (GeneratorKind.CANONICAL, 1, 3),
    (GeneratorKind.CANONICAL, 100, 4),
])
def test_start_log_star_ceiling(generator, distance, expected):
    assert start_log_star_ceiling(generator, distance) == expected


def test_start_log_star_ceiling_rejects_explicit_lines():
    with pytest.raises(ConfigError):
        start_log_star_ceiling(GeneratorKind.EXPLICIT, 1)


def test_known_d_delays_cover_every_log_star():
    assert known_d_delays(1, 60) == (0, 1, 3, 17, 241, 481, 721, 961, 1201)
    assert known_d_delays(2, 60, (GeneratorKind.HUGE_NEIGHBOURS,))[-1] == 4 * 2 * 60 * 4 + 1


def test_no_d_delays_cover_every_log_star():
    late = tuple(first_epochs(1, level, 60) + 1 for level in range(1, 5))
    assert no_d_delays(1, 60, (GeneratorKind.HUGE_NEIGHBOURS,)) == (0, 7, 9) + late
    assert late[0] == 8881


def test_canon_rows_pass_at_small_scale():
    rows = canon_rows(SMALL_SWEEPS, SETTINGS)
    assert {row.distance for row in rows} == {1, 2}
    assert first_failure(rows) is None


def test_known_d_rows_pass_at_small_scale():
    rows = known_d_rows((1,), SETTINGS)
    assert {row.generator for row in rows} == {GeneratorKind.RANDOM_WINDOW, GeneratorKind.HUGE_NEIGHBOURS}
    assert first_failure(rows) is None


def test_no_d_rows_pass_at_small_scale():
    rows = no_d_rows(SMALL_SWEEPS, SETTINGS)
    assert {row.delay for row in rows} == set(no_d_delays(1, 60, (GeneratorKind.HUGE_NEIGHBOURS,)))
    assert first_failure(rows) is None


def test_growth_criterion_passes_on_real_tiers():
    canon = canon_rows(SMALL_SWEEPS, SETTINGS)
    tier4 = known_d_rows((1,), SETTINGS, (GeneratorKind.HUGE_NEIGHBOURS,))
    tier5 = known_d_rows(
        (1,), SETTINGS, (GeneratorKind.HUGE_NEIGHBOURS,), tier=5,
        delays=(0, known_d_delays(1, 60, (GeneratorKind.HUGE_NEIGHBOURS,))[-1]),
    )
    assert criterion_growth(canon, tier4, tier5).ok


def test_colour_oracle_passes_with_wide_windows():
    result = criterion_colour_oracle(SMALL_SWEEPS, 1, 60)
    assert result.ok
    assert result.detail == "4 lines"


def test_colour_oracle_catches_narrow_windows():
    assert not criterion_colour_oracle(SMALL_SWEEPS, 1, 1).ok


def test_window_stability_catches_narrow_windows():
    assert not criterion_window_stability(TINY_SCALE, 1, 1).ok


def test_run_verify_reports_forced_timeouts():
    results = run_verify(quick=True, kappa=60, max_rounds=1)
    assert [result.number for result in results] == list(range(1, 10))
    assert [result.number for result in results if not result.ok] == [3, 4, 6, 9]
    for result in results[2], results[3], results[5]:
        assert "--max-rounds 1" in result.detail


def test_run_verify_catches_narrow_kappa():
    # one-round budgets keep the rendezvous sweeps short
    results = run_verify(quick=True, kappa=1, max_rounds=1)
    failed = {result.number for result in results if not result.ok}
    assert {5, 8} <= failed
