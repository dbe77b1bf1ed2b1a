"""
Synchronous two-agent scheduler on a labeled line.

Global rounds start at the earlier wake round. In each round every awake
agent observes the label of its node, moves, and the two moves take effect
together. The agents meet when they share a node at the end of a round;
swapping places across an edge goes unnoticed. An agent that has not woken
up yet sits on its start node and can be found there.
"""

import csv
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, TextIO, Tuple, Union

from agents import (
    AgentState,
    Algorithm,
    Move,
    Observation,
    advance,
    agent_init,
    canon_knowledge_for,
)
from bounds import applicable_bound, default_round_budget
from colouring import colour_in_window
from config import KAPPA, resolve_kappa
from errors import ConfigError, PreconditionError
from line import GeneratorKind, LabelGenSpec, LineInstance, label_at, load_label_file, make_line
from numerics import log_star


logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["global_round", "pos_a", "pos_b", "move_a", "move_b"]


@dataclass(frozen=True)
class AgentSpec:
    """Program both agents run; ``label_shift`` is added to every observed label."""

    algorithm: Algorithm
    label_shift: int = 0


@dataclass(frozen=True)
class Scenario:
    line: LineInstance
    start_a: int
    start_b: int
    algorithm_a: AgentSpec
    algorithm_b: AgentSpec
    wake_a: int = 1
    wake_b: int = 1
    kappa: int = KAPPA
    max_rounds: int = 0

    @property
    def distance(self) -> int:
        return abs(self.start_a - self.start_b)

    @property
    def delay(self) -> int:
        return abs(self.wake_a - self.wake_b)


@dataclass(frozen=True)
class Met:
    global_round: int
    node: int
    elapsed_from_earlier_wake: int
    delay: int


@dataclass(frozen=True)
class Timeout:
    limit: int
    delay: int


Outcome = Union[Met, Timeout]


@dataclass(frozen=True)
class TraceRow:
    """Positions at the end of a round; a move of None means the agent was asleep."""

    global_round: int
    pos_a: int
    pos_b: int
    move_a: Optional[Move]
    move_b: Optional[Move]


Trace = Tuple[TraceRow, ...]


def validate_scenario(scenario: Scenario) -> None:
    """
    Raises:
        ConfigError: If the scenario breaks a model rule
    """
    if scenario.start_a == scenario.start_b:
        raise ConfigError("agents must start on different nodes (D >= 1)")
    if scenario.wake_a < 1 or scenario.wake_b < 1:
        raise ConfigError(f"wake rounds must be >= 1, got {scenario.wake_a}, {scenario.wake_b}")
    if scenario.algorithm_a != scenario.algorithm_b:
        raise ConfigError("both agents must run the same program")
    if scenario.kappa < 1:
        raise ConfigError(f"kappa must be >= 1, got {scenario.kappa}")
    if scenario.max_rounds < 0:
        raise ConfigError(f"max_rounds must be >= 0, got {scenario.max_rounds}")
    if scenario.algorithm_a.algorithm == Algorithm.CANON:
        if scenario.line.generator.kind != GeneratorKind.CANONICAL:
            raise ConfigError("the canon algorithm only runs on the canonical line")
        return
    shift = scenario.algorithm_a.label_shift
    for start in (scenario.start_a, scenario.start_b):
        if label_at(scenario.line, start) + shift < 2:
            raise ConfigError(
                f"start label at {start} is below 2 after a shift of {shift}; use label_shift"
            )


def _make_agent(scenario: Scenario, start: int, orientation: int) -> AgentState:
    spec = scenario.algorithm_a
    try:
        if spec.algorithm == Algorithm.CANON:
            return agent_init(
                spec.algorithm,
                knowledge=canon_knowledge_for(start, orientation),
                kappa=scenario.kappa,
            )
        return agent_init(
            spec.algorithm,
            distance=scenario.distance,
            kappa=scenario.kappa,
            label_shift=spec.label_shift,
        )
    except PreconditionError as exc:
        raise ConfigError(str(exc)) from exc


def scenario_ell(scenario: Scenario) -> int:
    """Larger starting label as the agents see it (after their label shift)."""
    shift = scenario.algorithm_a.label_shift
    return max(label_at(scenario.line, scenario.start_a), label_at(scenario.line, scenario.start_b)) + shift


def scenario_bound(scenario: Scenario) -> int:
    return applicable_bound(
        scenario.algorithm_a.algorithm, scenario.distance, scenario_ell(scenario), scenario.kappa
    )


def run_rendezvous(scenario: Scenario, record_trace: bool = True) -> Tuple[Outcome, Trace]:
    """
    Run one rendezvous scenario until the agents meet or the budget runs out.

    Args:
        scenario: The scenario; max_rounds counts rounds from the earlier wake
        record_trace: Keep a TraceRow per round (skipped for large sweeps)

    Returns:
        (outcome, trace)

    Raises:
        ConfigError: If the scenario is invalid
        InternalDesyncError: If an agent loses track of itself
    """
    validate_scenario(scenario)
    line = scenario.line
    orient_a, orient_b = line.orientation_a, line.orientation_b
    agent_a = _make_agent(scenario, scenario.start_a, orient_a)
    agent_b = _make_agent(scenario, scenario.start_b, orient_b)
    wake_a, wake_b = scenario.wake_a, scenario.wake_b
    pos_a, pos_b = scenario.start_a, scenario.start_b
    first = min(wake_a, wake_b)
    delay = scenario.delay
    trace: List[TraceRow] = []

    for t in range(first, first + scenario.max_rounds):
        move_a = move_b = None
        if t >= wake_a:
            move_a = advance(agent_a, Observation(label_at(line, pos_a), t - wake_a + 1))
        if t >= wake_b:
            move_b = advance(agent_b, Observation(label_at(line, pos_b), t - wake_b + 1))
        if move_a is not None:
            pos_a += move_a.delta * orient_a
        if move_b is not None:
            pos_b += move_b.delta * orient_b
        if record_trace:
            trace.append(TraceRow(t, pos_a, pos_b, move_a, move_b))
        if pos_a == pos_b:
            elapsed = t - first + 1
            logger.debug("Met at node %d in round %d (elapsed %d)", pos_a, t, elapsed)
            return Met(t, pos_a, elapsed, delay), tuple(trace)

    logger.debug("No meeting within %d rounds", scenario.max_rounds)
    return Timeout(scenario.max_rounds, delay), tuple(trace)


def _move_name(move: Optional[Move]) -> str:
    return "" if move is None else move.name.lower()


def write_trace_csv(trace: Trace, out: Union[str, TextIO]) -> None:
    """
    Write a trace as CSV: global_round,pos_a,pos_b,move_a,move_b.

    Asleep agents have an empty move column. ``out`` is a path or an open
    text stream.
    """
    if isinstance(out, str):
        with open(out, "w", encoding="utf-8", newline="") as f:
            write_trace_csv(trace, f)
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace:
        writer.writerow([
            row.global_round, row.pos_a, row.pos_b,
            _move_name(row.move_a), _move_name(row.move_b),
        ])


def stride_colour(
    line: LineInstance,
    position: int,
    stride: int,
    kappa: int,
    orientation: int = 1,
    label_shift: int = 0,
) -> int:
    """
    Colour an agent starting at ``position`` computes for a given stride.

    Reads the labels directly from the line instead of walking, using the
    same contracted window the agent builds after its exploration sweep.
    """
    if stride < 1:
        raise PreconditionError(f"stride must be >= 1, got {stride}")
    centre = label_at(line, position) + label_shift
    nodes = kappa * log_star(centre)
    window = [
        label_at(line, position + orientation * stride * k) + label_shift
        for k in range(-nodes, nodes + 1)
    ]
    return colour_in_window(window, nodes, kappa)


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def _int_option(config: Dict[str, Any], key: str, default: int) -> int:
    value = config.get(key, default)
    try:
        return int(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key} must be an integer, got {value!r}") from exc


def line_spec_from_config(config: Dict[str, Any], starts: Tuple[int, int]) -> LabelGenSpec:
    """Build the label generator description a scenario config names."""
    try:
        kind = GeneratorKind(str(config.get("generator", GeneratorKind.CANONICAL.value)))
    except ValueError as exc:
        raise ConfigError(f"unknown generator {config.get('generator')!r}") from exc

    if kind == GeneratorKind.EXPLICIT:
        labels_file = config.get("labels_file")
        if not labels_file:
            raise ConfigError("the explicit generator needs labels_file")
        labels, origin_offset = load_label_file(str(labels_file))
        return LabelGenSpec(kind, labels=labels, origin_offset=origin_offset)
    if kind == GeneratorKind.HUGE_NEIGHBOURS:
        return LabelGenSpec(kind, tier=_int_option(config, "tier", 4), starts=starts)
    if kind == GeneratorKind.RANDOM_WINDOW and config.get("radius") not in (None, ""):
        return LabelGenSpec(kind, radius=_int_option(config, "radius", 0))
    return LabelGenSpec(kind)


def scenario_from_config(config: Dict[str, Any]) -> Scenario:
    """
    Build a scenario from a key=value configuration dictionary.

    Recognised keys: algorithm, generator, seed, start_a, start_b (or
    distance with start_b = start_a + distance), delay (b wakes later) or
    wake_a/wake_b, orientation_a, orientation_b, tier, radius, labels_file,
    label_shift, kappa and max_rounds (0 derives a budget from the bound).

    Raises:
        ConfigError: On any invalid or inconsistent value
    """
    try:
        algorithm = Algorithm(str(config.get("algorithm", Algorithm.CANON.value)))
    except ValueError as exc:
        raise ConfigError(f"unknown algorithm {config.get('algorithm')!r}") from exc

    start_a = _int_option(config, "start_a", 0)
    if "start_b" in config:
        start_b = _int_option(config, "start_b", 0)
    else:
        start_b = start_a + _int_option(config, "distance", 1)
    if start_a == start_b:
        raise ConfigError("agents must start on different nodes (D >= 1)")

    delay = _int_option(config, "delay", 0)
    if delay < 0:
        raise ConfigError(f"delay must be non-negative, got {delay}")
    wake_a = _int_option(config, "wake_a", 1)
    wake_b = _int_option(config, "wake_b", wake_a + delay)

    kappa = _int_option(config, "kappa", resolve_kappa())
    seed = _int_option(config, "seed", 0)
    orientations = (_int_option(config, "orientation_a", 1), _int_option(config, "orientation_b", 1))
    spec = line_spec_from_config(config, (start_a, start_b))
    line = make_line(spec, seed=seed, orientations=orientations)

    agent = AgentSpec(algorithm, label_shift=_int_option(config, "label_shift", 0))
    scenario = Scenario(
        line=line,
        start_a=start_a,
        start_b=start_b,
        algorithm_a=agent,
        algorithm_b=agent,
        wake_a=wake_a,
        wake_b=wake_b,
        kappa=kappa,
        max_rounds=0,
    )
    validate_scenario(scenario)
    max_rounds = _int_option(config, "max_rounds", 0)
    if max_rounds == 0:
        try:
            max_rounds = default_round_budget(
                algorithm, scenario.distance, scenario_ell(scenario), kappa
            )
        except PreconditionError as exc:
            raise ConfigError(str(exc)) from exc
    return replace(scenario, max_rounds=max_rounds)
