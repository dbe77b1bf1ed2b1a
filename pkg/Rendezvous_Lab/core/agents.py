"""
Rendezvous agents as online state machines.

Three algorithms share one state type and one step function:

- CANON: the agent knows its distance and direction to the label-1 node of
  the canonical line. Phase i cuts the line into segments of 2**i nodes
  coloured red/blue alternately and searches in blocks {1, 8, 9} (red) or
  {1, 10, 11} (blue) of eleven.
- KNOWN_D: the agent knows the initial distance D. It sweeps radius
  D * kappa * log*(v), simulates the colouring on the labels every D-th node
  and then searches in periods whose shape depends on that colour.
- UNKNOWN_D: the agent guesses g = 1, 2, 3, ...; each phase waits, sweeps
  radius g * kappa * log*(v), derives a 9-bit search schedule from the colour
  of the stride-g path and runs kappa * log*(v) periods of nine blocks.

Moves are in the agent's own frame; the simulator turns them into global
moves with the agent's orientation sign. Positions recorded by an agent are
relative to its start node in that frame.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Tuple

from colouring import colour_in_window
from config import resolve_kappa
from errors import InternalDesyncError, PreconditionError
from numerics import log_star


logger = logging.getLogger(__name__)

CANON_BLOCKS = 11
RED_SEARCH_BLOCKS = frozenset({1, 8, 9})
BLUE_SEARCH_BLOCKS = frozenset({1, 10, 11})
SCHEDULE_BLOCKS = 9
WAIT_FACTOR = 36

_CV_EXPANSION = {"0": "0011", "1": "1100"}


class Algorithm(str, Enum):
    CANON = "canon"
    KNOWN_D = "known-d"
    UNKNOWN_D = "unknown-d"


class Move(Enum):
    STAY = 0
    RIGHT = 1
    LEFT = -1

    @property
    def delta(self) -> int:
        return self.value


class CanonSide(Enum):
    AT_OR_RIGHT_OF_O = "at-or-right"
    LEFT_OF_O = "left"


class CanonColour(Enum):
    RED = "red"
    BLUE = "blue"


class Stage(Enum):
    CANON = "canon"
    WAIT = "wait"
    EXPLORE = "explore"
    SEARCH = "search"


@dataclass(frozen=True)
class Observation:
    current_label: int
    local_clock: int


@dataclass(frozen=True)
class CanonKnowledge:
    dist_to_o: int
    side: CanonSide
    direction_to_o: Move


@dataclass
class AgentState:
    algorithm: Algorithm
    kappa: int
    knowledge: Optional[CanonKnowledge] = None
    distance: Optional[int] = None
    label_shift: int = 0
    clock: int = 0
    start_label: Optional[int] = None
    log_star_v: int = 0
    stage: Stage = Stage.CANON
    phase: int = 0
    block: int = 1
    period: int = 1
    offset: int = 0
    rel_pos: int = 0
    recorded_labels: Dict[int, int] = field(default_factory=dict)
    computed_colour: Optional[int] = None
    schedule: Optional[str] = None
    canon_colour: Optional[CanonColour] = None

    def clone(self) -> "AgentState":
        return replace(self, recorded_labels=dict(self.recorded_labels))


# ---------------------------------------------------------------------------
# Schedules and arithmetic
# ---------------------------------------------------------------------------

def canon_colour(dist_to_o: int, side: CanonSide, phase_i: int) -> CanonColour:
    """
    Colour of a node's segment in canonical phase i.

    Segments hold 2**i nodes and are aligned at O; the segment index is
    floor(d / 2**i) at or right of O and -ceil(d / 2**i) left of it. Even
    indices are red.
    """
    if phase_i < 0:
        raise PreconditionError(f"phase must be non-negative, got {phase_i}")
    if side == CanonSide.AT_OR_RIGHT_OF_O:
        index = dist_to_o >> phase_i
    else:
        index = -dist_to_o >> phase_i
    return CanonColour.RED if index % 2 == 0 else CanonColour.BLUE


def canon_knowledge_for(position: int, orientation: int) -> CanonKnowledge:
    """
    Knowledge of an agent starting at a global position of the canonical line.

    The direction to O is expressed in the agent's frame; at O itself the
    direction is never used and is reported as RIGHT.
    """
    side = CanonSide.AT_OR_RIGHT_OF_O if position >= 0 else CanonSide.LEFT_OF_O
    global_step = -1 if position > 0 else 1
    return CanonKnowledge(
        dist_to_o=abs(position),
        side=side,
        direction_to_o=Move(global_step * orientation),
    )


def s_string(c: int) -> str:
    """9-bit Stage-2 schedule for colour c: two MSB-first bits expanded, then a 1."""
    if c not in (0, 1, 2):
        raise PreconditionError(f"colour must be 0, 1 or 2, got {c}")
    return "".join(_CV_EXPANSION[bit] for bit in format(c, "02b")) + "1"


def epoch_of_phase(g: int) -> int:
    """Epoch index 1 + floor(log2 g) of phase g."""
    if g < 1:
        raise PreconditionError(f"phase must be >= 1, got {g}")
    return g.bit_length()


def phase_range(j: int) -> Tuple[int, int]:
    """First and last phase of epoch j."""
    if j < 1:
        raise PreconditionError(f"epoch must be >= 1, got {j}")
    return 1 << (j - 1), (1 << j) - 1


def phase_length(g: int, log_star_v: int, kappa: int) -> int:
    """Rounds in phase g: (72 * 2**j + 4g) * kappa * L with j the epoch of g."""
    j = epoch_of_phase(g)
    return (72 * (1 << j) + 4 * g) * kappa * log_star_v


def epoch_length(j: int, log_star_v: int, kappa: int) -> int:
    """Rounds in epoch j: 2**(j-1) * (75 * 2**j - 2) * kappa * L."""
    if j < 1:
        raise PreconditionError(f"epoch must be >= 1, got {j}")
    return (1 << (j - 1)) * (75 * (1 << j) - 2) * kappa * log_star_v


def first_epochs(m: int, log_star_v: int, kappa: int) -> int:
    """Rounds in epochs 1..m: 2 * kappa * L * (25 * 4**m - 2**m - 24)."""
    if m < 1:
        raise PreconditionError(f"epoch count must be >= 1, got {m}")
    return 2 * kappa * log_star_v * (25 * (1 << (2 * m)) - (1 << m) - 24)


def i_crit(distance: int) -> int:
    """Least canonical phase i with 2**(i+1) >= distance (0 for distance 1)."""
    if distance < 1:
        raise PreconditionError(f"distance must be >= 1, got {distance}")
    return max(0, (distance - 1).bit_length() - 1)


def d_crit(distance: int) -> int:
    """Least epoch whose phases all guess at least the distance: 1 + floor(log2 D)."""
    if distance < 1:
        raise PreconditionError(f"distance must be >= 1, got {distance}")
    return distance.bit_length()


# ---------------------------------------------------------------------------
# State machine
# ---------------------------------------------------------------------------

def agent_init(
    algorithm: Algorithm,
    knowledge: Optional[CanonKnowledge] = None,
    distance: Optional[int] = None,
    kappa: Optional[int] = None,
    label_shift: int = 0,
) -> AgentState:
    """
    Fresh agent state, positioned before its first round.

    Args:
        algorithm: Which rendezvous algorithm to run
        knowledge: Required for CANON
        distance: Required for KNOWN_D, at least 1
        kappa: Colouring termination constant; defaults to resolve_kappa()
        label_shift: Added to every observed label before use

    Raises:
        PreconditionError: On missing or invalid algorithm parameters
    """
    algorithm = Algorithm(algorithm)
    if kappa is None:
        kappa = resolve_kappa()
    if kappa < 1:
        raise PreconditionError(f"kappa must be >= 1, got {kappa}")
    if label_shift < 0:
        raise PreconditionError(f"label shift must be non-negative, got {label_shift}")

    if algorithm == Algorithm.CANON:
        if knowledge is None:
            raise PreconditionError("canon agents need their distance and direction to O")
        if knowledge.dist_to_o == 0 and knowledge.side != CanonSide.AT_OR_RIGHT_OF_O:
            raise PreconditionError("an agent at O must be on the at-or-right side")
        return AgentState(algorithm=algorithm, kappa=kappa, knowledge=knowledge, stage=Stage.CANON)

    if algorithm == Algorithm.KNOWN_D:
        if distance is None or distance < 1:
            raise PreconditionError(f"known-distance agents need D >= 1, got {distance}")
        return AgentState(
            algorithm=algorithm, kappa=kappa, distance=distance,
            label_shift=label_shift, stage=Stage.EXPLORE,
        )

    return AgentState(
        algorithm=algorithm, kappa=kappa, label_shift=label_shift,
        stage=Stage.WAIT, phase=1,
    )


def _sweep_move(offset: int, radius: int) -> Move:
    """Move at an offset into a right r, left 2r, right r sweep."""
    if offset < radius or offset >= 3 * radius:
        return Move.RIGHT
    return Move.LEFT


def _require_home(state: AgentState, where: str) -> None:
    if state.rel_pos != 0:
        raise InternalDesyncError(f"agent is {state.rel_pos} away from its start at the end of {where}")


def _record(state: AgentState, label: int) -> None:
    seen = state.recorded_labels.setdefault(state.rel_pos, label)
    if seen != label:
        raise InternalDesyncError(
            f"position {state.rel_pos} showed label {label}, previously {seen}"
        )


def _contracted_colour(state: AgentState, stride: int) -> int:
    nodes = state.kappa * state.log_star_v
    window = [state.recorded_labels[stride * k] for k in range(-nodes, nodes + 1)]
    return colour_in_window(window, nodes, state.kappa)


def _canon_move(state: AgentState) -> Move:
    if state.canon_colour is None:
        k = state.knowledge
        state.canon_colour = canon_colour(k.dist_to_o, k.side, state.phase)
    radius = 1 << (state.phase + 1)
    searching = state.block in (
        RED_SEARCH_BLOCKS if state.canon_colour == CanonColour.RED else BLUE_SEARCH_BLOCKS
    )
    move = _sweep_move(state.offset, radius) if searching else Move.STAY
    state.rel_pos += move.delta
    state.offset += 1
    if state.offset == 4 * radius:
        _require_home(state, f"canon phase {state.phase} block {state.block}")
        state.offset = 0
        state.block += 1
        if state.block > CANON_BLOCKS:
            state.block = 1
            state.phase += 1
            state.canon_colour = None
    return move


def _explore_move(state: AgentState, radius: int, label: int) -> Move:
    """One exploration step: record the current label, then move."""
    _record(state, label)
    move = _sweep_move(state.offset, radius)
    state.rel_pos += move.delta
    state.offset += 1
    return move


def _known_d_move(state: AgentState, label: int) -> Move:
    d = state.distance
    if state.stage == Stage.EXPLORE:
        radius = d * state.kappa * state.log_star_v
        move = _explore_move(state, radius, label)
        if state.offset == 4 * radius:
            _require_home(state, "the exploration sweep")
            state.computed_colour = _contracted_colour(state, d)
            logger.debug("known-D agent at label %d computed colour %d", state.start_label, state.computed_colour)
            state.stage = Stage.SEARCH
            state.offset = 0
            state.block = 1
        return move

    searching = state.computed_colour == 2 or (state.computed_colour == 1 and state.block == 1)
    move = _sweep_move(state.offset, d) if searching else Move.STAY
    state.rel_pos += move.delta
    state.offset += 1
    if state.offset == 4 * d:
        _require_home(state, f"search block {state.block}")
        state.offset = 0
        state.block = 2 if state.block == 1 else 1
    return move


def _unknown_d_move(state: AgentState, label: int) -> Move:
    g = state.phase
    big_l = state.kappa * state.log_star_v
    d = epoch_of_phase(g)

    if state.stage == Stage.WAIT:
        state.offset += 1
        if state.offset == WAIT_FACTOR * (1 << d) * big_l:
            state.stage = Stage.EXPLORE
            state.offset = 0
        return Move.STAY

    if state.stage == Stage.EXPLORE:
        radius = g * big_l
        move = _explore_move(state, radius, label)
        if state.offset == 4 * radius:
            _require_home(state, f"the phase {g} exploration sweep")
            state.computed_colour = _contracted_colour(state, g)
            state.schedule = s_string(state.computed_colour)
            state.stage = Stage.SEARCH
            state.offset = 0
            state.block = 1
            state.period = 1
        return move

    radius = 1 << d
    searching = state.schedule[state.block - 1] == "1"
    move = _sweep_move(state.offset, radius) if searching else Move.STAY
    state.rel_pos += move.delta
    state.offset += 1
    if state.offset == 4 * radius:
        _require_home(state, f"phase {g} period {state.period} block {state.block}")
        state.offset = 0
        state.block += 1
        if state.block > SCHEDULE_BLOCKS:
            state.block = 1
            state.period += 1
            if state.period > big_l:
                state.phase += 1
                state.period = 1
                state.stage = Stage.WAIT
    return move


def advance(state: AgentState, obs: Observation) -> Move:
    """
    In-place transition used by the simulator on states it owns.

    Raises:
        InternalDesyncError: On a skipped clock tick, a label that contradicts
            an earlier visit, or a sweep that does not return home
        PreconditionError: If the first observed label (after the shift) is
            below 2 for a label-driven algorithm
    """
    if obs.local_clock != state.clock + 1:
        raise InternalDesyncError(
            f"expected local clock {state.clock + 1}, observed {obs.local_clock}"
        )
    state.clock = obs.local_clock

    if state.algorithm == Algorithm.CANON:
        return _canon_move(state)

    label = obs.current_label + state.label_shift
    if state.start_label is None:
        if label < 2:
            raise PreconditionError(f"starting label must be >= 2 after the shift, got {label}")
        state.start_label = label
        state.log_star_v = log_star(label)

    if state.algorithm == Algorithm.KNOWN_D:
        return _known_d_move(state, label)
    return _unknown_d_move(state, label)


def agent_step(state: AgentState, obs: Observation) -> Tuple[AgentState, Move]:
    """
    Pure single-round transition of an agent.

    Args:
        state: State after the previous round (left untouched)
        obs: Label of the current node and the agent's local clock

    Returns:
        (new state, move in the agent's frame)
    """
    new_state = state.clone()
    move = advance(new_state, obs)
    return new_state, move
