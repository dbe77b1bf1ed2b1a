"""
Early-stopping Cole-Vishkin 3-colouring of paths and cycles.

Each node runs a small state machine:

- round 1 sends its ID to both neighbours;
- round 2 (Phase 0) classifies the node as a local minimum, a local maximum
  or an interior node with a parent (smaller neighbour) and a child;
- Phase 1 repeatedly recolours interior nodes with the Cole-Vishkin choice
  until the colour drops into 0..51 or a neighbour settles first;
- Phase 2 is a 56-round round robin in which each node picks the smallest
  final colour in {0, 1, 2} not already used by a neighbour, then stops.

A node with label x terminates within log*(x) + 59 rounds regardless of the
labels around it, which is what lets a mobile agent simulate the run on the
labels it has seen.

Messages sent in round t are delivered in round t + 1: ``node_step`` ingests
its inbox before acting. Neighbour ``A`` of node i is node i - 1 and
neighbour ``B`` is node i + 1.
"""

import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple, Union

from config import resolve_kappa
from errors import ColouringInvariantError, NonTerminationError, PreconditionError
from numerics import cv_choice, log_star


logger = logging.getLogger(__name__)

# Phase-1 colours below this are "settled" and go straight to Phase 2
SETTLED_LIMIT = 52
ROUND_ROBIN = 56
FINAL_COLOURS = (0, 1, 2)

# Slack over the log*(x) + 59 termination guarantee for default budgets
ROUND_BUDGET_SLACK = 70
TERMINATION_SLACK = 59


class Sentinel(Enum):
    """Special Phase-1 colours, kept apart from every natural number."""

    LMIN = -4
    LMAX = -3
    PDONE = -2
    CDONE = -1

    @property
    def token(self) -> int:
        """Phase-2 round-robin slot: LMIN 52, LMAX 53, PDONE 54, CDONE 55."""
        return ROUND_ROBIN + self.value


Phase1Colour = Union[int, Sentinel]


class Side(Enum):
    A = "A"
    B = "B"


class Topology(str, Enum):
    PATH = "path"
    CYCLE = "cycle"


class MessageKey(Enum):
    ID = "ID"
    P1 = "P1"
    FINAL = "final"


@dataclass(frozen=True)
class Message:
    key: MessageKey
    value: Union[int, Sentinel]


@dataclass
class NodeState:
    my_id: int
    id_a: Optional[int] = None
    id_b: Optional[int] = None
    my_phase1_col: Optional[Phase1Colour] = None
    parent: Optional[Side] = None
    child: Optional[Side] = None
    a_col_p1: Optional[Phase1Colour] = None
    b_col_p1: Optional[Phase1Colour] = None
    a_col_final: Optional[int] = None
    b_col_final: Optional[int] = None
    do_phase1: bool = False
    my_final_col: Optional[int] = None
    terminated: bool = False
    phase1_rounds: int = 0
    termination_round: Optional[int] = None


@dataclass(frozen=True)
class ColouringResult:
    final_colours: Tuple[int, ...]
    termination_rounds: Tuple[int, ...]
    phase1_colours: Tuple[Phase1Colour, ...]
    phase1_rounds: Tuple[int, ...]

    def is_proper(self, topology: Topology) -> bool:
        colours = self.final_colours
        pairs = zip(colours, colours[1:])
        if all(a != b for a, b in pairs):
            return topology != Topology.CYCLE or colours[0] != colours[-1]
        return False


def is_settled(colour: Optional[Phase1Colour]) -> bool:
    """True for plain colours 0..51."""
    return isinstance(colour, int) and 0 <= colour < SETTLED_LIMIT


def _token(colour: Phase1Colour) -> int:
    return colour.token if isinstance(colour, Sentinel) else colour


def choose_new_phase1_colour(my: int, parent_col: Phase1Colour, child_col: Phase1Colour) -> Phase1Colour:
    """
    One Phase-1 recolouring step for an interior node.

    Args:
        my: Current Phase-1 colour (at least 52 when reached from Phase 1)
        parent_col: Parent's last known Phase-1 colour
        child_col: Child's last known Phase-1 colour

    Returns:
        PDONE if the parent has settled, else CDONE if the child has, else
        the Cole-Vishkin choice against the parent (0 stands in for a
        sentinel parent colour)
    """
    if is_settled(parent_col):
        return Sentinel.PDONE
    if is_settled(child_col):
        return Sentinel.CDONE
    if isinstance(parent_col, Sentinel):
        return cv_choice(my, 0)
    return cv_choice(my, parent_col)


def _ingest(state: NodeState, msg: Optional[Message], side: Side) -> None:
    if msg is None:
        return
    if msg.key == MessageKey.ID:
        if side == Side.A:
            state.id_a = msg.value
        else:
            state.id_b = msg.value
    elif msg.key == MessageKey.P1:
        if side == Side.A:
            state.a_col_p1 = msg.value
        else:
            state.b_col_p1 = msg.value
    elif side == Side.A:
        state.a_col_final = msg.value
    else:
        state.b_col_final = msg.value


def _phase0(state: NodeState) -> Phase1Colour:
    me = state.my_id
    # absent neighbours lose both comparisons
    if (state.id_a is None or me < state.id_a) and (state.id_b is None or me < state.id_b):
        return Sentinel.LMIN
    if (state.id_a is None or me > state.id_a) and (state.id_b is None or me > state.id_b):
        return Sentinel.LMAX
    if state.id_a < me:
        state.parent, state.child = Side.A, Side.B
    else:
        state.parent, state.child = Side.B, Side.A
    return me


def advance(
    state: NodeState,
    inbox_a: Optional[Message],
    inbox_b: Optional[Message],
    clock: int,
) -> Tuple[Optional[Message], Optional[Message]]:
    """
    In-place transition used by the runner on states it owns.

    Returns:
        (message for neighbour A, message for neighbour B)
    """
    _ingest(state, inbox_a, Side.A)
    _ingest(state, inbox_b, Side.B)

    if clock == 1:
        msg = Message(MessageKey.ID, state.my_id)
        return msg, msg

    if clock == 2:
        colour = _phase0(state)
        state.my_phase1_col = colour
        state.do_phase1 = isinstance(colour, int) and not is_settled(colour)
        msg = Message(MessageKey.P1, colour)
        return msg, msg

    if state.do_phase1:
        if state.parent == Side.A:
            parent_col, child_col = state.a_col_p1, state.b_col_p1
        else:
            parent_col, child_col = state.b_col_p1, state.a_col_p1
        colour = choose_new_phase1_colour(state.my_phase1_col, parent_col, child_col)
        state.my_phase1_col = colour
        state.phase1_rounds += 1
        state.do_phase1 = isinstance(colour, int) and not is_settled(colour)
        msg = Message(MessageKey.P1, colour)
        return msg, msg

    if clock % ROUND_ROBIN == _token(state.my_phase1_col):
        taken = {state.a_col_final, state.b_col_final}
        final = min(c for c in FINAL_COLOURS if c not in taken)
        state.my_final_col = final
        state.terminated = True
        state.termination_round = clock
        msg = Message(MessageKey.FINAL, final)
        return msg, msg

    return None, None


def node_step(
    state: NodeState,
    inbox_a: Optional[Message],
    inbox_b: Optional[Message],
    clock: int,
) -> Tuple[NodeState, Optional[Message], Optional[Message]]:
    """
    Pure single-round transition of one node.

    Args:
        state: Node state after round clock - 1 (left untouched)
        inbox_a: Message neighbour A sent in round clock - 1, if any
        inbox_b: Message neighbour B sent in round clock - 1, if any
        clock: Current round number, starting at 1

    Returns:
        (new state, message for A, message for B)

    Raises:
        PreconditionError: If clock < 1 or the node has already terminated
    """
    if clock < 1:
        raise PreconditionError(f"clock must be >= 1, got {clock}")
    if state.terminated:
        raise PreconditionError(f"node {state.my_id} has already terminated")
    new_state = replace(state)
    out_a, out_b = advance(new_state, inbox_a, inbox_b, clock)
    return new_state, out_a, out_b


def default_max_rounds(labels: Sequence[int]) -> int:
    return log_star(max(labels)) + ROUND_BUDGET_SLACK


def _validate(labels: Sequence[int], topology: Topology) -> None:
    n = len(labels)
    if topology == Topology.PATH and n < 2:
        raise PreconditionError(f"a path needs at least 2 nodes, got {n}")
    if topology == Topology.CYCLE and n < 3:
        raise PreconditionError(f"a cycle needs at least 3 nodes, got {n}")
    if len(set(labels)) != n:
        raise PreconditionError("labels must be pairwise distinct")
    smallest = min(labels)
    if smallest < 2:
        raise PreconditionError(f"labels must be >= 2, found {smallest}")


def _check_neighbour_colours(states: List[NodeState], topology: Topology, clock: int) -> None:
    n = len(states)
    last = n if topology == Topology.CYCLE else n - 1
    for i in range(last):
        j = (i + 1) % n
        if states[i].my_phase1_col == states[j].my_phase1_col:
            raise ColouringInvariantError(
                f"round {clock}: nodes {i} and {j} share Phase-1 colour {states[i].my_phase1_col}"
            )


def _execute(
    labels: Sequence[int],
    topology: Topology,
    max_rounds: int,
    check_invariants: bool,
    watch: Optional[int] = None,
) -> List[NodeState]:
    n = len(labels)
    cycle = topology == Topology.CYCLE
    states = [NodeState(my_id=label) for label in labels]
    inbox_a: List[Optional[Message]] = [None] * n
    inbox_b: List[Optional[Message]] = [None] * n
    active = list(range(n))

    for clock in range(1, max_rounds + 1):
        next_a: List[Optional[Message]] = [None] * n
        next_b: List[Optional[Message]] = [None] * n
        for i in active:
            out_a, out_b = advance(states[i], inbox_a[i], inbox_b[i], clock)
            # node i is the B neighbour of i - 1 and the A neighbour of i + 1
            if out_a is not None and (i > 0 or cycle):
                next_b[(i - 1) % n] = out_a
            if out_b is not None and (i < n - 1 or cycle):
                next_a[(i + 1) % n] = out_b
        inbox_a, inbox_b = next_a, next_b

        if check_invariants and clock >= 2:
            _check_neighbour_colours(states, topology, clock)

        active = [i for i in active if not states[i].terminated]
        if not active or (watch is not None and states[watch].terminated):
            return states

    raise NonTerminationError(
        f"{len(active)} of {n} nodes still running after {max_rounds} rounds"
    )


def run_local(
    labels: Sequence[int],
    topology: Topology = Topology.PATH,
    max_rounds: Optional[int] = None,
    check_invariants: bool = True,
) -> ColouringResult:
    """
    Run the colouring synchronously on a finite path or cycle.

    Args:
        labels: Node IDs in path order, pairwise distinct and >= 2
        topology: PATH or CYCLE (cycles link the last node to the first)
        max_rounds: Round budget; defaults to log*(max label) + 70
        check_invariants: Assert neighbour Phase-1 colours differ every round

    Returns:
        ColouringResult with one entry per node

    Raises:
        PreconditionError: If the labels or node count are invalid
        NonTerminationError: If some node is still running after max_rounds
        ColouringInvariantError: If neighbour Phase-1 colours ever coincide
    """
    topology = Topology(topology)
    _validate(labels, topology)
    if max_rounds is None:
        max_rounds = default_max_rounds(labels)

    states = _execute(labels, topology, max_rounds, check_invariants)
    logger.debug(
        "Coloured %s of %d nodes in %d rounds",
        topology.value, len(labels), max(s.termination_round for s in states),
    )
    return ColouringResult(
        final_colours=tuple(s.my_final_col for s in states),
        termination_rounds=tuple(s.termination_round for s in states),
        phase1_colours=tuple(s.my_phase1_col for s in states),
        phase1_rounds=tuple(s.phase1_rounds for s in states),
    )


def window_radius(centre_label: int, kappa: int) -> int:
    """Nodes needed on each side of a centre with this label."""
    return kappa * log_star(centre_label)


@lru_cache(maxsize=4096)
def _centre_colour(window: Tuple[int, ...], centre_index: int) -> int:
    _validate(window, Topology.PATH)
    states = _execute(window, Topology.PATH, default_max_rounds(window), True, watch=centre_index)
    return states[centre_index].my_final_col


def colour_in_window(
    window_labels: Sequence[int],
    centre_index: int,
    kappa: Optional[int] = None,
) -> int:
    """
    Final colour of the centre node when the colouring runs on a window.

    Only the centre has to finish; the rest of the window merely has to be
    wide enough that the path ends cannot influence it.

    Args:
        window_labels: Labels of consecutive nodes
        centre_index: Index of the node whose colour is wanted
        kappa: Termination constant; defaults to resolve_kappa()

    Returns:
        0, 1 or 2

    Raises:
        PreconditionError: If fewer than kappa * log*(centre label) nodes lie
            on either side of the centre, or the labels are invalid
    """
    if kappa is None:
        kappa = resolve_kappa()
    window = tuple(window_labels)
    if not 0 <= centre_index < len(window):
        raise PreconditionError(f"centre index {centre_index} outside window of {len(window)}")
    needed = window_radius(window[centre_index], kappa)
    if centre_index < needed or len(window) - 1 - centre_index < needed:
        raise PreconditionError(
            f"window too small: need {needed} nodes each side of the centre, "
            f"have {centre_index} and {len(window) - 1 - centre_index}"
        )
    return _centre_colour(window, centre_index)
