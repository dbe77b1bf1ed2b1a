"""
Parameter sweeps and the bound verification suite.

Every trial is described by a plain scenario config dictionary, the same
shape ``scenario_from_config`` and scenario files use, so any failing trial
can be replayed with a single command line or written to disk with
``save_config``.
"""

import csv
import logging
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, Iterable, List, Optional, Set, TextIO, Tuple

from agents import (
    Algorithm,
    Observation,
    advance,
    agent_init,
    d_crit,
    first_epochs,
    i_crit,
    phase_length,
    phase_range,
)
from bounds import CANON_FACTOR
from colouring import (
    TERMINATION_SLACK,
    Topology,
    colour_in_window,
    run_local,
    window_radius,
)
from config import DEFAULT_SEED, KAPPA, resolve_kappa
from errors import ConfigError, RendezvousLabError
from line import (
    MASK64,
    SMALL_LABEL_RANGE,
    GeneratorKind,
    LabelGenSpec,
    LineInstance,
    canonical_label,
    make_line,
)
from numerics import (
    binary_rep,
    cv_choice,
    decode_sf,
    encode_sf,
    first_diff_index,
    log_star,
    tower,
)
from simulator import Met, run_rendezvous, scenario_bound, scenario_from_config, stride_colour


logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "algorithm", "generator", "D", "delay", "orientation_a", "orientation_b",
    "trials", "max_elapsed", "bound", "ok",
]

# Order of scenario keys in reproduction command lines
REPRO_KEYS = (
    "algorithm", "generator", "seed", "start_a", "start_b", "distance", "delay",
    "wake_a", "wake_b", "orientation_a", "orientation_b", "tier", "radius",
    "labels_file", "label_shift", "kappa", "max_rounds",
)

RUN_CLI = "python Rendezvous_Lab/core/run_cli.py"


@dataclass(frozen=True)
class SweepSpec:
    """
    A grid of rendezvous cells.

    A cell is one (generator, D, delay, orientation pair); each cell runs
    ``trials`` scenarios with start positions, line seeds and which agent
    wakes late drawn from a generator seeded by ``seed`` and the cell key.
    """

    algorithm: Algorithm
    distances: Tuple[int, ...]
    delays: Tuple[int, ...]
    generators: Tuple[GeneratorKind, ...] = (GeneratorKind.CANONICAL,)
    orientations: Tuple[Tuple[int, int], ...] = ((1, 1), (1, -1))
    trials: int = 1
    seed: int = DEFAULT_SEED
    kappa: int = KAPPA
    tier: int = 4
    label_shift: Optional[int] = None
    max_rounds: int = 0

    def validate(self) -> None:
        if not self.distances or not self.delays or not self.generators or not self.orientations:
            raise ConfigError("sweep ranges must be non-empty")
        if min(self.distances) < 1:
            raise ConfigError("distances must be >= 1")
        if min(self.delays) < 0:
            raise ConfigError("delays must be >= 0")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")


@dataclass(frozen=True)
class CellResult:
    algorithm: Algorithm
    generator: GeneratorKind
    distance: int
    delay: int
    orientation_a: int
    orientation_b: int
    trials: int
    max_elapsed: Optional[int]
    bound: int
    ok: bool
    failure: Optional[Dict[str, Any]] = field(default=None, compare=False)

    @property
    def key(self) -> Tuple:
        return (self.generator.value, self.distance, self.delay, self.orientation_a, self.orientation_b)

    def as_row(self) -> List[Any]:
        elapsed = "timeout" if self.max_elapsed is None else self.max_elapsed
        return [
            self.algorithm.value, self.generator.value, self.distance, self.delay,
            self.orientation_a, self.orientation_b, self.trials, elapsed, self.bound,
            "true" if self.ok else "false",
        ]


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    ok: bool
    detail: str


def repro_command(config: Dict[str, Any]) -> str:
    """Command line that replays one trial."""
    parts = [RUN_CLI]
    # kappa is a top-level flag and has to precede the subcommand
    if "kappa" in config:
        parts.extend(["--kappa", str(config["kappa"])])
    parts.append("rendezvous")
    for key in REPRO_KEYS:
        if key in config and key != "kappa":
            parts.append(f"--{key.replace('_', '-')}")
            parts.append(str(config[key]))
    return " ".join(parts)


def _cell_rng(spec: SweepSpec, generator: GeneratorKind, distance: int, delay: int,
              orientation: Tuple[int, int], trial: int) -> random.Random:
    return random.Random(
        f"{spec.seed}:{spec.algorithm.value}:{generator.value}:{distance}:{delay}:"
        f"{orientation[0]}:{orientation[1]}:{trial}"
    )


def trial_config(spec: SweepSpec, generator: GeneratorKind, distance: int, delay: int,
                 orientation: Tuple[int, int], trial: int) -> Dict[str, Any]:
    """Scenario config for one trial of one cell."""
    rng = _cell_rng(spec, generator, distance, delay, orientation, trial)
    start_a = rng.randint(-4 * distance, 4 * distance)
    start_b = start_a + rng.choice((distance, -distance))
    late_b = rng.random() < 0.5
    label_shift = spec.label_shift
    if label_shift is None:
        # the canonical line carries label 1, which the label-driven agents reject
        uses_labels = spec.algorithm != Algorithm.CANON
        label_shift = 1 if uses_labels and generator == GeneratorKind.CANONICAL else 0
    return {
        "algorithm": spec.algorithm.value,
        "generator": generator.value,
        "seed": rng.getrandbits(64),
        "start_a": start_a,
        "start_b": start_b,
        "wake_a": 1 if late_b else 1 + delay,
        "wake_b": 1 + delay if late_b else 1,
        "orientation_a": orientation[0],
        "orientation_b": orientation[1],
        "tier": spec.tier,
        "label_shift": label_shift,
        "kappa": spec.kappa,
        "max_rounds": spec.max_rounds,
    }


def run_trial(config: Dict[str, Any]) -> Tuple[Optional[int], int]:
    """
    Run one trial.

    Returns:
        (elapsed rounds or None on timeout, bound)
    """
    scenario = scenario_from_config(config)
    outcome, _ = run_rendezvous(scenario, record_trace=False)
    elapsed = outcome.elapsed_from_earlier_wake if isinstance(outcome, Met) else None
    return elapsed, scenario_bound(scenario)


def run_cell(spec: SweepSpec, generator: GeneratorKind, distance: int, delay: int,
             orientation: Tuple[int, int]) -> CellResult:
    max_elapsed: Optional[int] = 0
    bound = None
    ok = True
    failure = None
    for trial in range(spec.trials):
        config = trial_config(spec, generator, distance, delay, orientation, trial)
        elapsed, trial_bound = run_trial(config)
        bound = trial_bound if bound is None else min(bound, trial_bound)
        if elapsed is None:
            max_elapsed = None
        elif max_elapsed is not None:
            max_elapsed = max(max_elapsed, elapsed)
        if elapsed is None or elapsed > trial_bound:
            if failure is None:
                failure = config
            ok = False
    return CellResult(
        algorithm=spec.algorithm,
        generator=generator,
        distance=distance,
        delay=delay,
        orientation_a=orientation[0],
        orientation_b=orientation[1],
        trials=spec.trials,
        max_elapsed=max_elapsed,
        bound=bound,
        ok=ok,
        failure=failure,
    )


def _run_cell_tuple(spec: SweepSpec, cell: Tuple) -> CellResult:
    return run_cell(spec, *cell)


def run_sweep(spec: SweepSpec, workers: int = 1) -> List[CellResult]:
    """
    Run every cell of a sweep.

    Cells are independent and CPU bound, so with ``workers`` > 1 they run in
    worker processes; rows come back sorted by cell key either way.
    """
    spec.validate()
    cells = [
        (generator, distance, delay, orientation)
        for generator in spec.generators
        for distance in spec.distances
        for delay in spec.delays
        for orientation in spec.orientations
    ]
    logger.debug("Sweeping %d cells of %s with %d worker(s)", len(cells), spec.algorithm.value, workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(partial(_run_cell_tuple, spec), cells))
    else:
        results = [_run_cell_tuple(spec, cell) for cell in cells]
    return sorted(results, key=lambda result: result.key)


def write_sweep_csv(results: Iterable[CellResult], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SWEEP_COLUMNS)
    for result in results:
        writer.writerow(result.as_row())


def first_failure(results: Iterable[CellResult]) -> Optional[CellResult]:
    return next((result for result in results if not result.ok), None)


# ---------------------------------------------------------------------------
# Verification suite
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyScale:
    colour_instances: int
    colour_max_nodes: int
    tower_instances: int
    tower_max_nodes: int
    numeric_samples: int
    canon_distances: Tuple[int, ...]
    canon_max_doubling: int
    known_distances: Tuple[int, ...]
    oracle_samples: int
    no_d_distances: Tuple[int, ...]
    no_d_generators: Tuple[GeneratorKind, ...]
    phase_count: int
    window_samples: int


FULL_SCALE = VerifyScale(
    colour_instances=950,
    colour_max_nodes=5000,
    tower_instances=50,
    tower_max_nodes=64,
    numeric_samples=10000,
    canon_distances=tuple(range(1, 257)),
    canon_max_doubling=12,
    known_distances=tuple(range(1, 65)),
    oracle_samples=500,
    no_d_distances=tuple(range(1, 17)),
    no_d_generators=(GeneratorKind.HUGE_NEIGHBOURS, GeneratorKind.RANDOM_WINDOW),
    phase_count=64,
    window_samples=200,
)

QUICK_SCALE = VerifyScale(
    colour_instances=40,
    colour_max_nodes=300,
    tower_instances=5,
    tower_max_nodes=16,
    numeric_samples=1000,
    canon_distances=(1, 2, 3, 5, 8),
    canon_max_doubling=4,
    known_distances=(1, 2),
    oracle_samples=20,
    no_d_distances=(1, 2),
    no_d_generators=(GeneratorKind.HUGE_NEIGHBOURS,),
    phase_count=6,
    window_samples=10,
)


def _distinct_labels(rng: random.Random, n: int, draw: Callable[[random.Random], int],
                     exclude: Optional[Set[int]] = None) -> List[int]:
    labels: List[int] = []
    seen = set(exclude or ())
    while len(labels) < n:
        value = draw(rng)
        if value not in seen:
            seen.add(value)
            labels.append(value)
    return labels


def _random_64(rng: random.Random) -> int:
    return rng.randint(2, 1 << 64)


def _random_tower_magnitude(rng: random.Random) -> int:
    # at least tower(4), up to tower(5) bits wide
    bits = rng.randint(tower(4).bit_length(), tower(4))
    return rng.getrandbits(bits) | (1 << (bits - 1))


def _check_colouring(labels: List[int], topology: Topology) -> Optional[str]:
    try:
        result = run_local(labels, topology)
    except RendezvousLabError as exc:
        return f"{topology.value} n={len(labels)}: {exc}"
    if not result.is_proper(topology):
        return f"{topology.value} n={len(labels)}: colouring is not proper"
    for label, finished in zip(labels, result.termination_rounds):
        if finished > log_star(label) + TERMINATION_SLACK:
            return f"{topology.value} n={len(labels)}: label {label} finished in round {finished}"
    return None


def criterion_colouring(scale: VerifyScale, seed: int) -> CriterionResult:
    rng = random.Random(seed)
    jobs = [(scale.colour_max_nodes, _random_64)] * scale.colour_instances
    jobs += [(scale.tower_max_nodes, _random_tower_magnitude)] * scale.tower_instances
    for max_nodes, draw in jobs:
        topology = rng.choice((Topology.PATH, Topology.CYCLE))
        low = 2 if topology == Topology.PATH else 3
        labels = _distinct_labels(rng, rng.randint(low, max(low, max_nodes)), draw)
        problem = _check_colouring(labels, topology)
        if problem:
            return CriterionResult(1, "early-stopping colouring", False, problem)
    return CriterionResult(1, "early-stopping colouring", True, f"{len(jobs)} instances")


def criterion_numerics(scale: VerifyScale, seed: int) -> CriterionResult:
    rng = random.Random(seed)
    name = "suffix-free encoding and colour choice"

    def draw() -> int:
        return rng.getrandbits(rng.randint(1, 128))

    for _ in range(scale.numeric_samples):
        a, b, c = draw(), draw(), draw()
        if a == b or b == c:
            continue
        shorter = min(len(binary_rep(a)), len(binary_rep(b)))
        if first_diff_index(a, b) > 2 * shorter + 1:
            return CriterionResult(2, name, False, f"differing index too large for ({a}, {b})")
        if cv_choice(a, b) > 8 * len(binary_rep(min(a, b))) + 3:
            return CriterionResult(2, name, False, f"cv_choice({a}, {b}) out of range")
        if cv_choice(a, b) == cv_choice(b, c):
            return CriterionResult(2, name, False, f"cv_choice collision on ({a}, {b}, {c})")
        if decode_sf(encode_sf(binary_rep(a))) != binary_rep(a):
            return CriterionResult(2, name, False, f"decode_sf does not invert encode_sf for {a}")
    return CriterionResult(2, name, True, f"{scale.numeric_samples} samples")


def _sweep_verdict(number: int, name: str, rows: List[CellResult]) -> CriterionResult:
    failed = first_failure(rows)
    if failed is not None:
        return CriterionResult(number, name, False, f"cell {failed.key}: {repro_command(failed.failure)}")
    return CriterionResult(number, name, True, f"{len(rows)} cells")


@dataclass(frozen=True)
class RunSettings:
    """Knobs shared by every rendezvous criterion of one verify run."""

    seed: int
    kappa: int
    workers: int = 1
    max_rounds: int = 0


def canon_rows(scale: VerifyScale, settings: RunSettings) -> List[CellResult]:
    rows: List[CellResult] = []
    for distance in scale.canon_distances:
        delays = {0, 1, 2, 3, 48 * (1 << i_crit(distance)) + 1}
        delays.update(5 * (1 << i) for i in range(scale.canon_max_doubling + 1))
        spec = SweepSpec(
            algorithm=Algorithm.CANON, distances=(distance,), delays=tuple(sorted(delays)),
            seed=settings.seed, kappa=settings.kappa, max_rounds=settings.max_rounds,
        )
        rows.extend(run_sweep(spec, settings.workers))
    return rows


KNOWN_D_GENERATORS = (GeneratorKind.RANDOM_WINDOW, GeneratorKind.HUGE_NEIGHBOURS)


def start_log_star_ceiling(generator: GeneratorKind, distance: int) -> int:
    """
    Largest log* a sweep start label can have on this generator.

    Sweep starts lie within 5 * D of the origin, and canonical lines are
    shifted by one for the label-driven algorithms.

    Raises:
        ConfigError: For generators sweeps do not draw from
    """
    if generator == GeneratorKind.RANDOM_WINDOW:
        return log_star(MASK64 + 2)
    if generator == GeneratorKind.HUGE_NEIGHBOURS:
        return log_star(SMALL_LABEL_RANGE[-1])
    if generator == GeneratorKind.CANONICAL:
        return log_star(10 * distance + 2)
    raise ConfigError(f"sweeps do not draw start labels from {generator.value}")


def _log_star_levels(generators: Iterable[GeneratorKind], distance: int) -> range:
    return range(1, max(start_log_star_ceiling(g, distance) for g in generators) + 1)


def known_d_delays(distance: int, kappa: int,
                   generators: Tuple[GeneratorKind, ...] = KNOWN_D_GENERATORS) -> Tuple[int, ...]:
    """Small delays plus one just past each possible exploration sweep."""
    delays = {0, 1, 3, 17}
    delays.update(4 * distance * kappa * level + 1 for level in _log_star_levels(generators, distance))
    return tuple(sorted(delays))


def known_d_rows(distances: Iterable[int], settings: RunSettings,
                 generators: Tuple[GeneratorKind, ...] = KNOWN_D_GENERATORS, tier: int = 4,
                 delays: Optional[Tuple[int, ...]] = None) -> List[CellResult]:
    rows: List[CellResult] = []
    for distance in distances:
        spec = SweepSpec(
            algorithm=Algorithm.KNOWN_D, distances=(distance,),
            delays=delays or known_d_delays(distance, settings.kappa, generators),
            generators=generators, seed=settings.seed, kappa=settings.kappa,
            tier=tier, max_rounds=settings.max_rounds,
        )
        rows.extend(run_sweep(spec, settings.workers))
    return rows


def no_d_delays(distance: int, kappa: int, generators: Tuple[GeneratorKind, ...]) -> Tuple[int, ...]:
    """Delays around the first guess that covers D, and past its epochs for every log*."""
    d = d_crit(distance)
    delays = {0, 4 * (1 << d) - 1, 4 * (1 << d) + 1}
    delays.update(first_epochs(d, level, kappa) + 1 for level in _log_star_levels(generators, distance))
    return tuple(sorted(delays))


def no_d_rows(scale: VerifyScale, settings: RunSettings) -> List[CellResult]:
    rows: List[CellResult] = []
    for distance in scale.no_d_distances:
        delays = no_d_delays(distance, settings.kappa, scale.no_d_generators)
        spec = SweepSpec(
            algorithm=Algorithm.UNKNOWN_D, distances=(distance,), delays=delays,
            generators=scale.no_d_generators, seed=settings.seed, kappa=settings.kappa,
            max_rounds=settings.max_rounds,
        )
        rows.extend(run_sweep(spec, settings.workers))
    return rows


def _random_window_line(rng: random.Random, kappa: int) -> Tuple[LineInstance, int, int, str]:
    line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), seed=rng.getrandbits(64))
    position = rng.randint(-1000, 1000)
    distance = rng.randint(1, 64)
    return line, position, distance, f"seed={line.seed} position={position} D={distance}"


def _ascending_run_line(rng: random.Random, kappa: int) -> Tuple[LineInstance, int, int, str]:
    """
    Explicit line whose labels climb by one around the first agent at 0.

    The run starts at label 2 and stays below 52 near both agents, where the
    colouring settles immediately; a window that is too narrow then hands
    both agents the same colour. Random 64-bit labels pad the line left of
    the run.
    """
    distance = rng.randint(1, 2)
    centre = rng.randint(3 * distance + 2, 16 - distance)
    reach = kappa * log_star(centre + distance) * distance
    low, high = -reach, distance + reach
    run_start = -(centre - 2)
    padding = _distinct_labels(
        rng, max(0, run_start - low), _random_64, exclude=set(range(2, centre + high + 1)),
    )
    labels = padding + [centre + pos for pos in range(max(low, run_start), high + 1)]
    line = make_line(LabelGenSpec(GeneratorKind.EXPLICIT, labels=tuple(labels), origin_offset=low))
    return line, 0, distance, f"ascending run at label {centre} D={distance}"


def criterion_colour_oracle(scale: VerifyScale, seed: int, kappa: int) -> CriterionResult:
    rng = random.Random(seed)
    name = "known-distance colours differ"
    for _ in range(scale.oracle_samples):
        for build in (_random_window_line, _ascending_run_line):
            line, position, distance, where = build(rng, kappa)
            here = stride_colour(line, position, distance, kappa)
            there = stride_colour(line, position + distance, distance, kappa)
            if here == there:
                return CriterionResult(5, name, False, f"{where}: both agents coloured {here}")
    return CriterionResult(5, name, True, f"{2 * scale.oracle_samples} lines")


def measure_phase_lengths(phases: int, kappa: int) -> List[int]:
    """
    Step counts of the first ``phases`` phases of a free-running unknown-distance agent.

    The agent starts at label 1 of the canonical line with a label shift of
    1, so its starting label is 2 and log* of it is 1.
    """
    state = agent_init(Algorithm.UNKNOWN_D, kappa=kappa, label_shift=1)
    position = 0
    clock = 0
    count = 0
    lengths: List[int] = []
    while len(lengths) < phases:
        clock += 1
        phase = state.phase
        move = advance(state, Observation(canonical_label(position), clock))
        position += move.delta
        count += 1
        if state.phase != phase:
            lengths.append(count)
            count = 0
    return lengths


def criterion_phase_arithmetic(scale: VerifyScale, kappa: int) -> CriterionResult:
    name = "phase and epoch lengths"
    lengths = measure_phase_lengths(scale.phase_count, kappa)
    for g, counted in enumerate(lengths, start=1):
        if counted != phase_length(g, 1, kappa):
            return CriterionResult(7, name, False, f"phase {g} took {counted} rounds")
    j = 1
    while phase_range(j)[1] <= len(lengths):
        total = sum(lengths[:phase_range(j)[1]])
        if total != first_epochs(j, 1, kappa):
            return CriterionResult(7, name, False, f"epochs 1..{j} took {total} rounds")
        j += 1
    return CriterionResult(7, name, True, f"{len(lengths)} phases")


# log* of the largest 64-bit label _random_64 draws
LOG_STAR_64 = log_star(1 << 64)

WindowLabels = Tuple[Dict[int, int], int]


def _random_window(rng: random.Random, kappa: int) -> WindowLabels:
    centre = _random_64(rng)
    radius = window_radius(centre, kappa)
    offsets = [k for k in range(-2 * radius, 2 * radius + 1) if k != 0]
    labels = dict(zip(offsets, _distinct_labels(rng, len(offsets), _random_64, exclude={centre})))
    labels[0] = centre
    return labels, radius


def _sorted_window(rng: random.Random, kappa: int) -> WindowLabels:
    half = 2 * kappa * LOG_STAR_64
    values = sorted(_distinct_labels(rng, 2 * half + 1, _random_64))
    if rng.random() < 0.5:
        values.reverse()
    labels = {k: values[half + k] for k in range(-half, half + 1)}
    return labels, window_radius(labels[0], kappa)


def _ascending_run_window(rng: random.Random, kappa: int) -> WindowLabels:
    # labels centre + k down to 2 on the left; random 64-bit labels elsewhere
    centre = rng.randint(8, 16)
    radius = window_radius(centre, kappa)
    offsets = range(-2 * radius, 2 * radius + 1)
    labels = {k: centre + k for k in offsets if abs(k) <= centre - 2}
    gaps = [k for k in offsets if k not in labels]
    labels.update(zip(gaps, _distinct_labels(rng, len(gaps), _random_64, exclude=set(labels.values()))))
    return labels, radius


WINDOW_FAMILIES: Tuple[Tuple[str, Callable[[random.Random, int], WindowLabels]], ...] = (
    ("random", _random_window),
    ("sorted", _sorted_window),
    ("ascending run", _ascending_run_window),
)


def criterion_window_stability(scale: VerifyScale, seed: int, kappa: int) -> CriterionResult:
    rng = random.Random(seed)
    name = "window stability"
    for _ in range(scale.window_samples):
        for family, build in WINDOW_FAMILIES:
            labels, radius = build(rng, kappa)
            narrow = [labels[k] for k in range(-radius, radius + 1)]
            wide = [labels[k] for k in range(-2 * radius, 2 * radius + 1)]
            if colour_in_window(narrow, radius, kappa) != colour_in_window(wide, 2 * radius, kappa):
                return CriterionResult(
                    8, name, False, f"{family} window: centre {labels[0]} changes colour with a wider window",
                )
    return CriterionResult(8, name, True, f"{len(WINDOW_FAMILIES) * scale.window_samples} windows")


# Worst canon elapsed time against D, on a log-log scale, may not grow faster than this
GROWTH_EXPONENT_LIMIT = 1.5
# Smallest ratio of largest to smallest distance the exponent is fitted over
GROWTH_MIN_SPAN = 8


def canon_growth_exponent(canon: Iterable[CellResult]) -> Optional[float]:
    """
    Least-squares slope of log(worst elapsed) against log(D).

    Distance 1 shares its canonical phase with distance 2 and is left out.
    Returns None unless the distances span at least GROWTH_MIN_SPAN.
    """
    worst: Dict[int, int] = {}
    for row in canon:
        if row.distance >= 2 and row.max_elapsed:
            worst[row.distance] = max(worst.get(row.distance, 0), row.max_elapsed)
    if len(worst) < 2 or max(worst) < GROWTH_MIN_SPAN * min(worst):
        return None
    xs = [math.log(d) for d in worst]
    ys = [math.log(worst[d]) for d in worst]
    mean_x = sum(xs) / len(xs)
    mean_y = sum(ys) / len(ys)
    spread = sum((x - mean_x) ** 2 for x in xs)
    return sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys)) / spread


def criterion_growth(canon: List[CellResult], tier4: List[CellResult],
                     tier5: List[CellResult]) -> CriterionResult:
    name = "growth trends"
    for row in canon:
        if row.max_elapsed is None or row.max_elapsed > CANON_FACTOR * row.distance:
            return CriterionResult(9, name, False, f"canon cell {row.key} outgrew {CANON_FACTOR}*D")
    exponent = canon_growth_exponent(canon)
    if exponent is not None and exponent > GROWTH_EXPONENT_LIMIT:
        return CriterionResult(
            9, name, False, f"canon elapsed grows like D**{exponent:.2f}, limit {GROWTH_EXPONENT_LIMIT}",
        )
    # same trial seeds and starts: identical start labels, neighbours one tower apart
    by_key = {row.key: row for row in tier4}
    for high in tier5:
        if not high.ok:
            return CriterionResult(9, name, False, f"tier-5 cell {high.key}: {repro_command(high.failure)}")
        low = by_key.get(high.key)
        if low is None:
            return CriterionResult(9, name, False, f"tier-5 cell {high.key} has no tier-4 counterpart")
        if high.max_elapsed > low.bound:
            return CriterionResult(
                9, name, False,
                f"cell {high.key}: tier-5 run took {high.max_elapsed} rounds, tier-4 bound is {low.bound}",
            )
        if low.bound != high.bound:
            return CriterionResult(9, name, False, f"cell {high.key}: bound depends on neighbour labels")
    trend = "n/a" if exponent is None else f"{exponent:.2f}"
    return CriterionResult(
        9, name, True, f"{len(canon)} canon cells (exponent {trend}), {len(tier5)} tier-5 cells",
    )


def _guarded(number: int, name: str, compute: Callable[[], CriterionResult]) -> CriterionResult:
    try:
        return compute()
    except RendezvousLabError as exc:
        return CriterionResult(number, name, False, f"{type(exc).__name__}: {exc}")


def run_verify(quick: bool = False, seed: int = DEFAULT_SEED, kappa: Optional[int] = None,
               workers: int = 1, max_rounds: int = 0) -> List[CriterionResult]:
    """
    Run the acceptance suite.

    Args:
        quick: Use the reduced scale for smoke checks
        seed: Base seed for every randomised criterion
        kappa: Colouring constant; defaults to resolve_kappa()
        workers: Worker processes for sweep cells
        max_rounds: Forced round budget for rendezvous runs (0 derives it)

    Returns:
        One CriterionResult per criterion, in order
    """
    scale = QUICK_SCALE if quick else FULL_SCALE
    if kappa is None:
        kappa = resolve_kappa()
    settings = RunSettings(seed=seed, kappa=kappa, workers=workers, max_rounds=max_rounds)

    canon: List[CellResult] = []
    known: List[CellResult] = []

    def canon_criterion() -> CriterionResult:
        canon.extend(canon_rows(scale, settings))
        return _sweep_verdict(3, "canonical-line rendezvous", canon)

    def known_d_criterion() -> CriterionResult:
        known.extend(known_d_rows(scale.known_distances, settings, KNOWN_D_GENERATORS))
        return _sweep_verdict(4, "known-distance rendezvous", known)

    def growth_criterion() -> CriterionResult:
        distance = scale.known_distances[0]
        # tier-5 labels are 65536 bits wide, so only the cheapest cells are rerun
        tier5 = known_d_rows(
            (distance,), settings, (GeneratorKind.HUGE_NEIGHBOURS,), tier=5,
            delays=(0, known_d_delays(distance, kappa)[-1]),
        )
        tier4 = [row for row in known if row.generator == GeneratorKind.HUGE_NEIGHBOURS]
        return criterion_growth(canon, tier4, tier5)

    results = [
        _guarded(1, "early-stopping colouring", lambda: criterion_colouring(scale, seed)),
        _guarded(2, "suffix-free encoding and colour choice", lambda: criterion_numerics(scale, seed)),
        _guarded(3, "canonical-line rendezvous", canon_criterion),
        _guarded(4, "known-distance rendezvous", known_d_criterion),
        _guarded(5, "known-distance colours differ", lambda: criterion_colour_oracle(scale, seed, kappa)),
        _guarded(6, "unknown-distance rendezvous",
                 lambda: _sweep_verdict(6, "unknown-distance rendezvous", no_d_rows(scale, settings))),
        _guarded(7, "phase and epoch lengths", lambda: criterion_phase_arithmetic(scale, kappa)),
        _guarded(8, "window stability", lambda: criterion_window_stability(scale, seed, kappa)),
        _guarded(9, "growth trends", growth_criterion),
    ]
    for result in results:
        logger.debug("criterion %d (%s): %s", result.number, result.name, "ok" if result.ok else "FAILED")
    return results
