"""
Labeled lines for Rendezvous Lab.

A line is conceptually infinite: labels are produced on demand by a seeded,
deterministic generator, so nothing is materialised beyond what agents
visit. Global positions are integers with 0 as an arbitrary origin that
agents never observe.
"""

import logging
import os
import tempfile
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Mapping, Optional, Sequence, Tuple

from errors import ConfigError, LabelWindowError
from numerics import tower


logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

# HugeNeighbours hands out small labels from this range to start neighbourhoods
SMALL_LABEL_RANGE = range(2, 100)

ORIGIN_HEADER = "origin_offset="


class GeneratorKind(str, Enum):
    CANONICAL = "canonical"
    RANDOM_WINDOW = "random-window"
    HUGE_NEIGHBOURS = "huge-neighbours"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class LabelGenSpec:
    """
    Label generator description.

    Only the fields relevant to ``kind`` are consulted: ``radius`` for
    RandomWindow (None = unbounded), ``tier`` and ``starts`` for
    HugeNeighbours, ``labels`` and ``origin_offset`` for Explicit, where
    ``labels[0]`` sits at global position ``origin_offset``.
    """

    kind: GeneratorKind
    radius: Optional[int] = None
    tier: int = 4
    starts: Tuple[int, ...] = ()
    labels: Tuple[int, ...] = ()
    origin_offset: int = 0


@dataclass(frozen=True)
class LineInstance:
    generator: LabelGenSpec
    seed: int
    orientation_a: int = 1
    orientation_b: int = 1
    overrides: Mapping[int, int] = field(
        default_factory=lambda: MappingProxyType({}), compare=False, hash=False, repr=False
    )


def mix64(seed: int, n: int) -> int:
    """
    Seeded bijective 64-bit mixer (splitmix64 finaliser).

    For a fixed seed, distinct n in [0, 2**64) map to distinct outputs.
    """
    z = (n + seed * 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def interleave(pos: int) -> int:
    """Map positions 0, -1, 1, -2, 2, ... onto 0, 1, 2, 3, 4, ..."""
    return 2 * pos if pos >= 0 else -2 * pos - 1


def canonical_label(pos: int) -> int:
    """Label of the canonical line ...8,6,4,2,1,3,5,7,... with label 1 at position 0."""
    return 2 * pos + 1 if pos >= 0 else -2 * pos


def _validate_explicit(labels: Sequence[int]) -> None:
    if not labels:
        raise ConfigError("explicit label list is empty")
    if len(set(labels)) != len(labels):
        raise ConfigError("explicit label list contains duplicate labels")
    small = [x for x in labels if x < 2]
    if small:
        raise ConfigError(f"explicit labels must be >= 2, found {small[0]}")


def _small_label_overrides(starts: Sequence[int], seed: int) -> Mapping[int, int]:
    positions = sorted({s + d for s in starts for d in (-1, 0, 1)})
    if len(positions) > len(SMALL_LABEL_RANGE):
        raise ConfigError(f"too many start positions for small labels: {len(starts)}")
    pool = sorted(SMALL_LABEL_RANGE, key=lambda v: mix64(seed, v))
    return MappingProxyType(dict(zip(positions, pool)))


def make_line(spec: LabelGenSpec, seed: int = 0, orientations: Tuple[int, int] = (1, 1)) -> LineInstance:
    """
    Build a validated line instance.

    Args:
        spec: Generator description
        seed: Generator seed (ignored by Canonical and Explicit)
        orientations: Local-frame signs of agents A and B, each +1 or -1

    Returns:
        Immutable LineInstance

    Raises:
        ConfigError: If the generator parameters or orientations are invalid
    """
    orientation_a, orientation_b = orientations
    if orientation_a not in (1, -1) or orientation_b not in (1, -1):
        raise ConfigError(f"orientations must be +1 or -1, got {orientations}")

    overrides: Mapping[int, int] = MappingProxyType({})
    if spec.kind == GeneratorKind.EXPLICIT:
        _validate_explicit(spec.labels)
    elif spec.kind == GeneratorKind.RANDOM_WINDOW:
        if spec.radius is not None and spec.radius < 0:
            raise ConfigError(f"window radius must be non-negative, got {spec.radius}")
    elif spec.kind == GeneratorKind.HUGE_NEIGHBOURS:
        if spec.tier not in (4, 5):
            raise ConfigError(f"huge-neighbours tier must be 4 or 5, got {spec.tier}")
        if not spec.starts:
            raise ConfigError("huge-neighbours needs at least one start position")
        overrides = _small_label_overrides(spec.starts, seed)

    return LineInstance(
        generator=spec,
        seed=seed,
        orientation_a=orientation_a,
        orientation_b=orientation_b,
        overrides=overrides,
    )


def label_at(line: LineInstance, pos: int) -> int:
    """
    Label of the node at global position pos.

    Raises:
        LabelWindowError: If pos lies outside a finite RandomWindow radius or
            an Explicit list
    """
    gen = line.generator
    kind = gen.kind

    if kind == GeneratorKind.CANONICAL:
        return canonical_label(pos)

    if kind == GeneratorKind.RANDOM_WINDOW:
        if gen.radius is not None and abs(pos) > gen.radius:
            raise LabelWindowError(f"position {pos} outside window radius {gen.radius}")
        return mix64(line.seed, interleave(pos)) + 2

    if kind == GeneratorKind.HUGE_NEIGHBOURS:
        small = line.overrides.get(pos)
        if small is not None:
            return small
        return tower(gen.tier) + mix64(line.seed, interleave(pos))

    index = pos - gen.origin_offset
    if not 0 <= index < len(gen.labels):
        raise LabelWindowError(
            f"position {pos} outside explicit labels "
            f"[{gen.origin_offset}, {gen.origin_offset + len(gen.labels) - 1}]"
        )
    return gen.labels[index]


def start_labels(line: LineInstance, start_a: int, start_b: int) -> Tuple[int, int, int]:
    """Return (label at start_a, label at start_b, larger of the two)."""
    label_a = label_at(line, start_a)
    label_b = label_at(line, start_b)
    return label_a, label_b, max(label_a, label_b)


def load_label_file(path: str) -> Tuple[Tuple[int, ...], int]:
    """
    Read an explicit label file.

    The first non-empty line must be ``origin_offset=<int>``; each further
    non-empty line holds one decimal label.

    Returns:
        (labels, origin_offset)

    Raises:
        ConfigError: If the file is unreadable, malformed or has duplicates
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read label file {path}: {exc}") from exc

    rows = [row.strip() for row in text.splitlines() if row.strip()]
    if not rows or not rows[0].startswith(ORIGIN_HEADER):
        raise ConfigError(f"{path}: first line must be '{ORIGIN_HEADER}<int>'")
    try:
        origin_offset = int(rows[0][len(ORIGIN_HEADER):])
        labels = tuple(int(row) for row in rows[1:])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc

    if len(set(labels)) != len(labels):
        raise ConfigError(f"{path}: duplicate labels")
    logger.debug("Loaded %d labels from %s (origin_offset=%d)", len(labels), path, origin_offset)
    return labels, origin_offset


def save_label_file(path: str, labels: Sequence[int], origin_offset: int = 0) -> bool:
    """
    Write an explicit label file atomically.

    Returns:
        True if save was successful, False otherwise
    """
    target = Path(path)
    body = f"{ORIGIN_HEADER}{origin_offset}\n" + "".join(f"{label}\n" for label in labels)
    tmp_path = None
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with tempfile.NamedTemporaryFile(
            mode="w", encoding="utf-8", dir=target.parent, delete=False, suffix=".tmp"
        ) as tmp_file:
            tmp_path = tmp_file.name
            tmp_file.write(body)
        os.replace(tmp_path, target)
        return True
    except OSError:
        if tmp_path is not None:
            try:
                os.unlink(tmp_path)
            except OSError:
                pass
        return False
