"""
Tests for labeled lines and the label file format.
"""

import pytest
from hypothesis import given, settings, strategies as st

from errors import ConfigError, LabelWindowError
from line import (
    GeneratorKind,
    LabelGenSpec,
    interleave,
    label_at,
    load_label_file,
    make_line,
    mix64,
    save_label_file,
    start_labels,
)
from numerics import tower


def test_canonical_pattern():
    line = make_line(LabelGenSpec(GeneratorKind.CANONICAL))
    assert [label_at(line, p) for p in range(-4, 4)] == [8, 6, 4, 2, 1, 3, 5, 7]
    assert label_at(line, 0) == 1
    assert label_at(line, -3) == 6


def test_interleave_order():
    assert [interleave(p) for p in (0, -1, 1, -2, 2, -3)] == [0, 1, 2, 3, 4, 5]


def test_mixer_is_injective_on_a_window():
    values = {mix64(99, n) for n in range(20000)}
    assert len(values) == 20000


def test_random_window_is_deterministic_and_injective():
    line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), seed=7)
    window = [label_at(line, p) for p in range(-5000, 5001)]
    assert window == [label_at(line, p) for p in range(-5000, 5001)]
    assert len(set(window)) == len(window)
    assert min(window) >= 2


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**64 - 1), st.integers(min_value=-10**9, max_value=10**9))
def test_random_window_labels_at_least_two(seed, pos):
    line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW), seed=seed)
    assert label_at(line, pos) >= 2


def test_random_window_radius():
    line = make_line(LabelGenSpec(GeneratorKind.RANDOM_WINDOW, radius=3), seed=1)
    label_at(line, -3)
    label_at(line, 3)
    with pytest.raises(LabelWindowError):
        label_at(line, 4)


def test_explicit_indexing():
    spec = LabelGenSpec(GeneratorKind.EXPLICIT, labels=(4, 9, 2, 7, 3), origin_offset=-2)
    line = make_line(spec)
    assert label_at(line, 0) == 2
    assert label_at(line, -2) == 4
    assert label_at(line, 2) == 3
    with pytest.raises(LabelWindowError):
        label_at(line, 3)


@pytest.mark.parametrize("labels", [(4, 9, 4), (1, 5, 6), ()])
def test_explicit_rejects_invalid_lists(labels):
    with pytest.raises(ConfigError):
        make_line(LabelGenSpec(GeneratorKind.EXPLICIT, labels=labels))


def test_orientation_validation():
    with pytest.raises(ConfigError):
        make_line(LabelGenSpec(GeneratorKind.CANONICAL), orientations=(1, 0))


def test_huge_neighbours_contract():
    spec = LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=4, starts=(0, 5))
    line = make_line(spec, seed=11)
    near = {s + d for s in (0, 5) for d in (-1, 0, 1)}
    for pos in range(-50, 60):
        label = label_at(line, pos)
        if pos in near:
            assert 2 <= label < 100
        else:
            assert label >= tower(4)
    window = [label_at(line, p) for p in range(-50, 60)]
    assert len(set(window)) == len(window)


def test_huge_neighbours_small_labels_depend_only_on_seed_and_starts():
    a = make_line(LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=4, starts=(0, 3)), seed=5)
    b = make_line(LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=5, starts=(0, 3)), seed=5)
    assert start_labels(a, 0, 3) == start_labels(b, 0, 3)
    assert label_at(b, 10) > label_at(a, 10)


def test_huge_neighbours_validation():
    with pytest.raises(ConfigError):
        make_line(LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=3, starts=(0,)))
    with pytest.raises(ConfigError):
        make_line(LabelGenSpec(GeneratorKind.HUGE_NEIGHBOURS, tier=4))


def test_start_labels():
    line = make_line(LabelGenSpec(GeneratorKind.CANONICAL))
    assert start_labels(line, -2, 3) == (4, 7, 7)


def test_label_file_round_trip(tmp_path):
    path = tmp_path / "labels.txt"
    assert save_label_file(str(path), [4, 9, 2, 7, 3], origin_offset=-2)
    assert path.read_text().splitlines()[0] == "origin_offset=-2"
    labels, offset = load_label_file(str(path))
    assert labels == (4, 9, 2, 7, 3)
    assert offset == -2


@pytest.mark.parametrize(
    "text",
    ["4\n9\n", "origin_offset=x\n4\n", "origin_offset=0\n4\nfive\n", "origin_offset=0\n4\n4\n"],
)
def test_label_file_rejects_malformed(tmp_path, text):
    path = tmp_path / "labels.txt"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_label_file(str(path))


def test_label_file_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_label_file(str(tmp_path / "nope.txt"))
