from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardsynth.ctc import PosteriorMatrix, collapse_path, greedy_decode, labels_path, load_posteriors, save_posteriors
from hardsynth.errors import FormatError
from oracles import collapse

LABELS = ("_", "a", "b", "c")


def one_hot(path, v=4, blank=0, labels=LABELS):
    lp = np.full((len(path), v), -5.0, dtype=np.float32)
    lp[np.arange(len(path)), path] = -0.01
    return PosteriorMatrix(lp, blank, labels[:v])


def test_examples():
    assert greedy_decode(PosteriorMatrix(np.zeros((0, 4)), 0, LABELS)) == ""
    assert greedy_decode(one_hot([0, 1, 1, 0, 1, 2])) == "aab"
    assert greedy_decode(one_hot([0, 0, 0])) == ""


def test_ties_go_to_lowest_index():
    lp = np.log(np.full((3, 4), 0.25, dtype=np.float32))
    assert greedy_decode(PosteriorMatrix(lp, 1, LABELS)) == "_"


def test_exhaustive_small_paths():
    for v in range(1, 4):
        for t in range(0, 6):
            for path in itertools.product(range(v), repeat=t):
                expected = "".join(LABELS[k] for k in collapse(path, 0))
                assert greedy_decode(one_hot(list(path), v)) == expected


@given(st.lists(st.integers(0, 3), max_size=30), st.integers(0, 3))
def test_collapse_matches_oracle(path, blank):
    assert collapse_path(path, blank) == collapse(path, blank)


@given(st.integers(1, 12), st.integers(2, 5), st.data())
def test_frame_duplication_invariance(t, v, data):
    rng = np.random.default_rng(data.draw(st.integers(0, 2**32 - 1)))
    lp = rng.normal(size=(t, v)).astype(np.float32)
    m = PosteriorMatrix(lp, 0, tuple("_abcd"[:v]))
    reps = data.draw(st.lists(st.integers(1, 3), min_size=t, max_size=t))
    dup = PosteriorMatrix(np.repeat(lp, reps, axis=0), 0, m.labels)
    assert greedy_decode(dup) == greedy_decode(m)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        PosteriorMatrix(np.zeros((2, 3)), 0, LABELS)
    with pytest.raises(ValueError):
        PosteriorMatrix(np.zeros((2, 4)), 4, LABELS)


def test_validate_normalized():
    good = np.log(np.full((2, 4), 0.25, dtype=np.float32))
    greedy_decode(PosteriorMatrix(good, 0, LABELS), validate=True)
    with pytest.raises(ValueError, match="row 0"):
        greedy_decode(PosteriorMatrix(np.zeros((2, 4)), 0, LABELS), validate=True)


def test_save_load_round_trip(tmp_path):
    m = PosteriorMatrix(np.random.default_rng(0).normal(size=(5, 4)), 2, LABELS)
    save_posteriors(m, tmp_path / "m.ctcl")
    assert load_posteriors(tmp_path / "m.ctcl") == m


def test_empty_matrix_file(tmp_path):
    m = PosteriorMatrix(np.zeros((0, 3)), 0, ("_", "x", "y"))
    save_posteriors(m, tmp_path / "e.ctcl")
    back = load_posteriors(tmp_path / "e.ctcl")
    assert back.frames == 0 and back.vocab == 3
    assert greedy_decode(back) == ""


@pytest.mark.parametrize("cut", [3, 17, -1])
def test_truncated_file(tmp_path, cut):
    p = tmp_path / "m.ctcl"
    save_posteriors(one_hot([1, 2]), p)
    p.write_bytes(p.read_bytes()[:cut])
    with pytest.raises(FormatError):
        load_posteriors(p)


def test_bad_magic_trailing_bytes_and_sidecar(tmp_path):
    p = tmp_path / "m.ctcl"
    save_posteriors(one_hot([1, 2]), p)
    raw = p.read_bytes()
    p.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(FormatError, match="magic"):
        load_posteriors(p)
    p.write_bytes(raw + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        load_posteriors(p)
    p.write_bytes(raw)
    labels_path(p).write_text('["_", "a"]')
    with pytest.raises(FormatError, match="sidecar"):
        load_posteriors(p)
    labels_path(p).unlink()
    with pytest.raises(FormatError, match="sidecar"):
        load_posteriors(p)
