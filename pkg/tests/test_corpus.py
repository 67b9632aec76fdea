from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from hardsynth.corpus import Corpus, Gender, Origin, Utterance, load_manifest, write_manifest
from hardsynth.errors import DuplicateIdError, ManifestError, MissingFieldError
from helpers import mock_wav, utt


def _write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")


def test_empty_manifest(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text("")
    assert len(load_manifest(p)) == 0
    write_manifest(Corpus(), tmp_path / "out.jsonl")
    assert (tmp_path / "out.jsonl").read_bytes() == b""


def test_load_sorts_by_id(tmp_path):
    p = tmp_path / "m.jsonl"
    _write_lines(p, [utt(i).to_record() for i in ("u2", "u1", "u3")])
    assert load_manifest(p).ids == ["u1", "u2", "u3"]


def test_duplicate_id_names_the_id(tmp_path):
    p = tmp_path / "m.jsonl"
    _write_lines(p, [utt("u1").to_record(), utt("u1").to_record()])
    with pytest.raises(DuplicateIdError, match="u1") as exc:
        load_manifest(p)
    assert exc.value.line == 2


def test_malformed_line_names_line(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text(json.dumps(utt("u1").to_record()) + "\n{not json\n")
    with pytest.raises(ManifestError) as exc:
        load_manifest(p)
    assert exc.value.line == 2
    assert ":2:" in str(exc.value)


def test_missing_field_names_field(tmp_path):
    rec = utt("u1").to_record()
    del rec["text"]
    p = tmp_path / "m.jsonl"
    _write_lines(p, [rec])
    with pytest.raises(MissingFieldError, match="text"):
        load_manifest(p)


@pytest.mark.parametrize(
    "change",
    [
        {"duration_s": 0},
        {"duration_s": -1.5},
        {"duration_s": "3"},
        {"text": " ,. "},
        {"gender": "x"},
        {"origin": "fake"},
        {"origin": "synthetic"},
    ],
)
def test_invalid_records_rejected(tmp_path, change):
    rec = utt("u1").to_record() | change
    p = tmp_path / "m.jsonl"
    _write_lines(p, [rec])
    with pytest.raises(ManifestError):
        load_manifest(p)


def test_non_ascii_round_trip_is_byte_identical(tmp_path):
    c = Corpus((utt("u1", text="naïve café"),))
    p = tmp_path / "m.jsonl"
    write_manifest(c, p)
    assert "naïve café".encode("utf-8") in p.read_bytes()
    assert load_manifest(p).get("u1").transcript == "naïve café"


ids = st.text(alphabet="abcdefgh0123456789-", min_size=1, max_size=8)
utterances = st.builds(
    Utterance,
    id=ids,
    audio_ref=st.text(alphabet="abc/._", min_size=1, max_size=12),
    duration_s=st.floats(min_value=0.001, max_value=1e5, allow_nan=False),
    transcript=st.text(alphabet="abc xyzé'", max_size=20).filter(lambda t: any(c.isalpha() for c in t)),
    speaker_id=st.text(max_size=5),
    gender=st.sampled_from(list(Gender)),
)


@given(st.lists(utterances, max_size=10, unique_by=lambda u: u.id))
def test_round_trip_identity(tmp_path_factory, utts):
    c = Corpus(tuple(utts))
    p = tmp_path_factory.mktemp("rt") / "m.jsonl"
    write_manifest(c, p)
    assert load_manifest(p) == c


def test_synthetic_requires_prompt_id():
    with pytest.raises(ValueError):
        Utterance("s", "s.wav", 1.0, "x", "spk", origin=Origin.SYNTHETIC)
    Utterance("s", "s.wav", 1.0, "x", "spk", origin=Origin.SYNTHETIC, prompt_id="p")


def test_relative_audio_resolves_against_manifest_dir(tmp_path):
    sub = tmp_path / "data"
    sub.mkdir()
    mock_wav(sub / "a.wav", "hi", duration=1.0)
    _write_lines(sub / "m.jsonl", [utt("u1", 1.0, audio_ref="a.wav").to_record()])
    c = load_manifest(sub / "m.jsonl", validate=True)
    assert c.audio_path(c.get("u1")) == sub / "a.wav"
    moved = c.rebased(tmp_path / "work")
    assert moved.get("u1").audio_ref == "../data/a.wav"
    assert moved.audio_path(moved.get("u1")).resolve() == (sub / "a.wav").resolve()


def test_validate_checks_duration_against_audio(tmp_path):
    mock_wav(tmp_path / "a.wav", "hi", duration=1.0)
    _write_lines(tmp_path / "m.jsonl", [utt("u1", 2.0, audio_ref="a.wav").to_record()])
    load_manifest(tmp_path / "m.jsonl")
    with pytest.raises(ManifestError, match="u1"):
        load_manifest(tmp_path / "m.jsonl", validate=True)


def test_total_duration_and_get():
    c = Corpus((utt("b", 1.5), utt("a", 2.5)))
    assert c.total_duration == 4.0
    assert c.get("a").duration_s == 2.5
    with pytest.raises(KeyError):
        c.get("zz")


def test_write_is_atomic_on_failure(tmp_path, monkeypatch):
    p = tmp_path / "m.jsonl"
    write_manifest(Corpus((utt("old"),)), p)
    before = p.read_bytes()

    def boom(*a, **k):
        raise OSError(28, "No space left on device")

    monkeypatch.setattr("os.replace", boom)
    with pytest.raises(OSError):
        write_manifest(Corpus((utt("new"),)), p)
    assert p.read_bytes() == before
    assert [x.name for x in tmp_path.iterdir()] == ["m.jsonl"]
