"""Generate a small self-describing corpus for the mock clients.

Each WAV carries ``{"text", "difficulty"}`` in its comment chunk, which is
what the mock recognizers and the mock TTS read. A handful of utterances
are planted as hard (difficulty 1.0, longer than the prompt minimum).
"""

from __future__ import annotations

import argparse
import random
from dataclasses import dataclass
from pathlib import Path

from . import wav
from .clients.tts import tone_pattern
from .corpus import Corpus, Gender, Utterance, write_manifest

WORDS = (
    "the a small large river city morning evening garden window quiet bright "
    "old young road house light water stone tree bird letter friend voice "
    "walked found carried opened watched heard left turned brought kept "
    "slowly quickly near under across before after through again always"
).split()


@dataclass(frozen=True)
class MockCorpusSpec:
    n_utterances: int = 100
    n_hard: int = 10
    n_speakers: int = 10
    seed: int = 0
    hard_difficulty: float = 1.0
    easy_difficulty: tuple[float, float] = (0.0, 0.2)


def _sentence(rng: random.Random, n_words: int) -> str:
    words = [rng.choice(WORDS) for _ in range(n_words)]
    return " ".join(words).capitalize() + "."


def make_mock_corpus(out_dir: str | Path, params: MockCorpusSpec = MockCorpusSpec()) -> Path:
    """Write WAVs and ``manifest.jsonl`` under ``out_dir``; returns the
    manifest path. Hard utterances sit at seeded random positions in the
    id space; :func:`hard_ids` recovers them."""
    if params.n_hard > params.n_utterances:
        raise ValueError("n_hard cannot exceed n_utterances")
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(params.seed)
    hard = set(rng.sample(range(params.n_utterances), params.n_hard))
    utts = []
    for i in range(params.n_utterances):
        is_hard = i in hard
        n_words = rng.randint(12, 18) if is_hard else rng.randint(3, 14)
        text = _sentence(rng, n_words)
        speed = rng.uniform(2.0, 3.0)
        duration = round(n_words / speed, 3)
        difficulty = params.hard_difficulty if is_hard else round(rng.uniform(*params.easy_difficulty), 3)
        spk = i % params.n_speakers
        uid = f"utt-{i:03d}"
        path = audio_dir / f"{uid}.wav"
        wav.write(path, tone_pattern(text.split(), duration), metadata={"text": text, "difficulty": difficulty})
        utts.append(
            Utterance(
                id=uid,
                audio_ref=f"audio/{uid}.wav",
                duration_s=wav.duration_s(path),
                transcript=text,
                speaker_id=f"spk{spk:02d}",
                gender=Gender.MALE if spk % 2 == 0 else Gender.FEMALE,
            )
        )
    manifest = out_dir / "manifest.jsonl"
    write_manifest(Corpus(tuple(utts)), manifest)
    return manifest


def hard_ids(manifest: str | Path) -> list[str]:
    """Ids whose planted difficulty is at least 1.0."""
    from .corpus import load_manifest

    corpus = load_manifest(manifest)
    out = []
    for u in corpus:
        meta = wav.read_info(corpus.audio_path(u)).metadata() or {}
        if meta.get("difficulty", 0.0) >= 1.0:
            out.append(u.id)
    return out


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description="write a mock corpus for dry runs")
    ap.add_argument("out_dir")
    ap.add_argument("-n", "--n-utterances", type=int, default=100)
    ap.add_argument("--n-hard", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    manifest = make_mock_corpus(args.out_dir, MockCorpusSpec(args.n_utterances, args.n_hard, seed=args.seed))
    print(manifest)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
