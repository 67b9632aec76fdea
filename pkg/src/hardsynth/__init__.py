"""Hard-sample speech synthesis for ASR corpus augmentation.

Surface the utterances a weak recognizer gets wrong, use them as voice
prompts for zero-shot TTS over (optionally paraphrased) transcripts,
filter the synthetic audio with a strong recognizer, and mix the
survivors back into the training manifest.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .corpus import Corpus, Gender, Origin, Utterance, load_manifest, write_manifest
from .ctc import PosteriorMatrix, greedy_decode
from .evaluation import EvalReport, cosine_similarity, wer_report
from .hard_select import PromptSet, ScoredUtterance, select_hard_prompts, select_random_prompts
from .metrics import NormPolicy, cer, edit_distance, wer
from .mix_stats import mix, stats
from .synth_filter import filter_synthetic

__all__ = [
    "Corpus",
    "EvalReport",
    "Gender",
    "NormPolicy",
    "Origin",
    "PosteriorMatrix",
    "PromptSet",
    "ScoredUtterance",
    "Utterance",
    "cer",
    "cosine_similarity",
    "edit_distance",
    "filter_synthetic",
    "greedy_decode",
    "load_manifest",
    "mix",
    "select_hard_prompts",
    "select_random_prompts",
    "stats",
    "wer",
    "wer_report",
    "write_manifest",
]
