"""Isolated-word recognition and forced alignment.

Recognition scores a feature sequence against every pronunciation of every
lexicon word (best path via Viterbi) and ranks words by acoustic score plus
log prior; the evidence term common to all words cancels out of the argmax, so
only relative prior weights matter.  Forced alignment decodes the known
transcript's composite HMM and cuts the best state path into per-phoneme
segments with scores.

Both operations also try a variant padded with leading and trailing SIL and
keep whichever scores higher, since recordings usually carry surrounding
silence; when the padded variant wins an alignment, SIL segments appear at the
edges of the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, EmptyLexicon, NoValidPath
from .hmm import LOG_ZERO, CompositeHmm, segment_path, viterbi
from .lexicon import Lexicon

__all__ = [
    "LanguagePrior", "WordHypothesis", "AlignmentSegment", "Alignment",
    "viterbi", "recognize_isolated", "forced_align",
]


@dataclass(frozen=True)
class LanguagePrior:
    """Prior word probabilities; strictly positive and summing to one."""

    priors: dict

    def __post_init__(self):
        if not self.priors:
            raise EmptyLexicon("no words in prior")
        values = np.array(list(self.priors.values()), dtype=np.float64)
        if (values <= 0).any():
            raise ValueError("all priors must be positive")
        if abs(values.sum() - 1.0) > 1e-9:
            raise ValueError(f"priors sum to {values.sum()}, expected 1")

    @classmethod
    def uniform(cls, words) -> "LanguagePrior":
        words = list(words)
        return cls({w: 1.0 / len(words) for w in words})

    @classmethod
    def from_weights(cls, weights: dict) -> "LanguagePrior":
        """Normalize arbitrary positive weights into a prior."""
        total = sum(weights.values())
        return cls({w: v / total for w, v in weights.items()})

    def log_prior(self, word: str) -> float:
        return float(np.log(self.priors[word]))


@dataclass(frozen=True)
class WordHypothesis:
    word: str
    acoustic_log_score: float
    prior_log: float
    combined_log: float

    def __post_init__(self):
        expected = self.acoustic_log_score + self.prior_log
        if not (self.combined_log == expected
                or abs(self.combined_log - expected) < 1e-12):
            raise ValueError("combined_log must equal acoustic + prior")


@dataclass(frozen=True)
class AlignmentSegment:
    phoneme: str
    start_frame: int
    end_frame: int  # inclusive
    log_score: float

    def __post_init__(self):
        if self.start_frame > self.end_frame:
            raise ValueError("segment must span at least one frame")

    @property
    def frame_count(self) -> int:
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class Alignment:
    """Per-phoneme segments tiling [0, frame_count-1] plus the total score.

    ``total_log_score`` equals the Viterbi log probability of the decoded
    path; it decomposes as the sum of segment scores plus
    ``bridge_log_score`` (the transitions between consecutive phonemes and
    the final exit, which belong to no single segment).
    """

    segments: tuple[AlignmentSegment, ...]
    total_log_score: float
    frame_count: int
    bridge_log_score: float = 0.0

    def __post_init__(self):
        if not self.segments:
            raise ValueError("alignment needs at least one segment")
        if self.segments[0].start_frame != 0:
            raise ValueError("first segment must start at frame 0")
        if self.segments[-1].end_frame != self.frame_count - 1:
            raise ValueError("last segment must end at the final frame")
        for a, b in zip(self.segments, self.segments[1:]):
            if b.start_frame != a.end_frame + 1:
                raise ValueError("segments must tile the frame range")

    @property
    def phonemes(self) -> tuple[str, ...]:
        return tuple(s.phoneme for s in self.segments)

    def dump(self) -> str:
        """One `phoneme start end score` line per segment plus a TOTAL line."""
        lines = [f"{s.phoneme} {s.start_frame} {s.end_frame} {s.log_score:.6f}"
                 for s in self.segments]
        lines.append(f"TOTAL {self.total_log_score:.6f} {self.frame_count}")
        return "\n".join(lines)


def _align_exact(features, transcript, model) -> Alignment:
    """Viterbi-align one exact transcript (no padding fallback)."""
    composite = model.compose(transcript)
    frames = np.asarray(getattr(features, "frames", features), dtype=np.float64)
    path, total = viterbi(composite, frames)
    emissions = composite.emission_log_likelihoods(frames)
    raw, bridge = segment_path(composite, emissions, path)
    segments = tuple(
        AlignmentSegment(composite.phonemes[idx], start, end, score)
        for idx, start, end, score in raw)
    return Alignment(segments=segments, total_log_score=total,
                     frame_count=len(frames), bridge_log_score=bridge)


def forced_align(features, transcript, model) -> Alignment:
    """Align features against a known phoneme sequence.

    Tries the transcript as given and with SIL padded on both ends, keeping
    the higher-scoring alignment.  Raises NoValidPath when the utterance is
    too short for even the unpadded transcript.
    """
    transcript = tuple(transcript)
    if not transcript:
        raise EmptyInput("transcript is empty")
    best = None
    candidates = [transcript]
    if "SIL" in model.hmms:
        candidates.append(("SIL", *transcript, "SIL"))
    error = None
    for candidate in candidates:
        try:
            alignment = _align_exact(features, candidate, model)
        except NoValidPath as exc:
            error = error or exc
            continue
        if best is None or alignment.total_log_score > best.total_log_score:
            best = alignment
    if best is None:
        raise error or NoValidPath("alignment impossible")
    return best


def recognize_isolated(features, lexicon: Lexicon, model,
                       priors: LanguagePrior | None = None) -> list[WordHypothesis]:
    """Rank lexicon words by best-path score plus log prior.

    Every pronunciation variant of a word is scored (with and without SIL
    padding) and the word takes its best variant.  Words whose every variant
    fails to decode (utterance too short) score minus infinity and rank last.
    Ties break lexicographically on the word.
    """
    if len(lexicon) == 0:
        raise EmptyLexicon("cannot recognize against an empty lexicon")
    words = lexicon.words
    if priors is None:
        priors = LanguagePrior.uniform(words)
    missing = [w for w in words if w not in priors.priors]
    if missing:
        raise ValueError(f"priors missing lexicon words: {missing}")

    frames = np.asarray(getattr(features, "frames", features), dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise EmptyInput("feature sequence is empty")

    hypotheses = []
    for word in words:
        acoustic = LOG_ZERO
        for entry in lexicon.variants(word):
            candidates = [entry.phonemes]
            if "SIL" in model.hmms:
                candidates.append(("SIL", *entry.phonemes, "SIL"))
            for candidate in candidates:
                try:
                    _, score = viterbi(model.compose(candidate), frames)
                except NoValidPath:
                    continue
                acoustic = max(acoustic, score)
        prior_log = priors.log_prior(word)
        hypotheses.append(WordHypothesis(
            word=word, acoustic_log_score=acoustic, prior_log=prior_log,
            combined_log=acoustic + prior_log))
    hypotheses.sort(key=lambda h: (-h.combined_log, h.word))
    return hypotheses
