"""Pronunciation feedback: word classes, verdicts, and per-class statistics.

Practice words group into six phoneme classes (emphatic letters, gemination,
pharyngeals, hamza, and so on) so progress can be tracked per difficulty
area.  An attempt is force-aligned against the expected phoneme sequence and
each segment's per-frame log score is converted to a z-score against the
model's training-score statistics; phonemes scoring far below training
typical get flagged, and the whole attempt is accepted, marked faulty, or
rejected outright.  Session flow (advance, offer a repeat, require a repeat)
follows from the verdict and the teacher's repeat limit.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass

import numpy as np

from .decoder import forced_align
from .errors import EmptyInput, NoValidPath
from .lexicon import INVENTORY, LONG_VOWEL, SHORT_VOWEL, SILENCE, phonetize

__all__ = [
    "PhonemeClass", "WordItem", "FeedbackPolicy", "PhonemeScore", "Feedback",
    "ClassStats", "LEVELS", "classify_word", "policy_verdict",
    "evaluate_attempt", "feedback_from_dict", "next_action",
    "aggregate_stats", "stats_csv", "stats_json",
]

LEVELS = ("A1", "A2", "B1")

VERDICTS = ("Accepted", "Faulty", "Rejected")

ACTIONS = ("Advance", "OfferRepeat", "RepeatRequired")


class PhonemeClass(enum.Enum):
    """Six word-difficulty groups keyed on the sounds a word contains."""

    LSVG = "LSVG"  # doubled (geminate) consonant
    WUS = "WUS"    # pharyngeal fricatives AI / HH
    SEOL = "SEOL"  # other hard consonants DH / H / TH / KH / R
    MFH = "MFH"    # written hamza
    EL = "EL"      # emphatic letters
    US = "US"      # none of the above


# classification triggers, checked in fixed precedence order
EL_TRIGGERS = frozenset({"Q", "SS", "DD", "TT", "DH2"})
WUS_TRIGGERS = frozenset({"AI", "HH"})
SEOL_TRIGGERS = frozenset({"DH", "H", "TH", "KH", "R"})
HAMZA_LETTERS = frozenset("ءأؤئآ")  # hamza below alef (إ) does not count

_VOWEL_CATEGORIES = (SILENCE, SHORT_VOWEL, LONG_VOWEL)


def _has_geminate(phonemes) -> bool:
    for a, b in zip(phonemes, phonemes[1:]):
        if a != b or a not in INVENTORY:
            continue
        if INVENTORY.category_of(a) not in _VOWEL_CATEGORIES:
            return True
    return False


def classify_word(phonemes, orthography: str) -> PhonemeClass:
    """Assign a word to the first matching class in fixed precedence.

    Precedence: emphatic letters, then gemination, then written hamza, then
    pharyngeals, then the remaining hard consonants; anything else is US.
    Earlier classes capture the rarer phenomena so the grouping is a
    well-defined partition even when a word matches several.
    """
    phonemes = tuple(phonemes)
    if not phonemes:
        raise EmptyInput("cannot classify an empty phoneme sequence")
    present = set(phonemes)
    if present & EL_TRIGGERS:
        return PhonemeClass.EL
    if _has_geminate(phonemes):
        return PhonemeClass.LSVG
    if HAMZA_LETTERS & set(orthography):
        return PhonemeClass.MFH
    if present & WUS_TRIGGERS:
        return PhonemeClass.WUS
    if present & SEOL_TRIGGERS:
        return PhonemeClass.SEOL
    return PhonemeClass.US


@dataclass(frozen=True)
class WordItem:
    """A practice word: orthography, difficulty level, class, and phonemes."""

    word: str
    level: str
    phoneme_class: PhonemeClass
    phonemes: tuple[str, ...]

    def __post_init__(self):
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}")
        object.__setattr__(self, "phonemes", tuple(self.phonemes))
        derived = tuple(phonetize(self.word))
        if self.phonemes != derived:
            raise ValueError(
                f"phonemes {self.phonemes} do not match the word's "
                f"pronunciation {derived}")
        expected = classify_word(self.phonemes, self.word)
        if self.phoneme_class is not expected:
            raise ValueError(
                f"word {self.word!r} belongs to class {expected.value}")

    @classmethod
    def from_word(cls, word: str, level: str) -> "WordItem":
        phonemes = tuple(phonetize(word))
        return cls(word=word, level=level,
                   phoneme_class=classify_word(phonemes, word),
                   phonemes=phonemes)


@dataclass(frozen=True)
class FeedbackPolicy:
    """Teacher-tunable strictness knobs, in z-score units.

    A phoneme is flagged when its per-frame alignment score falls more than
    ``phoneme_z_threshold`` standard deviations below the training mean for
    that phoneme.  The whole attempt is rejected when the word-level z (the
    median per-phoneme z, robust to one bad segment) falls below
    ``word_z_threshold`` or when more than ``max_faulty_fraction`` of the
    phonemes are flagged.
    """

    phoneme_z_threshold: float = 2.0
    word_z_threshold: float = 2.5
    max_faulty_fraction: float = 0.5

    def __post_init__(self):
        if not (math.isfinite(self.phoneme_z_threshold)
                and math.isfinite(self.word_z_threshold)):
            raise ValueError("thresholds must be finite")
        if not 0.0 <= self.max_faulty_fraction <= 1.0:
            raise ValueError("max_faulty_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class PhonemeScore:
    phoneme: str
    normalized_score: float  # z-score against training statistics
    flagged: bool


@dataclass(frozen=True)
class Feedback:
    verdict: str
    per_phoneme: tuple[PhonemeScore, ...]
    faulty_indices: tuple[int, ...]
    message: str

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        flagged = tuple(i for i, p in enumerate(self.per_phoneme) if p.flagged)
        if flagged != self.faulty_indices:
            raise ValueError("faulty_indices must list exactly the flagged phonemes")
        if self.verdict == "Faulty" and not self.faulty_indices:
            raise ValueError("a Faulty verdict needs at least one flagged phoneme")
        if self.verdict == "Accepted" and self.faulty_indices:
            raise ValueError("an Accepted verdict cannot carry flagged phonemes")


def feedback_from_dict(doc: dict) -> Feedback:
    """Rebuild a Feedback from its JSON form (extra keys are ignored)."""
    per_phoneme = tuple(
        PhonemeScore(phoneme=p["phoneme"],
                     normalized_score=float(p["normalized_score"]),
                     flagged=bool(p["flagged"]))
        for p in doc["per_phoneme"])
    return Feedback(verdict=doc["verdict"], per_phoneme=per_phoneme,
                    faulty_indices=tuple(doc["faulty_indices"]),
                    message=doc["message"])


def policy_verdict(z_scores, policy: FeedbackPolicy):
    """Decide a verdict from per-phoneme z-scores.

    Returns (verdict, flagged indices, word_z) where word_z is the median
    per-phoneme z.
    """
    z = np.asarray(z_scores, dtype=np.float64)
    if z.size == 0:
        raise EmptyInput("no phoneme scores to judge")
    flags = tuple(int(i) for i in np.nonzero(z < -policy.phoneme_z_threshold)[0])
    word_z = float(np.median(z))
    if word_z < -policy.word_z_threshold or len(flags) / z.size > policy.max_faulty_fraction:
        verdict = "Rejected"
    elif flags:
        verdict = "Faulty"
    else:
        verdict = "Accepted"
    return verdict, flags, word_z


def _message(verdict: str, word: str, flagged_names) -> str:
    if verdict == "Accepted":
        return f"Well done — {word} was pronounced clearly."
    names = ", ".join(flagged_names)
    if verdict == "Faulty":
        return f"Almost — listen again to {names} in {word} and repeat."
    if names:
        return (f"The attempt was too far from {word} "
                f"(weak sounds: {names}); listen and try again.")
    return f"The attempt could not be matched to {word}; listen and try again."


def evaluate_attempt(features, item: WordItem, model,
                     policy: FeedbackPolicy = FeedbackPolicy()) -> Feedback:
    """Force-align an attempt and judge each phoneme against training stats.

    Alignment failure (too few frames for the word) rejects the attempt
    outright.  Unknown phonemes (word not covered by the model) propagate.
    """
    try:
        alignment = forced_align(features, item.phonemes, model)
    except NoValidPath:
        return Feedback(verdict="Rejected", per_phoneme=(), faulty_indices=(),
                        message=_message("Rejected", item.word, ()))

    segments = [s for s in alignment.segments if s.phoneme != "SIL"]
    stats = model.training_score_stats
    z_scores = []
    for segment in segments:
        mean, std = stats.get(segment.phoneme, (0.0, 1.0))
        per_frame = segment.log_score / segment.frame_count
        z_scores.append((per_frame - mean) / std)

    verdict, flags, _ = policy_verdict(z_scores, policy)
    flag_set = set(flags)
    per_phoneme = tuple(
        PhonemeScore(phoneme=segment.phoneme, normalized_score=z,
                     flagged=i in flag_set)
        for i, (segment, z) in enumerate(zip(segments, z_scores)))
    flagged_names = [segments[i].phoneme for i in flags]
    return Feedback(verdict=verdict, per_phoneme=per_phoneme,
                    faulty_indices=flags,
                    message=_message(verdict, item.word, flagged_names))


def next_action(feedback: Feedback, repeats_so_far: int, teacher_limit: int) -> str:
    """Advance on success; require repeats until the teacher's limit."""
    if repeats_so_far < 0 or teacher_limit < 0:
        raise ValueError("repeat counts must be non-negative")
    if feedback.verdict == "Accepted":
        return "Advance"
    if repeats_so_far < teacher_limit:
        return "RepeatRequired"
    return "OfferRepeat"


@dataclass(frozen=True)
class ClassStats:
    learner_id: str
    phoneme_class: PhonemeClass
    attempts: int
    accepted: int
    success_rate: float  # percent

    def __post_init__(self):
        if not 0 <= self.accepted <= self.attempts:
            raise ValueError("need 0 <= accepted <= attempts")
        if self.attempts > 0:
            expected = 100.0 * self.accepted / self.attempts
            if abs(self.success_rate - expected) > 1e-9:
                raise ValueError("success_rate must equal 100*accepted/attempts")

    def to_dict(self) -> dict:
        return {
            "learner_id": self.learner_id,
            "class": self.phoneme_class.value,
            "attempts": self.attempts,
            "accepted": self.accepted,
            "success_rate": self.success_rate,
        }


_CLASS_ORDER = {c: i for i, c in enumerate(PhonemeClass)}


def aggregate_stats(history) -> list[ClassStats]:
    """Group (learner_id, WordItem, Feedback) attempts by learner and class."""
    counts: dict[tuple, list] = {}
    for learner_id, item, feedback in history:
        key = (learner_id, item.phoneme_class)
        bucket = counts.setdefault(key, [0, 0])
        bucket[0] += 1
        bucket[1] += feedback.verdict == "Accepted"
    rows = []
    for (learner_id, phoneme_class), (attempts, accepted) in sorted(
            counts.items(), key=lambda kv: (kv[0][0], _CLASS_ORDER[kv[0][1]])):
        rows.append(ClassStats(
            learner_id=learner_id, phoneme_class=phoneme_class,
            attempts=attempts, accepted=accepted,
            success_rate=100.0 * accepted / attempts))
    return rows


def stats_csv(stats) -> str:
    """Render class statistics as CSV with a fixed header."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["learner_id", "class", "attempts", "accepted", "success_rate"])
    for s in stats:
        writer.writerow([s.learner_id, s.phoneme_class.value, s.attempts,
                         s.accepted, f"{s.success_rate:.1f}"])
    return out.getvalue()


def stats_json(stats) -> str:
    return json.dumps([s.to_dict() for s in stats], ensure_ascii=False, indent=1)
