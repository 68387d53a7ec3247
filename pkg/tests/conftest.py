"""Shared builders for model-level tests."""

import numpy as np
import pytest

from nutq.hmm import CompositeHmm, GaussianMixture

from oracles import random_left_right_model


def composite_from_arrays(log_self, log_advance, mixtures, phonemes=None):
    """Wrap plain oracle arrays into a CompositeHmm (single-phoneme provenance)."""
    gmms = [GaussianMixture(w, mu, var) for w, mu, var in mixtures]
    n = len(gmms)
    if phonemes is None:
        phonemes = ("X",)
        provenance = np.zeros(n, dtype=np.int64)
    else:
        per = n // len(phonemes)
        provenance = np.repeat(np.arange(len(phonemes)), per)
    return CompositeHmm(
        log_self=np.asarray(log_self),
        log_advance=np.asarray(log_advance),
        mixtures=gmms,
        phonemes=tuple(phonemes),
        provenance=provenance,
    )


def random_composite(rng, max_states=4, max_components=2, dim=2):
    log_self, log_advance, mixtures = random_left_right_model(
        rng, max_states=max_states, max_components=max_components, dim=dim)
    return composite_from_arrays(log_self, log_advance, mixtures), mixtures


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


# -- tiny acoustic-model builders -------------------------------------------------------

from nutq.acoustic import AcousticModel, PhonemeHmm, TrainingUtterance
from nutq.hmm import sample as sample_hmm
from nutq.lexicon import (
    FRICATIVE,
    OCCLUSIVE,
    SHORT_VOWEL,
    SILENCE,
    Phoneme,
    PhonemeInventory,
)

_CATEGORY_CYCLE = (OCCLUSIVE, SHORT_VOWEL, FRICATIVE)


def tiny_inventory(symbols) -> PhonemeInventory:
    """Small inventory for unit tests: SIL plus the given symbols."""
    phonemes = [Phoneme("SIL", SILENCE)]
    for i, s in enumerate(symbols):
        phonemes.append(Phoneme(s, _CATEGORY_CYCLE[i % len(_CATEGORY_CYCLE)]))
    return PhonemeInventory(tuple(phonemes))


def uniform_transitions(state_count: int) -> np.ndarray:
    rows = np.full((state_count, state_count + 1), -np.inf)
    for i in range(state_count):
        rows[i, i] = rows[i, i + 1] = np.log(0.5)
    return rows


def reference_model(symbols, dim=2, state_count=2, separation=6.0,
                    stats=None) -> AcousticModel:
    """Hand-built model whose phonemes sit at well-separated means.

    Phoneme j's states emit near mean separation*(j+1) in every dimension
    (SIL near 0), with unit variance, so samples are easy to tell apart.
    """
    inventory = tiny_inventory(symbols)
    hmms = {}
    for j, symbol in enumerate(inventory.symbols):
        base = separation * j
        emissions = []
        for s in range(state_count):
            mean = np.full(dim, base + 0.5 * s)
            emissions.append(GaussianMixture(np.array([1.0]), mean[None, :],
                                             np.ones((1, dim))))
        hmms[symbol] = PhonemeHmm(symbol, uniform_transitions(state_count), emissions)
    model = AcousticModel(inventory=inventory, hmms=hmms, feature_dim=dim,
                          training_score_stats=stats or {})
    if stats is None:
        model.training_score_stats = {s: (0.0, 1.0) for s in inventory.symbols}
    return model


def sample_utterance(model, transcript, rng, min_frames=0) -> TrainingUtterance:
    """Draw frames from the model's own generative process for a transcript."""
    composite = model.compose(transcript)
    while True:
        frames, _ = sample_hmm(composite, rng)
        if len(frames) >= max(min_frames, composite.state_count):
            return TrainingUtterance(features=frames, transcript=tuple(transcript))


# -- synthesized tone audio for end-to-end WAV tests -------------------------------

from nutq.audio import encode_wav

# Distinct tone frequencies make the phonemes trivially separable, so a
# model trained on a handful of synthesized utterances aligns new ones
# reliably and the whole WAV -> MFCC -> feedback path stays deterministic.
TONE_HZ = {"SIL": 0.0, "F": 300.0, "IY": 800.0, "B": 1400.0, "AE": 2100.0,
           "T": 2800.0}
TONE_SAMPLE_RATE = 16000


def tone_samples(phonemes, rng, lo_ms=60, hi_ms=100) -> np.ndarray:
    """Int16 waveform: one noisy sine segment per phoneme (SIL is near-silence)."""
    pieces = []
    for phoneme in phonemes:
        length = int(TONE_SAMPLE_RATE * rng.integers(lo_ms, hi_ms + 1) / 1000)
        t = np.arange(length) / TONE_SAMPLE_RATE
        amplitude = 0.0 if phoneme == "SIL" else 0.4
        signal = amplitude * np.sin(2 * np.pi * TONE_HZ[phoneme] * t)
        signal = signal + 0.02 * rng.standard_normal(length)
        pieces.append(signal)
    return (np.concatenate(pieces) * 16000.0).astype(np.int16)


def attempt_wav(phonemes, rng) -> bytes:
    """WAV bytes for one word attempt, silence-padded like a real recording."""
    return encode_wav(tone_samples(("SIL", *phonemes, "SIL"), rng))
