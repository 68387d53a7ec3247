"""Acceptance gate: one check per headline criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Each check is self-contained, seeded, and validates the library end to end
against independent oracles or exact arithmetic at its stated tolerance.
"""

import itertools
import json
import time
from pathlib import Path

import numpy as np
import pytest

from nutq.acoustic import (
    TrainingConfig,
    baum_welch_iteration,
    calibrate_score_stats,
    flat_start_model,
)
from nutq.audio import FrameParams, compute_mfcc, encode_wav, frame_signal, load_wav
from nutq.cli import main as cli_main
from nutq.decoder import LanguagePrior, forced_align, recognize_isolated
from nutq.errors import AudioTooShort, NoValidPath
from nutq.feedback import FeedbackPolicy, WordItem, classify_word, evaluate_attempt, policy_verdict
from nutq.hmm import forward_log_prob, viterbi
from nutq.lexicon import phonetize
from nutq.wer import EditOps, align_labels, compute_wer

from conftest import (
    attempt_wav,
    random_composite,
    reference_model,
    sample_utterance,
    tone_samples,
)
from oracles import brute_force_forward, brute_force_viterbi, frame_loglik_matrix
from test_decoder import make_lexicon
from test_feedback import calibrated_model, synth_attempt

FIXTURES = Path(__file__).parent / "fixtures"


def report(name: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'} [{name}] {detail}"
    print(line, flush=True)
    assert ok, line


# -- 1. dynamic-programming decoders vs. brute-force enumeration -------------------


def test_dp_oracle_equivalence():
    rng = np.random.default_rng(101)
    start = time.monotonic()
    worst_viterbi = 0.0
    worst_forward = 0.0
    models = 500
    for _ in range(models):
        composite, mixtures = random_composite(rng, max_states=4)
        frame_count = int(rng.integers(1, 7))
        frames = rng.normal(0.0, 2.0, size=(frame_count, 2))
        frame_ll = frame_loglik_matrix(frames, mixtures)
        log_self = composite.log_self
        log_advance = composite.log_advance

        _, oracle_best = brute_force_viterbi(log_self, log_advance, frame_ll)
        oracle_total = brute_force_forward(log_self, log_advance, frame_ll)
        try:
            _, got_best = viterbi(composite, frames)
        except NoValidPath:
            got_best = -np.inf
        got_total = forward_log_prob(composite, frames)

        if oracle_best == -np.inf or got_best == -np.inf:
            assert oracle_best == got_best
        else:
            worst_viterbi = max(worst_viterbi, abs(got_best - oracle_best))
        if oracle_total == -np.inf or got_total == -np.inf:
            assert oracle_total == got_total
        else:
            worst_forward = max(worst_forward, abs(got_total - oracle_total))
    elapsed = time.monotonic() - start
    ok = worst_viterbi <= 1e-9 and worst_forward <= 1e-9 and elapsed < 60.0
    report("dp-oracle-equivalence", ok,
           f"{models} random models: max |viterbi error| {worst_viterbi:.2e}, "
           f"max |forward error| {worst_forward:.2e}, {elapsed:.1f}s")


# -- 2. EM monotonicity and invariants ----------------------------------------------


def _check_model_invariants(model, floor):
    for hmm in model.hmms.values():
        rows = np.exp(hmm.transitions)
        assert np.allclose(rows.sum(axis=1), 1.0, atol=1e-9), hmm.phoneme
        for gmm in hmm.emissions:
            assert abs(float(np.sum(gmm.weights)) - 1.0) <= 1e-9
            assert (gmm.variances >= floor * (1.0 - 1e-12)).all()


def test_em_monotonicity():
    corpora = 20
    steps = 10
    floor = 1e-4
    worst_drop = 0.0
    for c in range(corpora):
        rng = np.random.default_rng(200 + c)
        truth = reference_model(["P", "Q"], separation=float(rng.uniform(3.0, 6.0)))
        transcripts = [("P", "Q"), ("Q", "P"), ("SIL", "P", "Q", "SIL"),
                       ("P",), ("Q", "Q")]
        corpus = [sample_utterance(truth, t, rng) for t in transcripts * 3]
        config = TrainingConfig(state_count=2, iterations=0, variance_floor=floor)
        model = flat_start_model(corpus, config, truth.inventory)

        likelihoods = []
        for _ in range(steps + 1):
            model, ll = baum_welch_iteration(model, corpus, floor)
            likelihoods.append(ll)
            _check_model_invariants(model, floor)
        diffs = np.diff(likelihoods)
        worst_drop = max(worst_drop, float(-diffs.min()))
    ok = worst_drop <= 1e-8
    report("em-monotonicity", ok,
           f"{corpora} corpora x {steps} steps: worst log-likelihood drop "
           f"{worst_drop:.2e} (allowed 1e-8)")


# -- 3. isolated-word recognition on a synthetic lexicon ----------------------------


def test_synthetic_recognition():
    rng = np.random.default_rng(303)
    # real inventory symbols: pronunciation entries validate against it
    symbols = ["B", "AE", "T", "F", "IY", "M"]
    model = reference_model(symbols, separation=6.0)
    prons = {}
    pool = [c for c in itertools.product(symbols, repeat=2)] + \
           [c for c in itertools.product(symbols, repeat=3)]
    rng.shuffle(pool)
    for i in range(10):
        prons[f"word{i:02d}"] = list(pool[i])
    lexicon = make_lexicon(prons)

    weights = {w: float(rng.uniform(0.5, 2.0)) for w in prons}
    priors = LanguagePrior.from_weights(weights)
    rescaled = LanguagePrior.from_weights({w: 3.7 * v for w, v in weights.items()})

    trials = 200
    hits = 0
    rescaling_stable = True
    for _ in range(trials):
        word = f"word{int(rng.integers(0, 10)):02d}"
        utt = sample_utterance(model, prons[word], rng)
        ranked = recognize_isolated(utt.features, lexicon, model)
        hits += ranked[0].word == word
        with_priors = recognize_isolated(utt.features, lexicon, model, priors)
        with_rescaled = recognize_isolated(utt.features, lexicon, model, rescaled)
        if [h.word for h in with_priors] != [h.word for h in with_rescaled]:
            rescaling_stable = False
    accuracy = 100.0 * hits / trials
    ok = accuracy >= 95.0 and rescaling_stable
    report("synthetic-recognition", ok,
           f"10-word lexicon, {trials} trials: top-1 accuracy {accuracy:.1f}% "
           f"(need >= 95%), prior-rescaling ranking stable: {rescaling_stable}")


# -- 4. forced-alignment boundary recovery ------------------------------------------


def test_forced_alignment_boundaries():
    rng = np.random.default_rng(404)
    model = reference_model(["P", "Q"], separation=6.0)  # >= 5 sigma apart
    trials = 100
    within = 0
    decomposition_ok = True
    for _ in range(trials):
        left = int(rng.integers(3, 10))
        right = int(rng.integers(3, 10))
        rows = []
        for symbol, count in (("P", left), ("Q", right)):
            emissions = model.hmms[symbol].emissions
            split = count // 2
            for state, n in ((0, split), (1, count - split)):
                mean = emissions[state].means[0]
                rows.append(rng.normal(mean, 1.0, size=(n, mean.shape[0])))
        frames = np.vstack(rows)

        alignment = forced_align(frames, ("P", "Q"), model)
        p_segment = next(s for s in alignment.segments if s.phoneme == "P")
        recovered = p_segment.end_frame + 1
        within += abs(recovered - left) <= 2

        total = sum(s.log_score for s in alignment.segments)
        total += alignment.bridge_log_score
        if abs(total - alignment.total_log_score) > 1e-9:
            decomposition_ok = False
    rate = 100.0 * within / trials
    ok = rate >= 90.0 and decomposition_ok
    report("forced-alignment-boundaries", ok,
           f"{trials} two-phoneme trials: boundary within +/-2 frames in "
           f"{rate:.0f}% (need >= 90%), score decomposition exact: "
           f"{decomposition_ok}")


# -- 5. exhaustive edit-distance oracle ----------------------------------------------


def _batch_edit_distances(ref_len: int, hyp_len: int, alphabet_size: int):
    """Minimal edit cost for every (ref, hyp) pair of the given lengths."""
    ref_rows = list(itertools.product(range(alphabet_size), repeat=ref_len))
    hyp_rows = list(itertools.product(range(alphabet_size), repeat=hyp_len))
    refs = np.array(ref_rows, dtype=np.int8).reshape(len(ref_rows), ref_len)
    hyps = np.array(hyp_rows, dtype=np.int8).reshape(len(hyp_rows), hyp_len)
    n_refs, n_hyps = refs.shape[0], hyps.shape[0]
    dist = np.zeros((n_refs, n_hyps, ref_len + 1, hyp_len + 1), dtype=np.int8)
    dist[:, :, :, 0] = np.arange(ref_len + 1, dtype=np.int8)
    dist[:, :, 0, :] = np.arange(hyp_len + 1, dtype=np.int8)
    for i in range(1, ref_len + 1):
        for j in range(1, hyp_len + 1):
            substitution = dist[:, :, i - 1, j - 1] + \
                (refs[:, None, i - 1] != hyps[None, :, j - 1])
            best = np.minimum(dist[:, :, i - 1, j] + 1, dist[:, :, i, j - 1] + 1)
            dist[:, :, i, j] = np.minimum(best, substitution)
    return refs, hyps, dist[:, :, ref_len, hyp_len]


def test_wer_oracle():
    alphabet = ("a", "b", "c")
    start = time.monotonic()
    pairs = 0
    for ref_len in range(1, 7):
        for hyp_len in range(0, 7):
            refs, hyps, oracle = _batch_edit_distances(ref_len, hyp_len,
                                                       len(alphabet))
            ref_seqs = [tuple(alphabet[s] for s in row) for row in refs]
            hyp_seqs = [tuple(alphabet[s] for s in row) for row in hyps]
            for r, ref_seq in enumerate(ref_seqs):
                row = oracle[r]
                for h, hyp_seq in enumerate(hyp_seqs):
                    ops = align_labels(ref_seq, hyp_seq)
                    cost = ops.deletions + ops.substitutions + ops.insertions
                    assert cost == row[h], (ref_seq, hyp_seq)
                    pairs += 1
    elapsed = time.monotonic() - start

    published = compute_wer(EditOps(hits=883, deletions=60, substitutions=57,
                                    insertions=12))
    arithmetic_ok = (abs(published.percent_correct - 88.3) < 1e-12
                     and abs(published.wer - 11.7) < 1e-12
                     and published.percent_correct + published.wer == 100.0)
    report("wer-oracle", arithmetic_ok,
           f"exhaustive {pairs} label pairs (3 symbols, lengths <= 6) match "
           f"the edit-distance oracle exactly in {elapsed:.0f}s; "
           f"88.3/11.7 arithmetic consistent: {arithmetic_ok}")


# -- 6. golden words: grapheme-to-phoneme plus class labels --------------------------


def test_g2p_golden_set():
    entries = json.loads((FIXTURES / "golden_words.json").read_text("utf-8"))
    assert len(entries) == 24
    bad = []
    for entry in entries:
        phonemes = phonetize(entry["word"])
        label = classify_word(tuple(phonemes), entry["word"]).name
        if phonemes != entry["phonemes"] or label != entry["word_class"]:
            bad.append(entry["word"])
    report("g2p-golden-set", not bad,
           f"24 golden words: phonemes and class labels all reproduced"
           + (f"; mismatches: {bad}" if bad else ""))


# -- 7. MFCC framing, determinism, and filterbank placement --------------------------


def test_mfcc_properties():
    rng = np.random.default_rng(707)
    framing_ok = True
    for _ in range(1000):
        signal_len = int(rng.integers(1, 12001))
        frame_len = int(rng.integers(2, 801))
        shift = int(rng.integers(1, frame_len + 1))
        signal = rng.normal(size=signal_len)
        if signal_len < frame_len:
            with pytest.raises(AudioTooShort):
                frame_signal(signal, frame_len, shift)
            continue
        frames = frame_signal(signal, frame_len, shift)
        expected = 1 + (signal_len - frame_len) // shift
        if frames.shape[0] != expected:
            framing_ok = False

    wav = encode_wav(tone_samples(("SIL", "F", "IY", "SIL"),
                                  np.random.default_rng(7)))
    first = compute_mfcc(load_wav(wav)).frames
    second = compute_mfcc(load_wav(wav)).frames
    deterministic = np.array_equal(first, second)

    params = FrameParams()
    t = np.arange(16000) / 16000.0
    tone = (30000 * np.sin(2 * np.pi * 1000.0 * t)).astype(np.int16)
    from nutq.audio import hz_to_mel, log_mel_spectrogram, mel_filter_centers_hz

    energies = log_mel_spectrogram(load_wav(encode_wav(tone)), params)
    # filters are triangles of equal width on the mel axis, so "nearest
    # center" is measured in mel units, not hertz
    centers_mel = hz_to_mel(np.asarray(mel_filter_centers_hz(params.mel_filter_count)))
    expected_filter = int(np.argmin(np.abs(centers_mel - hz_to_mel(1000.0))))
    argmax_ok = bool((np.argmax(energies, axis=1) == expected_filter).all())

    ok = framing_ok and deterministic and argmax_ok
    report("mfcc-properties", ok,
           f"frame-count formula exact on 1000 random (S, L, H): {framing_ok}; "
           f"bit-identical re-runs: {deterministic}; 1 kHz tone peaks in "
           f"filter {expected_filter}: {argmax_ok}")


# -- 8. feedback policy: detection, acceptance, monotonicity -------------------------


def test_feedback_policy():
    rng = np.random.default_rng(808)
    model = calibrated_model(rng, reps=20)
    item = WordItem.from_word("بَتْ", "A1")  # B AE T

    accepted = 0
    for _ in range(100):
        feedback = evaluate_attempt(synth_attempt(model, item.phonemes, rng),
                                    item, model)
        accepted += feedback.verdict == "Accepted"

    shift = 10.0 / np.sqrt(2.0) * np.array([-1.0, 1.0])
    detected = 0
    for _ in range(100):
        frames = synth_attempt(model, item.phonemes, rng, shifted="AE",
                               shift=shift)
        feedback = evaluate_attempt(frames, item, model)
        detected += feedback.verdict == "Faulty" and 1 in feedback.faulty_indices

    monotone = True
    for _ in range(100):
        z = rng.normal(-1.0, 2.0, size=int(rng.integers(2, 7)))
        loose_t = float(rng.uniform(1.5, 3.0))
        strict_t = loose_t - float(rng.uniform(0.1, 1.0))
        loose, loose_flags, _ = policy_verdict(
            z, FeedbackPolicy(phoneme_z_threshold=loose_t))
        strict, strict_flags, _ = policy_verdict(
            z, FeedbackPolicy(phoneme_z_threshold=strict_t))
        if not set(loose_flags) <= set(strict_flags):
            monotone = False
        if loose == "Faulty" and strict == "Accepted":
            monotone = False

    ok = accepted >= 95 and detected >= 90 and monotone
    report("feedback-policy", ok,
           f"clean attempts accepted {accepted}/100 (need >= 95); shifted "
           f"phoneme flagged Faulty {detected}/100 (need >= 90); threshold "
           f"monotonicity on 100 inputs: {monotone}")


# -- 9. end-to-end command line ------------------------------------------------------


def test_end_to_end_cli(tmp_path, capsys):
    start = time.monotonic()
    rng = np.random.default_rng(909)
    corpus = tmp_path / "corpus"
    (corpus / "wav").mkdir(parents=True)
    (corpus / "etc").mkdir()
    phones = ("F", "IY", "B")
    lines = []
    for i in range(9):
        transcript = ("SIL", phones[i % 3], phones[(i + 1) % 3], "SIL")
        utt_id = f"utt{i:02d}"
        wav = encode_wav(tone_samples(transcript, rng))
        (corpus / "wav" / f"{utt_id}.wav").write_bytes(wav)
        lines.append(f"{utt_id} {' '.join(transcript)}")
    (corpus / "etc" / "transcripts.txt").write_text("\n".join(lines) + "\n",
                                                    encoding="utf-8")

    model_path = tmp_path / "tones.model"
    with pytest.warns(UserWarning):
        train_rc = cli_main(["train", str(corpus), str(model_path),
                             "--iterations", "3"])

    held_out = tmp_path / "held_out.wav"
    held_out.write_bytes(attempt_wav(("F", "IY"), rng))
    align_rc = cli_main(["align", str(model_path), str(held_out), "F IY"])
    align_out = capsys.readouterr().out
    dump_ok = align_out.strip().splitlines()[-1].startswith("TOTAL ")

    ref = tmp_path / "ref.txt"
    hyp = tmp_path / "hyp.txt"
    ref.write_text("u1 F IY B\nu2 B IY\n", encoding="utf-8")
    hyp.write_text("u1 F IY B\nu2 B F\n", encoding="utf-8")
    wer_rc = cli_main(["eval-wer", str(ref), str(hyp)])
    wer_out = capsys.readouterr().out
    wer_ok = wer_out.splitlines()[0] == "correct=80.0 wer=20.0"

    elapsed = time.monotonic() - start
    ok = (train_rc == 0 and align_rc == 0 and wer_rc == 0 and dump_ok
          and wer_ok and elapsed < 120.0)
    with capsys.disabled():
        report("end-to-end-cli", ok,
               f"train/align/eval-wer all exited 0 in {elapsed:.1f}s "
               f"(limit 120s); alignment dump and WER arithmetic verified")
