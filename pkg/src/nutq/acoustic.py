"""Per-phoneme GMM-HMM acoustic models and Baum-Welch training.

Each phoneme (including SIL) owns a small left-to-right HMM whose states emit
through diagonal-covariance Gaussian mixtures.  Training starts from a flat
initialization (global corpus statistics, lightly perturbed per state) and
re-estimates all parameters with expectation-maximization over the composite
HMM of every utterance's transcript.  A trained model also carries per-phoneme
per-frame alignment-score statistics used downstream to normalize learner
attempt scores.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .audio import FrameParams
from .errors import (
    CompositionError,
    DimensionMismatch,
    EmptyInput,
    NoValidPath,
    UncoveredPhonemeWarning,
    UnknownPhoneme,
)
from .hmm import (
    LOG_ZERO,
    CompositeHmm,
    GaussianMixture,
    backward_log_matrix,
    forward_log_matrix,
    forward_log_prob,
    gmm_log_likelihood,
    segment_path,
    viterbi,
)
from .lexicon import INVENTORY, Phoneme, PhonemeInventory

__all__ = [
    "DEFAULT_VARIANCE_FLOOR", "PhonemeHmm", "AcousticModel", "TrainingConfig",
    "TrainingUtterance", "gmm_log_likelihood", "forward_log_prob",
    "compose_word_hmm", "baum_welch_iteration", "train_acoustic_model",
    "calibrate_score_stats", "flat_start_model", "save_model", "load_model",
    "MODEL_FORMAT", "MODEL_VERSION",
]

DEFAULT_VARIANCE_FLOOR = 1e-4
MODEL_FORMAT = "nutq-acoustic-model"
MODEL_VERSION = 1


@dataclass
class PhonemeHmm:
    """Left-to-right HMM for one phoneme.

    ``transitions`` is a state_count x (state_count + 1) matrix of log
    probabilities whose final column is the exit; row i may put mass only on
    columns i (self-loop) and i+1 (advance, which for the last row is exit).
    """

    phoneme: str
    transitions: np.ndarray
    emissions: list[GaussianMixture]

    def __post_init__(self):
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        n = len(self.emissions)
        if self.transitions.shape != (n, n + 1):
            raise ValueError(f"transitions must be {n}x{n + 1}")
        with np.errstate(over="ignore"):
            linear = np.exp(self.transitions)
        if not np.allclose(linear.sum(axis=1), 1.0, atol=1e-9):
            raise ValueError("transition rows must sum to 1")
        allowed = np.zeros_like(linear, dtype=bool)
        for i in range(n):
            allowed[i, i] = allowed[i, i + 1] = True
        if (linear[~allowed] > 0).any():
            raise ValueError("only self-loop and advance transitions are allowed")

    @property
    def state_count(self) -> int:
        return len(self.emissions)

    @property
    def log_stay(self) -> np.ndarray:
        return np.diagonal(self.transitions).copy()

    @property
    def log_advance(self) -> np.ndarray:
        n = self.state_count
        return self.transitions[np.arange(n), np.arange(1, n + 1)]


@dataclass
class TrainingUtterance:
    """One transcribed training example: frames plus its phoneme sequence."""

    features: np.ndarray
    transcript: tuple[str, ...]

    def __post_init__(self):
        self.features = np.asarray(getattr(self.features, "frames", self.features),
                                   dtype=np.float64)
        self.transcript = tuple(self.transcript)
        if not self.transcript:
            raise EmptyInput("transcript is empty")
        if self.features.ndim != 2 or self.features.shape[0] == 0:
            raise EmptyInput("feature sequence is empty")


@dataclass(frozen=True)
class TrainingConfig:
    state_count: int = 3
    mixture_count: int = 1
    iterations: int = 10
    variance_floor: float = DEFAULT_VARIANCE_FLOOR
    seed: int = 0
    frame_params: FrameParams = field(default_factory=FrameParams)

    def __post_init__(self):
        if self.state_count < 1 or self.mixture_count < 1 or self.iterations < 0:
            raise ValueError("state_count and mixture_count must be >= 1, iterations >= 0")
        if self.variance_floor <= 0:
            raise ValueError("variance_floor must be positive")


@dataclass
class AcousticModel:
    """One HMM per inventory phoneme plus training-score statistics."""

    inventory: PhonemeInventory
    hmms: dict[str, PhonemeHmm]
    feature_dim: int
    training_score_stats: dict[str, tuple[float, float]] = field(default_factory=dict)
    frame_params: FrameParams = field(default_factory=FrameParams)

    def __post_init__(self):
        if set(self.hmms) != set(self.inventory.symbols):
            missing = set(self.inventory.symbols) - set(self.hmms)
            extra = set(self.hmms) - set(self.inventory.symbols)
            raise ValueError(f"hmms must cover the inventory exactly "
                             f"(missing {sorted(missing)}, extra {sorted(extra)})")
        for hmm in self.hmms.values():
            for gmm in hmm.emissions:
                if gmm.dim != self.feature_dim:
                    raise DimensionMismatch(
                        f"{hmm.phoneme}: mixture dim {gmm.dim} != model dim {self.feature_dim}")

    def compose(self, phonemes) -> CompositeHmm:
        return compose_word_hmm(phonemes, self)


def compose_word_hmm(phonemes, model: AcousticModel) -> CompositeHmm:
    """Concatenate per-phoneme HMMs into one left-to-right chain.

    The exit of each phoneme feeds the entry of the next; state provenance
    records which transcript position each composite state came from.
    """
    phonemes = tuple(phonemes)
    if not phonemes:
        raise EmptyInput("cannot compose an empty phoneme sequence")
    missing = sorted({p for p in phonemes if p not in model.hmms})
    if missing:
        raise UnknownPhoneme(f"not in model: {missing}")

    log_self, log_advance, mixtures, provenance = [], [], [], []
    for k, symbol in enumerate(phonemes):
        hmm = model.hmms[symbol]
        log_self.extend(hmm.log_stay)
        log_advance.extend(hmm.log_advance)
        mixtures.extend(hmm.emissions)
        provenance.extend([k] * hmm.state_count)
    return CompositeHmm(
        log_self=np.array(log_self),
        log_advance=np.array(log_advance),
        mixtures=mixtures,
        phonemes=phonemes,
        provenance=np.array(provenance, dtype=np.int64),
    )


# -- initialization ---------------------------------------------------------------------


def _split_mixture(gmm: GaussianMixture, target: int) -> GaussianMixture:
    """Grow a mixture to ``target`` components by deterministic mean splitting.

    Repeatedly splits the heaviest component into a pair offset by 0.2 standard
    deviations, halving its weight.
    """
    weights = list(np.asarray(gmm.weights, dtype=np.float64))
    means = [np.array(m) for m in gmm.means]
    variances = [np.array(v) for v in gmm.variances]
    while len(weights) < target:
        i = int(np.argmax(weights))
        offset = 0.2 * np.sqrt(variances[i])
        w = weights[i] / 2.0
        weights[i] = w
        means.append(means[i] + offset)
        means[i] = means[i] - offset
        weights.append(w)
        variances.append(variances[i].copy())
    return GaussianMixture(np.array(weights), np.array(means), np.array(variances))


def flat_start_model(corpus: list[TrainingUtterance], config: TrainingConfig,
                     inventory: PhonemeInventory = INVENTORY) -> AcousticModel:
    """Initialize every phoneme HMM from global corpus statistics.

    Transitions start uniform (0.5 self / 0.5 advance); every state's Gaussian
    starts at the pooled corpus mean and variance, with a seeded perturbation
    of up to 1% of a standard deviation per state to break symmetry.
    """
    if not corpus:
        raise EmptyInput("corpus is empty")
    all_frames = np.concatenate([u.features for u in corpus], axis=0)
    dim = all_frames.shape[1]
    global_mean = all_frames.mean(axis=0)
    global_var = np.maximum(all_frames.var(axis=0), config.variance_floor)
    scale = np.sqrt(global_var)

    rng = np.random.default_rng(config.seed)
    transition_rows = np.full((config.state_count, config.state_count + 1), LOG_ZERO)
    for i in range(config.state_count):
        transition_rows[i, i] = transition_rows[i, i + 1] = np.log(0.5)

    hmms = {}
    for phoneme in inventory.symbols:
        emissions = []
        for _ in range(config.state_count):
            jitter = rng.uniform(-0.01, 0.01, size=dim) * scale
            gmm = GaussianMixture(np.array([1.0]), (global_mean + jitter)[None, :],
                                  global_var[None, :].copy())
            if config.mixture_count > 1:
                gmm = _split_mixture(gmm, config.mixture_count)
            emissions.append(gmm)
        hmms[phoneme] = PhonemeHmm(phoneme, transition_rows.copy(), emissions)
    return AcousticModel(inventory=inventory, hmms=hmms, feature_dim=dim,
                         frame_params=config.frame_params)


# -- expectation-maximization ----------------------------------------------------------------


def _validate_corpus(model: AcousticModel, corpus: list[TrainingUtterance]):
    if not corpus:
        raise EmptyInput("corpus is empty")
    for i, utt in enumerate(corpus):
        missing = sorted({p for p in utt.transcript if p not in model.hmms})
        if missing:
            raise CompositionError(f"utterance {i}: phonemes {missing} not in model")
        if utt.features.shape[1] != model.feature_dim:
            raise DimensionMismatch(
                f"utterance {i}: feature dim {utt.features.shape[1]} != {model.feature_dim}")


def baum_welch_iteration(model: AcousticModel, corpus: list[TrainingUtterance],
                         variance_floor: float = DEFAULT_VARIANCE_FLOOR,
                         ) -> tuple[AcousticModel, float]:
    """One EM step over the corpus.

    Returns the re-estimated model and the total log-likelihood of the corpus
    under the model *before* the update.  States that receive no occupancy
    keep their prior parameters; re-estimated variances are clamped to the
    floor.
    """
    _validate_corpus(model, corpus)

    # accumulators keyed by (phoneme symbol, state index within the phoneme)
    self_count: dict = {}
    adv_count: dict = {}
    comp_occ: dict = {}
    comp_sum: dict = {}
    comp_sqsum: dict = {}

    def _acc(d, key, value):
        d[key] = d.get(key, 0.0) + value

    total_ll = 0.0
    for i, utt in enumerate(corpus):
        composite = compose_word_hmm(utt.transcript, model)
        T, S = utt.features.shape[0], composite.state_count
        if T < S:
            raise NoValidPath(
                f"utterance {i}: {T} frames cannot traverse {S} states")
        emissions = composite.emission_log_likelihoods(utt.features)
        alpha = forward_log_matrix(composite, emissions)
        beta = backward_log_matrix(composite, emissions)
        utt_ll = alpha[-1, -1] + composite.log_advance[-1]
        if utt_ll == LOG_ZERO:
            raise NoValidPath(f"utterance {i}: transcript has zero probability")
        total_ll += utt_ll

        gamma = np.exp(alpha + beta - utt_ll)  # (T, S) state posteriors

        # map composite states back to (phoneme, local state)
        keys = []
        local = 0
        for s in range(S):
            if s > 0 and composite.provenance[s] != composite.provenance[s - 1]:
                local = 0
            keys.append((composite.phonemes[composite.provenance[s]], local))
            local += 1

        # transition posteriors; the advance of a phoneme-final state is its
        # exit mass whether it bridges onward or leaves the composite
        if T > 1:
            xi_self = np.exp(alpha[:-1] + composite.log_self[None, :]
                             + emissions[1:] + beta[1:] - utt_ll)
            xi_adv = np.exp(alpha[:-1, :-1] + composite.log_advance[None, :-1]
                            + emissions[1:, 1:] + beta[1:, 1:] - utt_ll)
            for s in range(S):
                _acc(self_count, keys[s], xi_self[:, s].sum())
                if s < S - 1:
                    _acc(adv_count, keys[s], xi_adv[:, s].sum())
        _acc(adv_count, keys[S - 1], gamma[T - 1, S - 1])

        # mixture-component posteriors
        squared = utt.features ** 2
        resp_cache: dict = {}
        for s in range(S):
            occ = gamma[:, s]
            if occ.max() <= 0.0:
                continue
            gmm = composite.mixtures[s]
            key = keys[s]
            if gmm.component_count == 1:
                resp = occ[:, None]
            else:
                if key not in resp_cache:
                    comp_ll = np.column_stack([
                        GaussianMixture(np.array([1.0]), gmm.means[k][None, :],
                                        gmm.variances[k][None, :]).log_likelihoods(utt.features)
                        for k in range(gmm.component_count)
                    ])
                    with np.errstate(divide="ignore"):
                        resp_cache[key] = np.exp(
                            np.log(gmm.weights)[None, :] + comp_ll
                            - emissions[:, s][:, None])
                resp = occ[:, None] * resp_cache[key]  # (T, K)
            for k in range(gmm.component_count):
                _acc(comp_occ, (*key, k), resp[:, k].sum())
                _acc(comp_sum, (*key, k), resp[:, k] @ utt.features)
                _acc(comp_sqsum, (*key, k), resp[:, k] @ squared)

    # maximization
    new_hmms = {}
    for symbol, hmm in model.hmms.items():
        n = hmm.state_count
        transitions = hmm.transitions.copy()
        emissions = []
        for s in range(n):
            key = (symbol, s)
            stay = self_count.get(key, 0.0)
            leave = adv_count.get(key, 0.0)
            if stay + leave > 0.0:
                with np.errstate(divide="ignore"):
                    transitions[s, s] = np.log(stay / (stay + leave))
                    transitions[s, s + 1] = np.log(leave / (stay + leave))
            gmm = hmm.emissions[s]
            occs = np.array([comp_occ.get((*key, k), 0.0)
                             for k in range(gmm.component_count)])
            if occs.sum() <= 1e-12:
                emissions.append(gmm)  # zero occupancy: keep prior parameters
                continue
            weights, means, variances = [], [], []
            for k in range(gmm.component_count):
                if occs[k] <= 1e-12:
                    weights.append(0.0)
                    means.append(gmm.means[k])
                    variances.append(gmm.variances[k])
                    continue
                mean = comp_sum[(*key, k)] / occs[k]
                var = comp_sqsum[(*key, k)] / occs[k] - mean ** 2
                weights.append(occs[k])
                means.append(mean)
                variances.append(np.maximum(var, variance_floor))
            weights = np.array(weights) / occs.sum()
            emissions.append(GaussianMixture(weights, np.array(means), np.array(variances)))
        new_hmms[symbol] = PhonemeHmm(symbol, transitions, emissions)

    new_model = AcousticModel(
        inventory=model.inventory, hmms=new_hmms, feature_dim=model.feature_dim,
        training_score_stats=dict(model.training_score_stats),
        frame_params=model.frame_params)
    return new_model, float(total_ll)


def calibrate_score_stats(model: AcousticModel, corpus: list[TrainingUtterance],
                          ) -> dict[str, tuple[float, float]]:
    """Per-phoneme (mean, stddev) of per-frame alignment scores on a corpus.

    Aligns every utterance with its own transcript and pools each segment's
    average per-frame log score by phoneme.  Phonemes never seen fall back to
    the pooled statistics of everything else; standard deviations are floored
    so downstream z-scores stay finite.
    """
    _validate_corpus(model, corpus)
    per_phoneme: dict[str, list[float]] = {}
    everything: list[float] = []
    for utt in corpus:
        composite = compose_word_hmm(utt.transcript, model)
        emissions = composite.emission_log_likelihoods(utt.features)
        path, _ = viterbi(composite, utt.features)
        segments, _ = segment_path(composite, emissions, path)
        for phoneme_index, start, end, score in segments:
            per_frame = score / (end - start + 1)
            per_phoneme.setdefault(composite.phonemes[phoneme_index], []).append(per_frame)
            everything.append(per_frame)

    def summarize(values) -> tuple[float, float]:
        if not values:
            return 0.0, 1.0
        mean = float(np.mean(values))
        std = 1.0 if len(values) < 2 else max(float(np.std(values)), 1e-3)
        return mean, std

    pooled = summarize(everything)
    stats = {}
    for symbol in model.inventory.symbols:
        stats[symbol] = summarize(per_phoneme[symbol]) if symbol in per_phoneme else pooled
    return stats


def train_acoustic_model(corpus: list[TrainingUtterance],
                         config: TrainingConfig = TrainingConfig(),
                         inventory: PhonemeInventory = INVENTORY) -> AcousticModel:
    """Flat start + EM iterations + alignment-score calibration.

    Phonemes missing from the corpus keep their flat-start parameters and are
    reported through an UncoveredPhonemeWarning.
    """
    if not corpus:
        raise EmptyInput("corpus is empty")
    seen = set()
    for utt in corpus:
        unknown = sorted({p for p in utt.transcript if p not in inventory})
        if unknown:
            raise UnknownPhoneme(f"transcript uses symbols outside the inventory: {unknown}")
        seen.update(utt.transcript)
    uncovered = sorted(set(inventory.symbols) - seen)
    if uncovered:
        warnings.warn(
            f"{len(uncovered)} phonemes absent from the training corpus keep "
            f"flat-start parameters: {uncovered}", UncoveredPhonemeWarning, stacklevel=2)

    model = flat_start_model(corpus, config, inventory)
    for _ in range(config.iterations):
        model, _ = baum_welch_iteration(model, corpus, config.variance_floor)
    model.training_score_stats = calibrate_score_stats(model, corpus)
    return model


# -- persistence ----------------------------------------------------------------------------


def _gmm_to_dict(gmm: GaussianMixture) -> dict:
    return {"weights": gmm.weights.tolist(), "means": gmm.means.tolist(),
            "variances": gmm.variances.tolist()}


def save_model(model: AcousticModel) -> str:
    """Serialize a model to a self-describing JSON document."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "feature_dim": model.feature_dim,
        "frame_params": model.frame_params.to_dict(),
        "inventory": [{"symbol": p.symbol, "category": p.category, "note": p.note}
                      for p in model.inventory],
        "hmms": {
            symbol: {
                "transitions": np.exp(hmm.transitions).tolist(),
                "emissions": [_gmm_to_dict(g) for g in hmm.emissions],
            }
            for symbol, hmm in model.hmms.items()
        },
        "training_score_stats": {k: list(v) for k, v in model.training_score_stats.items()},
    }
    return json.dumps(doc, indent=1, sort_keys=True)


def load_model(text: str) -> AcousticModel:
    """Parse a model document produced by save_model."""
    doc = json.loads(text)
    if doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"not an acoustic-model document: format={doc.get('format')!r}")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    inventory = PhonemeInventory(tuple(
        Phoneme(e["symbol"], e["category"], e.get("note", "")) for e in doc["inventory"]))
    hmms = {}
    for symbol, entry in doc["hmms"].items():
        with np.errstate(divide="ignore"):
            transitions = np.log(np.array(entry["transitions"], dtype=np.float64))
        emissions = [GaussianMixture(np.array(g["weights"]), np.array(g["means"]),
                                     np.array(g["variances"]))
                     for g in entry["emissions"]]
        hmms[symbol] = PhonemeHmm(symbol, transitions, emissions)
    stats = {k: (float(v[0]), float(v[1]))
             for k, v in doc.get("training_score_stats", {}).items()}
    return AcousticModel(
        inventory=inventory, hmms=hmms, feature_dim=int(doc["feature_dim"]),
        training_score_stats=stats,
        frame_params=FrameParams.from_dict(doc["frame_params"]))
