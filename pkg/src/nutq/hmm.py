"""Log-domain primitives for left-to-right Gaussian-mixture HMMs.

A composite model is a chain of states; each state carries a self-loop
probability and an advance probability (the advance of the final state is the
exit).  Paths start in state 0, move monotonically by at most one state per
frame, and must leave the model after the final frame, so the probability of a
state sequence s_0..s_{T-1} is

    prod_t emission(s_t, x_t) * prod_{t>=1} trans(s_{t-1}, s_t) * exit(s_{T-1})

with exit mass only on the last state.  All arithmetic is in natural-log
domain; impossible events carry an explicit -inf that absorbs addition and
loses every max.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DimensionMismatch, EmptyInput, NoValidPath

LOG_ZERO = -np.inf
LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass
class GaussianMixture:
    """Diagonal-covariance Gaussian mixture over feature vectors."""

    weights: np.ndarray   # (K,)
    means: np.ndarray     # (K, D)
    variances: np.ndarray  # (K, D)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        self.variances = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        if self.weights.ndim != 1 or len(self.weights) != len(self.means):
            raise ValueError("one weight per component required")
        if self.means.shape != self.variances.shape:
            raise ValueError("means and variances must share shape")
        if (self.weights < 0).any() or abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        if (self.variances <= 0).any():
            raise ValueError("variances must be positive")

    @property
    def component_count(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def log_likelihoods(self, frames: np.ndarray) -> np.ndarray:
        """Log mixture density of each row of frames, shape (T,)."""
        frames = np.atleast_2d(np.asarray(frames, dtype=np.float64))
        if frames.shape[1] != self.dim:
            raise DimensionMismatch(f"frames have dim {frames.shape[1]}, mixture has {self.dim}")
        # (T, K): log w_k - 0.5 * (D log 2pi + sum log var + mahalanobis)
        diff = frames[:, None, :] - self.means[None, :, :]
        maha = (diff * diff / self.variances[None, :, :]).sum(axis=2)
        const = self.dim * LOG_2PI + np.log(self.variances).sum(axis=1)
        with np.errstate(divide="ignore"):
            comp = np.log(self.weights)[None, :] - 0.5 * (const[None, :] + maha)
        return logsumexp(comp, axis=1)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        k = rng.choice(self.component_count, p=self.weights / self.weights.sum())
        return rng.normal(self.means[k], np.sqrt(self.variances[k]))


def gmm_log_likelihood(gmm: GaussianMixture, x: np.ndarray) -> float:
    """Log density of a single feature vector under the mixture."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("expected a single feature vector")
    return float(gmm.log_likelihoods(x[None, :])[0])


@dataclass
class CompositeHmm:
    """A left-to-right chain of emitting states with phoneme provenance.

    ``log_advance[i]`` is the log probability of leaving state ``i`` forward —
    into state ``i+1``, or out of the model for the final state.
    ``provenance[i]`` indexes into ``phonemes`` (the source unit sequence), so
    decoded state paths can be segmented back into phonemes.
    """

    log_self: np.ndarray
    log_advance: np.ndarray
    mixtures: list[GaussianMixture]
    phonemes: tuple[str, ...]
    provenance: np.ndarray

    def __post_init__(self):
        self.log_self = np.asarray(self.log_self, dtype=np.float64)
        self.log_advance = np.asarray(self.log_advance, dtype=np.float64)
        self.provenance = np.asarray(self.provenance, dtype=np.int64)
        n = len(self.log_self)
        if not (len(self.log_advance) == len(self.mixtures) == len(self.provenance) == n):
            raise ValueError("per-state arrays must share length")
        if n == 0:
            raise ValueError("composite needs at least one state")
        linear = np.exp(self.log_self) + np.exp(self.log_advance)
        if not np.allclose(linear, 1.0, atol=1e-9):
            raise ValueError("self + advance must sum to 1 per state")
        if (np.diff(self.provenance) < 0).any() or (np.diff(self.provenance) > 1).any():
            raise ValueError("provenance must step through phonemes in order")
        if self.provenance[0] != 0 or self.provenance[-1] != len(self.phonemes) - 1:
            raise ValueError("provenance must cover every phoneme")

    @property
    def state_count(self) -> int:
        return len(self.log_self)

    @property
    def feature_dim(self) -> int:
        return self.mixtures[0].dim

    def emission_log_likelihoods(self, frames: np.ndarray) -> np.ndarray:
        """Per-frame, per-state emission log densities, shape (T, S)."""
        return np.column_stack([m.log_likelihoods(frames) for m in self.mixtures])


def _frames_of(features) -> np.ndarray:
    frames = getattr(features, "frames", features)
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.shape[0] == 0:
        raise EmptyInput("feature sequence is empty")
    return frames


def forward_log_matrix(hmm: CompositeHmm, emissions: np.ndarray) -> np.ndarray:
    """Forward lattice alpha[t, j] = log p(x_0..x_t, state_t = j)."""
    T, S = emissions.shape
    alpha = np.full((T, S), LOG_ZERO)
    alpha[0, 0] = emissions[0, 0]
    for t in range(1, T):
        stay = alpha[t - 1] + hmm.log_self
        move = np.concatenate(([LOG_ZERO], alpha[t - 1, :-1] + hmm.log_advance[:-1]))
        alpha[t] = emissions[t] + np.logaddexp(stay, move)
    return alpha


def backward_log_matrix(hmm: CompositeHmm, emissions: np.ndarray) -> np.ndarray:
    """Backward lattice beta[t, j] = log p(x_{t+1}..x_{T-1}, exit | state_t = j)."""
    T, S = emissions.shape
    beta = np.full((T, S), LOG_ZERO)
    beta[T - 1, S - 1] = hmm.log_advance[S - 1]
    for t in range(T - 2, -1, -1):
        stay = hmm.log_self + emissions[t + 1] + beta[t + 1]
        move = np.concatenate(
            (hmm.log_advance[:-1] + emissions[t + 1, 1:] + beta[t + 1, 1:], [LOG_ZERO]))
        beta[t] = np.logaddexp(stay, move)
    return beta


def forward_log_prob(hmm: CompositeHmm, features) -> float:
    """Total log probability of the frames, marginalized over state paths."""
    frames = _frames_of(features)
    if frames.shape[1] != hmm.feature_dim:
        raise DimensionMismatch(
            f"features dim {frames.shape[1]} != model dim {hmm.feature_dim}")
    emissions = hmm.emission_log_likelihoods(frames)
    alpha = forward_log_matrix(hmm, emissions)
    return float(alpha[-1, -1] + hmm.log_advance[-1])


def viterbi(hmm: CompositeHmm, features) -> tuple[np.ndarray, float]:
    """Best state path and its log probability.

    Ties at each dynamic-programming cell go to the lower predecessor state
    index, which makes the result the lexicographically smallest optimal path.
    Raises NoValidPath when no complete path exists (fewer frames than states,
    or a required transition has zero probability).
    """
    frames = _frames_of(features)
    if frames.shape[1] != hmm.feature_dim:
        raise DimensionMismatch(
            f"features dim {frames.shape[1]} != model dim {hmm.feature_dim}")
    T, S = frames.shape[0], hmm.state_count
    if T < S:
        raise NoValidPath(f"{T} frames cannot traverse {S} states")

    emissions = hmm.emission_log_likelihoods(frames)
    delta = np.full((T, S), LOG_ZERO)
    delta[0, 0] = emissions[0, 0]
    ptr = np.zeros((T, S), dtype=np.int64)
    ptr[0] = np.arange(S)
    states = np.arange(S)
    for t in range(1, T):
        stay = delta[t - 1] + hmm.log_self
        move = np.concatenate(([LOG_ZERO], delta[t - 1, :-1] + hmm.log_advance[:-1]))
        use_move = move >= stay  # tie prefers the lower predecessor index
        delta[t] = emissions[t] + np.where(use_move, move, stay)
        ptr[t] = np.where(use_move, states - 1, states)

    total = delta[T - 1, S - 1] + hmm.log_advance[S - 1]
    if total == LOG_ZERO:
        raise NoValidPath("no complete path has nonzero probability")

    path = np.zeros(T, dtype=np.int64)
    path[T - 1] = S - 1
    for t in range(T - 1, 0, -1):
        path[t - 1] = ptr[t, path[t]]
    return path, float(total)


def segment_path(hmm: CompositeHmm, emissions: np.ndarray,
                 path: np.ndarray) -> tuple[list[tuple[int, int, int, float]], float]:
    """Split a decoded state path into per-phoneme segments.

    Returns (segments, bridge_log_score) where each segment is
    (phoneme_index, start_frame, end_frame_inclusive, log_score) and a
    segment's score sums its frames' emissions plus the transitions taken
    strictly inside the segment.  bridge_log_score collects what the segments
    exclude: the transitions between consecutive phonemes and the final exit,
    so that sum(segment scores) + bridge_log_score equals the path's total
    log probability.
    """
    segments = []
    bridge = float(hmm.log_advance[-1])  # exit after the final frame
    start = 0
    score = emissions[0, path[0]]
    for t in range(1, len(path)):
        prev, cur = path[t - 1], path[t]
        hop = hmm.log_self[prev] if cur == prev else hmm.log_advance[prev]
        if hmm.provenance[cur] != hmm.provenance[prev]:
            segments.append((int(hmm.provenance[prev]), start, t - 1, float(score)))
            bridge += hop
            start, score = t, emissions[t, cur]
        else:
            score += hop + emissions[t, cur]
    segments.append((int(hmm.provenance[path[-1]]), start, len(path) - 1, float(score)))
    return segments, float(bridge)


def sample(hmm: CompositeHmm, rng: np.random.Generator,
           max_frames: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    """Draw (frames, state_path) from the model's generative process.

    Emits from the current state, then leaves it with its advance probability;
    leaving the final state ends the sequence.
    """
    frames, path = [], []
    state = 0
    p_advance = np.exp(hmm.log_advance)
    for _ in range(max_frames):
        frames.append(hmm.mixtures[state].sample(rng))
        path.append(state)
        if rng.random() < p_advance[state]:
            if state == hmm.state_count - 1:
                break
            state += 1
    return np.array(frames), np.array(path, dtype=np.int64)
