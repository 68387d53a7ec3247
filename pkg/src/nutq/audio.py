"""WAV ingestion and MFCC feature extraction.

The recording contract is fixed: RIFF little-endian PCM, 16-bit signed,
16000 Hz, mono.  Everything downstream (acoustic models, alignment) consumes
the per-frame feature vectors produced here, so extraction is deterministic:
the same bytes always yield bit-identical features.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.fftpack import dct

from .errors import AudioTooShort, MalformedWav, UnsupportedFormat

REQUIRED_SAMPLE_RATE = 16_000
REQUIRED_BIT_DEPTH = 16
REQUIRED_CHANNELS = 1


@dataclass
class AudioBuffer:
    """Mono 16 kHz PCM audio as int16 samples."""

    samples: np.ndarray
    sample_rate_hz: int = REQUIRED_SAMPLE_RATE
    channel_count: int = 1

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.int16)
        if self.sample_rate_hz != REQUIRED_SAMPLE_RATE:
            raise UnsupportedFormat(f"sample rate {self.sample_rate_hz} != {REQUIRED_SAMPLE_RATE}")
        if self.channel_count != REQUIRED_CHANNELS:
            raise UnsupportedFormat(f"channel count {self.channel_count} != {REQUIRED_CHANNELS}")
        if self.samples.size < 1:
            raise MalformedWav("audio contains no samples")

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz


@dataclass(frozen=True)
class FrameParams:
    """Framing and MFCC parameters.

    Defaults are the conventional 16 kHz-speech settings: 25 ms frames,
    10 ms shift, pre-emphasis 0.97, 26 mel filters, 13 cepstra with
    deltas and delta-deltas appended (39-dimensional vectors).
    """

    frame_length_ms: float = 25.0
    frame_shift_ms: float = 10.0
    preemphasis_alpha: float = 0.97
    mel_filter_count: int = 26
    cepstral_count: int = 13
    log_floor: float = -50.0
    include_deltas: bool = True

    def __post_init__(self):
        if not 5.0 <= self.frame_length_ms <= 30.0:
            raise ValueError("frame_length_ms must lie in [5, 30] ms")
        if not 0.0 < self.frame_shift_ms <= self.frame_length_ms:
            raise ValueError("frame_shift_ms must lie in (0, frame_length_ms]")
        if not 0.0 <= self.preemphasis_alpha < 1.0:
            raise ValueError("preemphasis_alpha must lie in [0, 1)")
        if self.cepstral_count > self.mel_filter_count:
            raise ValueError("cepstral_count must not exceed mel_filter_count")

    @property
    def feature_dim(self) -> int:
        return self.cepstral_count * 3 if self.include_deltas else self.cepstral_count

    def frame_length_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_length_ms * sample_rate_hz / 1000.0))

    def frame_shift_samples(self, sample_rate_hz: int) -> int:
        return int(round(self.frame_shift_ms * sample_rate_hz / 1000.0))

    def to_dict(self) -> dict:
        return {
            "frame_length_ms": self.frame_length_ms,
            "frame_shift_ms": self.frame_shift_ms,
            "preemphasis_alpha": self.preemphasis_alpha,
            "mel_filter_count": self.mel_filter_count,
            "cepstral_count": self.cepstral_count,
            "log_floor": self.log_floor,
            "include_deltas": self.include_deltas,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FrameParams":
        return cls(**d)


@dataclass
class FeatureSequence:
    """Per-frame feature vectors, shape (frame_count, feature_dim)."""

    frames: np.ndarray
    frame_shift_ms: float

    def __post_init__(self):
        self.frames = np.asarray(self.frames, dtype=np.float64)
        if self.frames.ndim != 2:
            raise ValueError("frames must be a 2-D array (frames x feature_dim)")

    @property
    def frame_count(self) -> int:
        return self.frames.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.frames.shape[1]

    def dump(self) -> str:
        """One frame per line, space-separated decimals (CLI debug format)."""
        return "\n".join(" ".join(f"{v:.6f}" for v in row) for row in self.frames)


# -- WAV container -------------------------------------------------------------

def load_wav(data: bytes) -> AudioBuffer:
    """Parse a RIFF/WAVE byte string into an AudioBuffer.

    Raises MalformedWav for structural problems and UnsupportedFormat when
    the file is valid WAV but violates the 16 kHz / 16-bit / mono contract.
    """
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedWav("missing RIFF/WAVE header")
    riff_size = struct.unpack_from("<I", data, 4)[0]
    if riff_size + 8 > len(data):
        raise MalformedWav("RIFF size exceeds file length")

    fmt = None
    pcm_bytes = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        chunk_size = struct.unpack_from("<I", data, pos + 4)[0]
        body_start = pos + 8
        if body_start + chunk_size > len(data):
            raise MalformedWav(f"chunk {chunk_id!r} overruns file")
        if chunk_id == b"fmt ":
            if chunk_size < 16:
                raise MalformedWav("fmt chunk too small")
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
        elif chunk_id == b"data":
            pcm_bytes = data[body_start:body_start + chunk_size]
        pos = body_start + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None:
        raise MalformedWav("no fmt chunk")
    if pcm_bytes is None:
        raise MalformedWav("no data chunk")

    audio_format, channels, rate, _byte_rate, _block_align, bits = fmt
    if audio_format != 1:
        raise UnsupportedFormat(f"audio format {audio_format} is not integer PCM")
    if bits != REQUIRED_BIT_DEPTH:
        raise UnsupportedFormat(f"bit depth {bits} != {REQUIRED_BIT_DEPTH}")
    if channels != REQUIRED_CHANNELS:
        raise UnsupportedFormat(f"channel count {channels} != {REQUIRED_CHANNELS}")
    if rate != REQUIRED_SAMPLE_RATE:
        raise UnsupportedFormat(f"sample rate {rate} != {REQUIRED_SAMPLE_RATE}")
    if len(pcm_bytes) < 2:
        raise MalformedWav("empty data chunk")
    if len(pcm_bytes) % 2:
        pcm_bytes = pcm_bytes[:-1]  # truncated trailing byte

    samples = np.frombuffer(pcm_bytes, dtype="<i2").astype(np.int16)
    return AudioBuffer(samples=samples, sample_rate_hz=rate, channel_count=channels)


def encode_wav(samples: np.ndarray, sample_rate_hz: int = REQUIRED_SAMPLE_RATE) -> bytes:
    """Serialize int16 samples as a minimal mono PCM WAV byte string."""
    pcm = np.asarray(samples, dtype="<i2").tobytes()
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(pcm), b"WAVE",
        b"fmt ", 16, 1, 1, sample_rate_hz, sample_rate_hz * 2, 2, 16,
        b"data", len(pcm),
    )
    return header + pcm


# -- feature extraction ---------------------------------------------------------

def preemphasize(audio: AudioBuffer, alpha: float) -> np.ndarray:
    """First-order pre-emphasis: y[0]=x[0], y[n]=x[n]-alpha*x[n-1]."""
    x = audio.samples.astype(np.float64)
    if x.size == 0:
        raise AudioTooShort("no samples")
    return np.concatenate(([x[0]], x[1:] - alpha * x[:-1]))


def frame_signal(signal: np.ndarray, frame_length: int, frame_shift: int) -> np.ndarray:
    """Slice a 1-D signal into overlapping frames; trailing partial frame dropped.

    Frame count is floor((S - L) / H) + 1 for S >= L.
    """
    signal = np.asarray(signal, dtype=np.float64)
    if signal.size < frame_length:
        raise AudioTooShort(f"{signal.size} samples < one frame of {frame_length}")
    n_frames = (signal.size - frame_length) // frame_shift + 1
    idx = np.arange(frame_length)[None, :] + frame_shift * np.arange(n_frames)[:, None]
    return signal[idx]


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(mel_filter_count: int, fft_length: int,
                   sample_rate_hz: int = REQUIRED_SAMPLE_RATE) -> np.ndarray:
    """Triangular filters equally spaced in mel between 0 Hz and Nyquist.

    Weights are evaluated continuously at the FFT bin frequencies (no edge
    rounding to integer bins), unit peak height.  Shape:
    (mel_filter_count, fft_length // 2 + 1).
    """
    edges = np.linspace(hz_to_mel(0.0), hz_to_mel(sample_rate_hz / 2.0), mel_filter_count + 2)
    bin_mels = hz_to_mel(np.arange(fft_length // 2 + 1) * sample_rate_hz / fft_length)
    left, center, right = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bin_mels[None, :] - left) / (center - left)
    falling = (right - bin_mels[None, :]) / (right - center)
    return np.maximum(0.0, np.minimum(rising, falling))


def mel_filter_centers_hz(mel_filter_count: int,
                          sample_rate_hz: int = REQUIRED_SAMPLE_RATE) -> np.ndarray:
    """Center frequency (Hz) of each triangular mel filter."""
    edges = np.linspace(hz_to_mel(0.0), hz_to_mel(sample_rate_hz / 2.0), mel_filter_count + 2)
    return mel_to_hz(edges[1:-1])


def fft_length_for(frame_length: int) -> int:
    """Smallest power of two >= frame length; frames are zero-padded to it."""
    n = 1
    while n < frame_length:
        n *= 2
    return n


def log_mel_spectrogram(audio: AudioBuffer, params: FrameParams) -> np.ndarray:
    """Floored log mel filterbank energies, shape (frame_count, mel_filter_count).

    Pipeline: pre-emphasis, framing, Hamming window, magnitude-squared DFT,
    triangular mel filterbank, natural log floored at params.log_floor.
    """
    emphasized = preemphasize(audio, params.preemphasis_alpha)
    length = params.frame_length_samples(audio.sample_rate_hz)
    shift = params.frame_shift_samples(audio.sample_rate_hz)
    frames = frame_signal(emphasized, length, shift)
    frames = frames * np.hamming(length)

    nfft = fft_length_for(length)
    power = np.abs(np.fft.rfft(frames, nfft, axis=1)) ** 2
    fb = mel_filterbank(params.mel_filter_count, nfft, audio.sample_rate_hz)
    energies = power @ fb.T
    with np.errstate(divide="ignore"):
        return np.maximum(np.log(energies), params.log_floor)


def delta_coefficients(static: np.ndarray, window: int = 2) -> np.ndarray:
    """Regression deltas over +/-window frames with edge replication."""
    padded = np.concatenate(
        [np.repeat(static[:1], window, axis=0), static, np.repeat(static[-1:], window, axis=0)],
        axis=0,
    )
    num = sum(n * (padded[window + n:len(static) + window + n] -
                   padded[window - n:len(static) + window - n])
              for n in range(1, window + 1))
    return num / (2.0 * sum(n * n for n in range(1, window + 1)))


def compute_mfcc(audio: AudioBuffer, params: FrameParams | None = None) -> FeatureSequence:
    """MFCC vectors for a buffer: DCT of the floored log mel energies.

    Keeps the first params.cepstral_count coefficients (orthonormal DCT-II)
    and, when params.include_deltas, appends delta and delta-delta
    coefficients for a 3x feature width.  Deterministic: identical input
    bytes produce bit-identical features.
    """
    params = params or FrameParams()
    log_mel = log_mel_spectrogram(audio, params)
    cepstra = dct(log_mel, type=2, axis=1, norm="ortho")[:, :params.cepstral_count]
    if params.include_deltas:
        d1 = delta_coefficients(cepstra)
        d2 = delta_coefficients(d1)
        features = np.concatenate([cepstra, d1, d2], axis=1)
    else:
        features = cepstra
    return FeatureSequence(frames=features, frame_shift_ms=params.frame_shift_ms)
