"""Interpretable acoustic features from raw waveforms.

Covers the small feature set used for tag generation: pitch statistics,
frame intensity, jitter, shimmer, and utterance duration. Pitch is tracked
per frame with a normalized autocorrelation (cross-correlation of the frame
against its own shifted copy, so the estimate is unbiased by the shrinking
overlap) plus parabolic peak interpolation. Jitter and shimmer use the
"local" convention: mean absolute consecutive difference divided by the
mean, pooled over maximal voiced runs.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import (
    CorruptHeader,
    EmptyAudio,
    EmptyInput,
    NonFiniteValue,
    SignalTooShort,
    TooShort,
    UnsupportedFormat,
)

TARGET_RATE = 16000
FRAME_MS = 25.0
HOP_MS = 10.0
FMIN_HZ = 50.0
FMAX_HZ = 600.0
VOICING_THRESHOLD = 0.3
# a candidate lag only competes with the global peak if it comes this close;
# picking the smallest such lag suppresses octave-down errors on clean tones
PEAK_RELATIVE_THRESHOLD = 0.85
INTENSITY_FLOOR = 1e-10
MIN_PROFILE_SECONDS = 0.050

FLAG_ALL_UNVOICED = "all_unvoiced"
FLAG_JITTER_DEGRADED = "jitter_degraded"
FLAG_SHIMMER_DEGRADED = "shimmer_degraded"


@dataclass
class Waveform:
    """Mono audio samples in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise EmptyAudio("waveform must hold at least one mono sample")
        if not np.all(np.isfinite(s)):
            raise NonFiniteValue("waveform contains NaN or Inf")
        if float(np.max(np.abs(s))) > 1.0 + 1e-9:
            raise ValueError("samples must lie in [-1, 1]")
        if not self.sample_rate > 0:
            raise ValueError(f"sample rate must be positive, got {self.sample_rate}")
        self.samples = np.clip(s, -1.0, 1.0)

    @property
    def duration_seconds(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class F0Track:
    """Per-frame fundamental frequency estimates.

    ``frames_hz[i] == 0`` exactly when ``voiced[i]`` is False; voiced values
    stay inside the configured search band.
    """

    frames_hz: np.ndarray
    voiced: np.ndarray
    hop_seconds: float

    def __post_init__(self) -> None:
        hz = np.asarray(self.frames_hz, dtype=np.float64)
        v = np.asarray(self.voiced, dtype=bool)
        if hz.shape != v.shape or hz.ndim != 1:
            raise ValueError("frames_hz and voiced must be equal-length 1-D arrays")
        if np.any((hz == 0.0) != ~v):
            raise ValueError("frames_hz must be 0 exactly on unvoiced frames")
        if np.any(hz[v] <= 0.0):
            raise ValueError("voiced F0 values must be positive")
        if not self.hop_seconds > 0.0:
            raise ValueError("hop_seconds must be positive")
        self.frames_hz = hz
        self.voiced = v

    def voiced_runs(self) -> list[tuple[int, int]]:
        """Maximal runs of consecutive voiced frames as (start, end) index pairs, end exclusive."""
        runs: list[tuple[int, int]] = []
        start = None
        for i, flag in enumerate(self.voiced):
            if flag and start is None:
                start = i
            elif not flag and start is not None:
                runs.append((start, i))
                start = None
        if start is not None:
            runs.append((start, len(self.voiced)))
        return runs


@dataclass
class AcousticProfile:
    """Per-utterance paralinguistic summary."""

    pitch_mean_hz: float
    pitch_std_hz: float
    intensity_mean_db: float
    intensity_std_db: float
    jitter: float
    shimmer: float
    duration_s: float
    voiced_fraction: float
    flags: list[str] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "pitch_mean_hz": self.pitch_mean_hz,
            "pitch_std_hz": self.pitch_std_hz,
            "intensity_mean_db": self.intensity_mean_db,
            "intensity_std_db": self.intensity_std_db,
            "jitter": self.jitter,
            "shimmer": self.shimmer,
            "duration_s": self.duration_s,
            "voiced_fraction": self.voiced_fraction,
            "flags": list(self.flags),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "AcousticProfile":
        return cls(
            pitch_mean_hz=float(d["pitch_mean_hz"]),
            pitch_std_hz=float(d["pitch_std_hz"]),
            intensity_mean_db=float(d["intensity_mean_db"]),
            intensity_std_db=float(d["intensity_std_db"]),
            jitter=float(d["jitter"]),
            shimmer=float(d["shimmer"]),
            duration_s=float(d["duration_s"]),
            voiced_fraction=float(d["voiced_fraction"]),
            flags=list(d.get("flags", [])),
        )


# --- WAV decoding -----------------------------------------------------------

_WAVE_PCM = 1
_WAVE_FLOAT = 3


def _parse_riff_chunks(data: bytes) -> dict[bytes, bytes]:
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise CorruptHeader("not a RIFF/WAVE file")
    chunks: dict[bytes, bytes] = {}
    pos = 12
    while pos + 8 <= len(data):
        cid = data[pos : pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8 : pos + 8 + size]
        if len(body) < size:
            raise CorruptHeader(f"chunk {cid!r} truncated")
        if cid not in chunks:  # first occurrence wins
            chunks[cid] = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    return chunks


def load_wav(path, target_rate: int = TARGET_RATE) -> Waveform:
    """Decode a PCM-16 or IEEE-float32 WAV file to mono at ``target_rate``.

    Channels are averaged, samples normalized to [-1, 1], and rate conversion
    uses polyphase windowed-sinc interpolation.
    """
    data = Path(path).read_bytes()
    chunks = _parse_riff_chunks(data)
    if b"fmt " not in chunks or b"data" not in chunks:
        raise CorruptHeader("missing fmt or data chunk")
    fmt = chunks[b"fmt "]
    if len(fmt) < 16:
        raise CorruptHeader("fmt chunk too small")
    audio_format, n_channels, sample_rate, _, _, bits = struct.unpack_from(
        "<HHIIHH", fmt, 0
    )
    if n_channels < 1 or sample_rate <= 0:
        raise CorruptHeader(
            f"bad channel count ({n_channels}) or sample rate ({sample_rate})"
        )
    raw = chunks[b"data"]
    if audio_format == _WAVE_PCM and bits == 16:
        width = 2
        usable = len(raw) - len(raw) % (width * n_channels)
        samples = np.frombuffer(raw[:usable], dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _WAVE_FLOAT and bits == 32:
        width = 4
        usable = len(raw) - len(raw) % (width * n_channels)
        samples = np.frombuffer(raw[:usable], dtype="<f4").astype(np.float64)
    else:
        raise UnsupportedFormat(
            f"only PCM-16 and float32 are supported, got format={audio_format} bits={bits}"
        )
    if samples.size == 0:
        raise EmptyAudio(f"{path} decodes to zero samples")
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    if sample_rate != target_rate:
        g = math.gcd(sample_rate, target_rate)
        samples = resample_poly(samples, target_rate // g, sample_rate // g)
        if samples.size == 0:
            raise EmptyAudio(f"{path} is too short to resample")
    samples = np.clip(samples, -1.0, 1.0)
    return Waveform(samples=samples, sample_rate=target_rate)


# --- framing and frame-level features ---------------------------------------

def frame_signal(w: Waveform, frame_ms: float = FRAME_MS, hop_ms: float = HOP_MS) -> np.ndarray:
    """Split into overlapping frames, zero-padding the final partial frame.

    Returns an (n_frames, frame_len) array; frame count is
    ceil((n - frame + hop) / hop).
    """
    frame = int(round(frame_ms * w.sample_rate / 1000.0))
    hop = int(round(hop_ms * w.sample_rate / 1000.0))
    n = w.samples.size
    if n < frame:
        raise SignalTooShort(f"signal has {n} samples, frame needs {frame}")
    count = -(-(n - frame + hop) // hop)
    padded = np.zeros((count - 1) * hop + frame)
    padded[:n] = w.samples
    idx = np.arange(count)[:, None] * hop + np.arange(frame)[None, :]
    return padded[idx]


def rms_intensity(frames) -> np.ndarray:
    """Per-frame intensity in dB: 20*log10(max(rms, floor))."""
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.size == 0:
        raise EmptyInput("frames must be a non-empty 2-D array")
    rms = np.sqrt(np.mean(frames * frames, axis=1))
    return 20.0 * np.log10(np.maximum(rms, INTENSITY_FLOOR))


def _normalized_autocorr(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Normalized cross-correlation of each frame with itself for lags 0..max_lag."""
    n = frames.shape[1]
    nfft = 1
    while nfft < 2 * n:
        nfft *= 2
    spec = np.fft.rfft(frames, nfft, axis=1)
    raw = np.fft.irfft(spec * np.conj(spec), nfft, axis=1)[:, : max_lag + 1]
    sq = frames * frames
    cum = np.cumsum(sq, axis=1)
    total = cum[:, -1:]
    lags = np.arange(max_lag + 1)
    # energy of the leading segment x[0 : n-lag] and the trailing segment x[lag : n]
    e_head = cum[:, n - 1 - lags]
    e_tail = np.where(lags == 0, total, total - cum[:, np.maximum(lags - 1, 0)])
    denom = np.sqrt(np.maximum(e_head * e_tail, 0.0))
    return np.where(denom > 0.0, raw / np.maximum(denom, 1e-300), 0.0)


def estimate_f0(
    frames,
    sample_rate: int = TARGET_RATE,
    fmin: float = FMIN_HZ,
    fmax: float = FMAX_HZ,
    voicing_threshold: float = VOICING_THRESHOLD,
    hop_seconds: float = HOP_MS / 1000.0,
) -> F0Track:
    """Per-frame F0 from the normalized autocorrelation peak in [fmin, fmax].

    Among local maxima within ``PEAK_RELATIVE_THRESHOLD`` of the strongest
    one, the smallest lag is chosen (harmonically related peaks tie on clean
    periodic signals, and the smallest lag is the true period). The chosen
    peak is refined by parabolic interpolation; a frame is voiced iff the
    peak value reaches ``voicing_threshold``. Silence yields all-unvoiced.
    """
    frames = np.asarray(frames, dtype=np.float64)
    if frames.ndim != 2 or frames.size == 0:
        raise EmptyInput("frames must be a non-empty 2-D array")
    n = frames.shape[1]
    lag_min = int(math.ceil(sample_rate / fmax))
    lag_max = int(math.floor(sample_rate / fmin))
    lag_max = min(lag_max, n - 1)
    if lag_min >= lag_max:
        raise ValueError("frame too short for the requested pitch range")
    ncc = _normalized_autocorr(frames, lag_max)

    hz = np.zeros(frames.shape[0])
    voiced = np.zeros(frames.shape[0], dtype=bool)
    for fi in range(frames.shape[0]):
        r = ncc[fi]
        window = r[lag_min : lag_max + 1]
        peak_val = float(np.max(window))
        if peak_val < voicing_threshold:
            continue
        floor = max(voicing_threshold, PEAK_RELATIVE_THRESHOLD * peak_val)
        lag = None
        for k in range(lag_min, lag_max + 1):
            if r[k] < floor:
                continue
            left = r[k - 1] if k > 0 else -np.inf
            right = r[k + 1] if k < lag_max else -np.inf
            if r[k] >= left and r[k] >= right:
                lag = k
                break
        if lag is None:
            lag = lag_min + int(np.argmax(window))
        refined = float(lag)
        if 0 < lag < lag_max:
            denom = r[lag - 1] - 2.0 * r[lag] + r[lag + 1]
            if denom < 0.0:
                delta = 0.5 * (r[lag - 1] - r[lag + 1]) / denom
                refined = lag + float(np.clip(delta, -0.5, 0.5))
        refined = float(np.clip(refined, sample_rate / fmax, sample_rate / fmin))
        hz[fi] = sample_rate / refined
        voiced[fi] = True
    return F0Track(frames_hz=hz, voiced=voiced, hop_seconds=hop_seconds)


# --- voice-quality ratios ----------------------------------------------------

def jitter_local(track: F0Track) -> tuple[float, bool]:
    """Cycle-to-cycle period variation, pooled over voiced runs.

    Returns (ratio, degraded). The ratio is mean |T[i+1] - T[i]| over all
    consecutive voiced pairs, divided by the mean period; runs shorter than
    two frames contribute nothing. With no usable pair the ratio is 0 and
    the degraded flag is set.
    """
    diffs: list[np.ndarray] = []
    periods: list[np.ndarray] = []
    for start, end in track.voiced_runs():
        if end - start < 2:
            continue
        t = 1.0 / track.frames_hz[start:end]
        diffs.append(np.abs(np.diff(t)))
        periods.append(t)
    if not diffs:
        return 0.0, True
    mean_diff = float(np.mean(np.concatenate(diffs)))
    mean_period = float(np.mean(np.concatenate(periods)))
    return mean_diff / mean_period, False


def shimmer_local(
    w: Waveform, track: F0Track, frame_seconds: float = FRAME_MS / 1000.0
) -> tuple[float, bool]:
    """Cycle-to-cycle peak-amplitude variation, pooled over voiced runs.

    Period boundaries are walked through each voiced run using the per-frame
    F0 estimates; each period contributes its peak absolute amplitude.
    Returns (ratio, degraded) with the same conventions as jitter_local.
    """
    x = np.abs(w.samples)
    hop = int(round(track.hop_seconds * w.sample_rate))
    frame_len = int(round(frame_seconds * w.sample_rate))
    diffs: list[np.ndarray] = []
    amps_all: list[np.ndarray] = []
    for start, end in track.voiced_runs():
        run_start = start * hop
        run_end = min(x.size, (end - 1) * hop + frame_len)
        amps: list[float] = []
        t = float(run_start)
        while True:
            fi = min(end - 1, max(start, int(t // hop)))
            period = w.sample_rate / track.frames_hz[fi]
            lo = int(round(t))
            hi = int(round(t + period))
            if hi > run_end or hi <= lo:
                break
            amps.append(float(np.max(x[lo:hi])))
            t += period
        if len(amps) >= 2:
            a = np.asarray(amps)
            diffs.append(np.abs(np.diff(a)))
            amps_all.append(a)
    if not diffs:
        return 0.0, True
    mean_diff = float(np.mean(np.concatenate(diffs)))
    mean_amp = float(np.mean(np.concatenate(amps_all)))
    if mean_amp <= 0.0:
        return 0.0, True
    return mean_diff / mean_amp, False


# --- profile -----------------------------------------------------------------

def acoustic_profile(w: Waveform) -> AcousticProfile:
    """Full per-utterance summary; composes framing, F0, intensity, and ratios.

    Duration is computed from the raw sample count before any padding. Pitch
    statistics cover voiced frames only and are zero (flagged) when nothing
    is voiced.
    """
    duration = w.duration_seconds
    if duration < MIN_PROFILE_SECONDS:
        raise TooShort(
            f"utterance lasts {duration:.3f}s, need at least {MIN_PROFILE_SECONDS}s"
        )
    frames = frame_signal(w)
    track = estimate_f0(frames, sample_rate=w.sample_rate)
    intensity = rms_intensity(frames)

    flags: list[str] = []
    voiced_hz = track.frames_hz[track.voiced]
    if voiced_hz.size == 0:
        pitch_mean = 0.0
        pitch_std = 0.0
        flags.append(FLAG_ALL_UNVOICED)
    else:
        pitch_mean = float(np.mean(voiced_hz))
        pitch_std = float(np.std(voiced_hz))

    jitter, jitter_degraded = jitter_local(track)
    shimmer, shimmer_degraded = shimmer_local(w, track)
    if jitter_degraded:
        flags.append(FLAG_JITTER_DEGRADED)
    if shimmer_degraded:
        flags.append(FLAG_SHIMMER_DEGRADED)

    return AcousticProfile(
        pitch_mean_hz=pitch_mean,
        pitch_std_hz=pitch_std,
        intensity_mean_db=float(np.mean(intensity)),
        intensity_std_db=float(np.std(intensity)),
        jitter=jitter,
        shimmer=shimmer,
        duration_s=duration,
        voiced_fraction=float(np.mean(track.voiced)),
        flags=flags,
    )
