"""Waveform input and short-time spectral analysis.

Audio enters as 16-bit PCM mono RIFF WAVE, is scaled to [-1, 1), framed
with a Hamming window, and transformed to per-frame power and unwrapped
phase spectra.
"""

import os
import wave
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Waveform",
    "FrameSet",
    "SpectrumFrames",
    "load_waveform",
    "predetect_zero_run",
    "hamming_window",
    "frame_and_window",
    "spectrum",
]


@dataclass(frozen=True)
class Waveform:
    """Mono audio signal, float64 samples in [-1, 1)."""

    samples: np.ndarray
    sample_rate: int

    @property
    def duration(self) -> float:
        return self.samples.shape[0] / self.sample_rate


@dataclass(frozen=True)
class FrameSet:
    """Windowed analysis frames, shape (n_frames, frame_len)."""

    frames: np.ndarray
    frame_len: int
    hop: int


@dataclass(frozen=True)
class SpectrumFrames:
    """Per-frame power spectrum and unwrapped phase, each of shape
    (n_frames, frame_len // 2 + 1)."""

    power: np.ndarray
    phase: np.ndarray


def load_waveform(path) -> Waveform:
    """Read a RIFF WAVE file holding 16-bit PCM mono audio.

    Samples are scaled by 1/32768. Raises FileNotFoundError for a missing
    path, ValueError("malformed WAV: ...") when the container cannot be
    parsed, and ValueError("unsupported WAV format: ...") for encodings
    other than 16-bit PCM mono.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such audio file: {path}")
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            comptype = wf.getcomptype()
            sample_rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except wave.Error as exc:
        raise ValueError(f"malformed WAV: {path}: {exc}") from exc
    except EOFError as exc:
        raise ValueError(f"malformed WAV: {path}: truncated header") from exc
    if comptype != "NONE":
        raise ValueError(
            f"unsupported WAV format: {path}: compression {comptype!r}")
    if sampwidth != 2:
        raise ValueError(
            f"unsupported WAV format: {path}: {8 * sampwidth}-bit samples, "
            f"need 16-bit PCM")
    if n_channels != 1:
        raise ValueError(
            f"unsupported WAV format: {path}: {n_channels} channels, need mono")
    pcm = np.frombuffer(raw, dtype="<i2")
    samples = pcm.astype(np.float64) / 32768.0
    return Waveform(samples=samples, sample_rate=sample_rate)


def predetect_zero_run(wav: Waveform, min_run: int = 1600) -> bool:
    """True when the signal contains min_run or more consecutive samples
    that are exactly zero.

    Cutting-and-pasting silence into a recording leaves digitally exact
    zero runs that natural microphone noise never produces, so a hit is
    treated as evidence of tampering before any model runs.
    """
    if min_run < 1:
        raise ValueError("min_run must be >= 1")
    z = wav.samples == 0.0
    if not z.any():
        return False
    edges = np.diff(np.concatenate(([False], z, [False])).astype(np.int8))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return bool((ends - starts >= min_run).any())


def hamming_window(n: int) -> np.ndarray:
    """Hamming window 0.54 - 0.46 cos(2 pi k / (n - 1)), k = 0..n-1."""
    if n < 2:
        raise ValueError("window length must be >= 2")
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def frame_and_window(wav: Waveform, frame_len: int = 256,
                     hop: int = 128) -> FrameSet:
    """Slice the signal into Hamming-windowed frames.

    Frame t covers samples [t*hop, t*hop + frame_len); trailing samples
    that do not fill a frame are dropped, giving
    floor((len - frame_len) / hop) + 1 frames.
    """
    x = wav.samples
    if x.shape[0] < frame_len:
        raise ValueError(
            f"waveform too short: {x.shape[0]} samples, need >= {frame_len}")
    view = np.lib.stride_tricks.sliding_window_view(x, frame_len)[::hop]
    frames = view * hamming_window(frame_len)
    return FrameSet(frames=np.ascontiguousarray(frames),
                    frame_len=frame_len, hop=hop)


def spectrum(frames: FrameSet) -> SpectrumFrames:
    """Squared-magnitude spectrum and unwrapped phase of each frame.

    A frame_len-point real DFT yields frame_len // 2 + 1 bins. Phase is
    np.angle (zero for zero bins) unwrapped along the frequency axis:
    every successive difference is brought into (-pi, pi] by adding a
    multiple of 2 pi, and corrections accumulate over the bins.
    """
    spec = np.fft.rfft(frames.frames, axis=1)
    power = np.abs(spec) ** 2
    ang = np.angle(spec)
    d = np.diff(ang, axis=1)
    wrapped = np.pi - np.mod(np.pi - d, 2.0 * np.pi)
    phase = np.concatenate(
        [ang[:, :1], ang[:, :1] + np.cumsum(wrapped, axis=1)], axis=1)
    return SpectrumFrames(power=power, phase=phase)
