"""Shared test helpers: an independent WAV encoder and synthetic audio.

The WAV writer assembles the RIFF chunk layout by hand with struct.pack,
so the package's reader is always exercised against bytes produced by a
second, independent encoder. The synthetic generators make two acoustic
classes that a band-energy front end can tell apart: "human" utterances
are harmonic-rich filtered-noise mixtures, "spoof" utterances are
band-limited tone triads over the same noise bed.
"""

import os
import struct

import numpy as np

SAMPLE_RATE = 16000


def write_pcm16_wav(path, samples, sample_rate=SAMPLE_RATE):
    """Encode float samples as 16-bit PCM mono RIFF WAVE, by hand.

    Returns the quantized int16 array so tests can check exact scaling.
    """
    q = np.clip(np.round(np.asarray(samples, dtype=np.float64) * 32767.0),
                -32768, 32767).astype("<i2")
    payload = q.tobytes()
    hdr = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    fmt = b"fmt " + struct.pack("<IHHIIHH", 16, 1, 1, sample_rate,
                                sample_rate * 2, 2, 16)
    data = b"data" + struct.pack("<I", len(payload)) + payload
    with open(path, "wb") as f:
        f.write(hdr + fmt + data)
    return q


def _noise_bed(rng, n):
    noise = rng.standard_normal(n)
    win = np.hanning(33)
    return np.convolve(noise, win / win.sum(), mode="same")


def _shape_and_normalize(sig, noise, rng, n, sample_rate):
    t = np.arange(n) / sample_rate
    x = 0.6 * sig / np.abs(sig).max() + 0.25 * noise / np.abs(noise).max()
    env = 0.5 + 0.5 * np.abs(np.sin(2 * np.pi * rng.uniform(2.0, 3.5) * t))
    x = x * env
    return 0.8 * x / np.abs(x).max()


def human_utterance(rng, n_samples=SAMPLE_RATE, sample_rate=SAMPLE_RATE):
    """Voiced-speech stand-in: 12 harmonics at 1/k amplitude plus
    lowpassed noise, with a slow amplitude envelope."""
    t = np.arange(n_samples) / sample_rate
    f0 = rng.uniform(100.0, 200.0)
    sig = np.zeros(n_samples)
    for k in range(1, 13):
        sig += (1.0 / k) * np.sin(
            2 * np.pi * f0 * k * t + rng.uniform(0, 2 * np.pi))
    return _shape_and_normalize(sig, _noise_bed(rng, n_samples), rng,
                                n_samples, sample_rate)


def tone_utterance(rng, n_samples=SAMPLE_RATE, sample_rate=SAMPLE_RATE):
    """Synthetic-artifact stand-in: three band-limited tones near fixed
    centers, over the same noise bed and envelope as human_utterance."""
    t = np.arange(n_samples) / sample_rate
    sig = np.zeros(n_samples)
    for fc in (2800.0, 4200.0, 5600.0):
        f = fc + rng.uniform(-200.0, 200.0)
        sig += rng.uniform(0.7, 1.0) * np.sin(
            2 * np.pi * f * t + rng.uniform(0, 2 * np.pi))
    return _shape_and_normalize(sig, _noise_bed(rng, n_samples), rng,
                                n_samples, sample_rate)


def make_corpus(root, n_per_class, n_samples=SAMPLE_RATE, seed=1234,
                attack="S1"):
    """Write a balanced two-class corpus under root.

    The first half of each class goes to the train partition, the rest to
    eval. Returns (manifest_all, manifest_eval) paths; wav paths inside
    the manifests are relative to the manifest directory.
    """
    os.makedirs(os.path.join(root, "wav"), exist_ok=True)
    rng = np.random.default_rng(seed)
    rows_train, rows_eval = [], []
    for i in range(n_per_class):
        for cls, gen in (("human", human_utterance),
                         ("spoof", tone_utterance)):
            x = gen(rng, n_samples)
            uid = f"{cls[0]}{i:04d}"
            rel = os.path.join("wav", uid + ".wav")
            write_pcm16_wav(os.path.join(root, rel), x)
            part = "train" if i < n_per_class // 2 else "eval"
            row = "\t".join(
                [uid, rel, cls, "-" if cls == "human" else attack, part])
            (rows_train if part == "train" else rows_eval).append(row)
    man_all = os.path.join(root, "manifest.tsv")
    man_eval = os.path.join(root, "manifest_eval.tsv")
    with open(man_all, "w") as f:
        f.write("\n".join(rows_train + rows_eval) + "\n")
    with open(man_eval, "w") as f:
        f.write("\n".join(rows_eval) + "\n")
    return man_all, man_eval
