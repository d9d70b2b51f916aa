"""Acoustic feature extraction.

Four per-frame feature families, each 12 static coefficients extended with
delta and delta-delta to 36 dimensions:

* mfcc: log mel filterbank energies -> DCT, coefficients 1..12.
* mfpc: log mel filterbank energies -> PCA.
* cosphasepc: cosine of the unwrapped phase spectrum -> PCA.
* mwpc: wavelet packet leaves -> Teager-Kaiser energy -> mel band
  pooling -> log -> PCA.

The PCA-based families need training-side statistics, bundled in
:class:`FrontEndModels` and fit with :func:`fit_frontend`.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .signal import Waveform, frame_and_window, spectrum
from .transforms import (MelFilterbank, PcaModel, WaveletPacketTree,
                         apply_dct, build_mel_filterbank, mel_band_weights,
                         pca_apply, pca_fit, tke, wpt_decompose_batch)

__all__ = [
    "FeatureMatrix",
    "FrontEndModels",
    "FEATURE_NAMES",
    "LOG_FLOOR",
    "add_deltas",
    "logmel_energies",
    "cosphase_vectors",
    "mwpc_band_logenergies",
    "extract_mfcc",
    "extract_mfpc",
    "extract_cosphasepc",
    "extract_mwpc",
    "extract_features",
    "fit_frontend",
]

FEATURE_NAMES = ("mfcc", "mfpc", "cosphasepc", "mwpc")
LOG_FLOOR = 1e-10
REQUIRED_SAMPLE_RATE = 16000
N_STATIC = 12


@dataclass(frozen=True)
class FeatureMatrix:
    """Per-frame feature vectors for one utterance, shape (n_frames, 36)."""

    feature_type: str
    data: np.ndarray
    utt_id: str = ""


@dataclass
class FrontEndModels:
    """Fitted front-end state shared by training and scoring.

    PCA fields are populated by :func:`fit_frontend` for the families that
    need them; the filterbank and wavelet tree are deterministic.
    """

    mel_fb: MelFilterbank = field(default_factory=build_mel_filterbank)
    wpt: WaveletPacketTree = field(default_factory=WaveletPacketTree)
    pca_mfpc: Optional[PcaModel] = None
    pca_cosphase: Optional[PcaModel] = None
    pca_mwpc: Optional[PcaModel] = None

    def pca_for(self, feature_type: str) -> Optional[PcaModel]:
        return {
            "mfpc": self.pca_mfpc,
            "cosphasepc": self.pca_cosphase,
            "mwpc": self.pca_mwpc,
        }.get(feature_type)


def _check_rate(wav: Waveform):
    if wav.sample_rate != REQUIRED_SAMPLE_RATE:
        raise ValueError(
            f"sample rate {wav.sample_rate} not supported; expected "
            f"{REQUIRED_SAMPLE_RATE}")


def _safe_log(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, LOG_FLOOR))


def add_deltas(static: np.ndarray) -> np.ndarray:
    """Append delta and delta-delta columns computed with a +-2 frame
    regression window, edge frames replicated.

    delta[t] = (1*(c[t+1]-c[t-1]) + 2*(c[t+2]-c[t-2])) / 10
    """
    static = np.asarray(static, dtype=np.float64)
    if static.ndim != 2 or static.shape[0] < 1:
        raise ValueError("static features must be 2-D with at least one row")

    def one(c):
        pad = np.pad(c, ((2, 2), (0, 0)), mode="edge")
        return (1.0 * (pad[3:-1] - pad[1:-3]) + 2.0 * (pad[4:] - pad[:-4])) / 10.0

    d = one(static)
    dd = one(d)
    return np.concatenate([static, d, dd], axis=1)


def logmel_energies(power: np.ndarray, fb: MelFilterbank) -> np.ndarray:
    """Floored log of the mel filterbank outputs, (n_frames, n_filters)."""
    return _safe_log(power @ fb.weights.T)


def cosphase_vectors(phase: np.ndarray) -> np.ndarray:
    """Elementwise cosine of the unwrapped phase, (n_frames, n_bins)."""
    return np.cos(phase)


def mwpc_band_logenergies(frames: np.ndarray,
                          wpt: WaveletPacketTree) -> np.ndarray:
    """Mel-pooled log Teager-Kaiser energies of wavelet packet leaves.

    Each windowed frame is split into 2**depth frequency-ordered leaves;
    each leaf is summarized by the mean Teager-Kaiser energy of its
    interior samples; leaf energies are pooled with mel triangles
    evaluated at the leaf center frequencies (b + 0.5) * band_hz, then
    floored-log compressed. Returns (n_frames, 24).
    """
    leaves = wpt_decompose_batch(frames, wpt)   # (F, n_leaves, leaf_len)
    energies = tke(leaves).mean(axis=2)          # (F, n_leaves)
    n_leaves = leaves.shape[1]
    band_hz = REQUIRED_SAMPLE_RATE / 2.0 / n_leaves
    centers = (np.arange(n_leaves) + 0.5) * band_hz
    pool = mel_band_weights(24, centers, REQUIRED_SAMPLE_RATE / 2.0)
    return _safe_log(energies @ pool.T)


def _static_coeffs(wav: Waveform, models: FrontEndModels,
                   feature_type: str) -> np.ndarray:
    fs = frame_and_window(wav)
    if feature_type == "mwpc":
        raw = mwpc_band_logenergies(fs.frames, models.wpt)
    else:
        sp = spectrum(fs)
        if feature_type == "mfcc":
            logmel = logmel_energies(sp.power, models.mel_fb)
            return apply_dct(logmel)[:, 1:N_STATIC + 1]
        if feature_type == "mfpc":
            raw = logmel_energies(sp.power, models.mel_fb)
        elif feature_type == "cosphasepc":
            raw = cosphase_vectors(sp.phase)
        else:
            raise ValueError(f"unknown feature {feature_type!r}")
    pca = models.pca_for(feature_type)
    if pca is None:
        raise ValueError(
            f"feature {feature_type!r} needs a fitted PCA; run fit_frontend "
            f"on training audio first")
    return pca_apply(pca, raw)


def extract_features(wav: Waveform, models: FrontEndModels,
                     feature_type: str, utt_id: str = "") -> FeatureMatrix:
    """Extract one feature family by name, 36 columns per frame."""
    _check_rate(wav)
    if feature_type not in FEATURE_NAMES:
        raise ValueError(f"unknown feature {feature_type!r}")
    static = _static_coeffs(wav, models, feature_type)
    return FeatureMatrix(feature_type=feature_type, data=add_deltas(static),
                         utt_id=utt_id)


def extract_mfcc(w: Waveform, models: FrontEndModels) -> FeatureMatrix:
    """Mel cepstral features: power spectrum -> mel energies -> floored
    log -> orthonormal DCT-II, coefficients 1..12 -> deltas."""
    return extract_features(w, models, "mfcc")


def extract_mfpc(w: Waveform, models: FrontEndModels) -> FeatureMatrix:
    """Mel principal components: as mfcc up to the log-mel stage, then a
    trained 24 -> 12 PCA instead of the DCT."""
    return extract_features(w, models, "mfpc")


def extract_cosphasepc(w: Waveform, models: FrontEndModels) -> FeatureMatrix:
    """Phase features: unwrapped phase -> elementwise cosine (range
    [-1, 1]) -> trained 129 -> 12 PCA -> deltas."""
    return extract_features(w, models, "cosphasepc")


def extract_mwpc(w: Waveform, models: FrontEndModels) -> FeatureMatrix:
    """Wavelet features: per-frame wavelet packet leaves -> mean interior
    Teager-Kaiser energy per leaf -> mel pooling -> floored log -> trained
    24 -> 12 PCA -> deltas."""
    return extract_features(w, models, "mwpc")


def _raw_for_fit(wav: Waveform, models: FrontEndModels,
                 feature_type: str) -> np.ndarray:
    fs = frame_and_window(wav)
    if feature_type == "mwpc":
        return mwpc_band_logenergies(fs.frames, models.wpt)
    sp = spectrum(fs)
    if feature_type == "mfpc":
        return logmel_energies(sp.power, models.mel_fb)
    if feature_type == "cosphasepc":
        return cosphase_vectors(sp.phase)
    raise ValueError(f"feature {feature_type!r} does not use PCA")


def fit_frontend(waves, feature_types, seed: int = 0,
                 max_frames: int = 500_000) -> FrontEndModels:
    """Fit the PCA stages on training audio.

    Args:
        waves: iterable of Waveform objects (training partition only).
        feature_types: which families to prepare; non-PCA families are
            accepted and skipped.
        seed: RNG seed for the frame subsample.
        max_frames: cap on pooled frames per family; larger pools are
            subsampled uniformly without replacement.
    """
    unknown = [f for f in feature_types if f not in FEATURE_NAMES]
    if unknown:
        raise ValueError(f"unknown feature {unknown[0]!r}")
    models = FrontEndModels()
    pca_feats = [f for f in feature_types
                 if f in ("mfpc", "cosphasepc", "mwpc")]
    if not pca_feats:
        return models
    waves = list(waves)
    if not waves:
        raise ValueError("no training audio given")
    for wav in waves:
        _check_rate(wav)
    for feat in pca_feats:
        pooled = np.concatenate(
            [_raw_for_fit(w, models, feat) for w in waves], axis=0)
        if pooled.shape[0] > max_frames:
            rng = np.random.default_rng(seed)
            keep = rng.choice(pooled.shape[0], size=max_frames, replace=False)
            keep.sort()
            pooled = pooled[keep]
        pca = pca_fit(pooled, N_STATIC)
        if feat == "mfpc":
            models.pca_mfpc = pca
        elif feat == "cosphasepc":
            models.pca_cosphase = pca
        else:
            models.pca_mwpc = pca
    return models
