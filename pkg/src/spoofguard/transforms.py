"""Reusable math transforms: mel scale and filterbank, orthonormal DCT-II,
PCA, Daubechies-4 wavelet packet transform, and the Teager-Kaiser energy
operator.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from ._kernels import wpt_analysis_batch

__all__ = [
    "MelFilterbank",
    "PcaModel",
    "WaveletPacketTree",
    "hz_to_mel",
    "mel_to_hz",
    "mel_band_weights",
    "build_mel_filterbank",
    "apply_dct",
    "pca_fit",
    "pca_apply",
    "wpt_decompose",
    "wpt_decompose_batch",
    "wpt_reconstruct",
    "tke",
]

# Daubechies-4 scaling coefficients from the standard spectral-factorization
# construction (minimum-phase root selection), rounded to float64. Sum equals
# sqrt(2) and the squared sum equals 1 to machine precision.
DB4_LOW_PASS = np.array([
    0.2303778133088965,
    0.7148465705529157,
    0.6308807679298589,
    -0.027983769416859854,
    -0.18703481171909309,
    0.030841381835560764,
    0.0328830116668852,
    -0.010597401785069032,
])


def hz_to_mel(f):
    """Map frequency in Hz to mel, 2595 * log10(1 + f/700)."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise ValueError("frequency must be nonnegative")
    return 2595.0 * np.log10(1.0 + f / 700.0)


def mel_to_hz(m):
    """Inverse of :func:`hz_to_mel`."""
    m = np.asarray(m, dtype=np.float64)
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filterbank sampled on the FFT bin grid.

    weights has shape (n_filters, n_bins); filter i is a triangle with feet
    at mel boundaries i and i+2 and peak 1.0 at boundary i+1.
    """

    n_filters: int
    weights: np.ndarray
    center_freqs: np.ndarray


def mel_band_weights(n_filters: int, freqs_hz: np.ndarray, f_max: float) -> np.ndarray:
    """Evaluate the n_filters mel triangles at arbitrary frequencies.

    Boundaries are n_filters + 2 points equally spaced on the mel axis
    between mel(0) and mel(f_max). Triangles are linear in Hz between
    their feet and peak and are not area-normalized.

    Returns an (n_filters, len(freqs_hz)) weight matrix.
    """
    if n_filters < 1:
        raise ValueError("n_filters must be >= 1")
    freqs_hz = np.asarray(freqs_hz, dtype=np.float64)
    bounds = mel_to_hz(np.linspace(0.0, float(hz_to_mel(f_max)), n_filters + 2))
    w = np.zeros((n_filters, freqs_hz.shape[0]))
    for i in range(n_filters):
        lo, peak, hi = bounds[i], bounds[i + 1], bounds[i + 2]
        rising = (freqs_hz - lo) / (peak - lo)
        falling = (hi - freqs_hz) / (hi - peak)
        w[i] = np.clip(np.minimum(rising, falling), 0.0, None)
    return w


def build_mel_filterbank(n_filters: int = 24, n_bins: int = 129,
                         f_max: float = 8000.0) -> MelFilterbank:
    """Build the triangular filterbank on the bin grid k * f_max / (n_bins-1).

    Raises ValueError if any filter has no strictly positive sampled weight
    (n_filters too large for the bin resolution).
    """
    bin_freqs = np.arange(n_bins) * (f_max / (n_bins - 1))
    weights = mel_band_weights(n_filters, bin_freqs, f_max)
    support = (weights > 0.0).any(axis=1)
    if not support.all():
        bad = int(np.flatnonzero(~support)[0])
        raise ValueError(
            f"filter {bad} has no positive weight at this bin resolution; "
            f"reduce n_filters")
    bounds = mel_to_hz(np.linspace(0.0, float(hz_to_mel(f_max)), n_filters + 2))
    return MelFilterbank(n_filters=n_filters, weights=weights,
                         center_freqs=bounds[1:-1].copy())


def apply_dct(x: np.ndarray) -> np.ndarray:
    """Orthonormal DCT-II along the last axis.

    y[j] = a(j) * sum_i x[i] cos(pi (2i+1) j / (2n)) with a(0) = sqrt(1/n)
    and a(j>0) = sqrt(2/n), so the transform matrix is orthonormal.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] < 1:
        raise ValueError("empty input")
    return scipy.fft.dct(x, type=2, norm="ortho", axis=-1)


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus orthonormal basis columns sorted by descending
    eigenvalue of the sample covariance (divisor N-1)."""

    mean: np.ndarray        # (d,)
    basis: np.ndarray       # (d, k), orthonormal columns
    eigenvalues: np.ndarray  # (k,), nonincreasing


def _fix_signs(basis: np.ndarray) -> np.ndarray:
    # Deterministic orientation: first entry of each column with magnitude
    # above tolerance is made positive.
    out = basis.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            out[:, j] = -col
    return out


def pca_fit(data: np.ndarray, k: int) -> PcaModel:
    """Fit a PCA model via SVD of the centered data matrix.

    Args:
        data: (N, d) sample matrix, N >= 2, finite.
        k: number of components to keep, k <= d.
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise ValueError("data must be 2-D")
    n, d = data.shape
    if n < 2:
        raise ValueError("need at least 2 samples")
    if k > d:
        raise ValueError(f"k={k} exceeds data dimension {d}")
    if not np.isfinite(data).all():
        raise ValueError("non-finite values in data")
    mean = data.mean(axis=0)
    _, svals, vt = np.linalg.svd(data - mean, full_matrices=False)
    eigenvalues = svals ** 2 / (n - 1)
    basis = _fix_signs(vt[:k].T)
    return PcaModel(mean=mean, basis=basis, eigenvalues=eigenvalues[:k].copy())


def pca_apply(model: PcaModel, x: np.ndarray) -> np.ndarray:
    """Project x (vector or rows of a matrix) onto the PCA basis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.mean.shape[0]:
        raise ValueError(
            f"dimension mismatch: got {x.shape[-1]}, model expects "
            f"{model.mean.shape[0]}")
    return (x - model.mean) @ model.basis


def _freq_rank_of_leaf(depth: int) -> np.ndarray:
    # Natural-frequency band of each leaf in tree (Paley) order. The
    # high-pass branch mirrors the spectrum at every split, so the band
    # index is the Gray decode (prefix XOR) of the path bits.
    n = 1 << depth
    ranks = np.empty(n, dtype=np.int64)
    for p in range(n):
        band = 0
        acc = 0
        for bit in range(depth - 1, -1, -1):
            acc ^= (p >> bit) & 1
            band = (band << 1) | acc
        ranks[p] = band
    return ranks


@dataclass(frozen=True)
class WaveletPacketTree:
    """Full balanced db4 wavelet packet tree with periodic extension.

    leaf_order maps each tree leaf (low/high path order) to its ascending
    frequency band, the Gray-code ordering of the 2**depth leaves.
    """

    depth: int = 6
    low_pass: np.ndarray = field(default_factory=lambda: DB4_LOW_PASS.copy())
    high_pass: np.ndarray = field(init=False)
    leaf_order: np.ndarray = field(init=False)

    def __post_init__(self):
        lp = np.asarray(self.low_pass, dtype=np.float64)
        n = lp.shape[0]
        hp = ((-1.0) ** np.arange(n)) * lp[::-1]
        object.__setattr__(self, "high_pass", hp)
        object.__setattr__(self, "leaf_order", _freq_rank_of_leaf(self.depth))

    @property
    def n_leaves(self) -> int:
        return 1 << self.depth

    @property
    def gather_map(self) -> np.ndarray:
        """Paley index of the leaf holding frequency band r (inverse of
        leaf_order)."""
        return np.argsort(self.leaf_order)


def wpt_decompose_batch(frames: np.ndarray, tree: WaveletPacketTree) -> np.ndarray:
    """Wavelet packet decomposition of each row of frames.

    Returns (F, 2**depth, frame_len / 2**depth) leaf coefficients in
    ascending frequency order. Periodic boundary extension keeps the
    filterbank orthonormal, so leaf energy matches frame energy exactly.
    """
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("frames must be 2-D")
    n = frames.shape[1]
    if n & (n - 1) or n < (1 << tree.depth):
        raise ValueError(
            f"frame length {n} must be a power of two >= 2**{tree.depth}")
    return wpt_analysis_batch(frames, tree.low_pass, tree.high_pass,
                              tree.depth, tree.gather_map)


def wpt_decompose(frame: np.ndarray, tree: WaveletPacketTree) -> np.ndarray:
    """Decompose a single frame; returns (2**depth, leaf_len) leaves in
    ascending frequency order."""
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim != 1:
        raise ValueError("frame must be 1-D")
    return wpt_decompose_batch(frame[None, :], tree)[0]


def wpt_reconstruct(leaves: np.ndarray, tree: WaveletPacketTree) -> np.ndarray:
    """Invert :func:`wpt_decompose` (synthesis bank, periodic extension)."""
    leaves = np.asarray(leaves, dtype=np.float64)
    if leaves.shape[0] != tree.n_leaves:
        raise ValueError("leaf count does not match tree depth")
    # back to tree order: leaf p sits at frequency band leaf_order[p]
    nodes = [leaves[tree.leaf_order[p]] for p in range(tree.n_leaves)]
    lo, hi = tree.low_pass, tree.high_pass
    taps = lo.shape[0]
    for _ in range(tree.depth):
        merged = []
        for j in range(0, len(nodes), 2):
            half = nodes[j].shape[0]
            n = 2 * half
            x = np.zeros(n)
            idx = (2 * np.arange(half)[:, None] + np.arange(taps)[None, :]) % n
            np.add.at(x, idx, nodes[j][:, None] * lo[None, :]
                      + nodes[j + 1][:, None] * hi[None, :])
            merged.append(x)
        nodes = merged
    return nodes[0]


def tke(s: np.ndarray) -> np.ndarray:
    """Teager-Kaiser energy along the last axis: s[t]^2 - s[t-1] s[t+1].

    Output drops the two boundary samples, so length L maps to L - 2.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.shape[-1] < 3:
        raise ValueError("need at least 3 samples")
    return s[..., 1:-1] ** 2 - s[..., :-2] * s[..., 2:]
