"""Diagonal-covariance GMM background model and Total-Variability
i-vector extraction.

The universal background model is trained by EM on pooled frames. Each
utterance is then summarized by zeroth/first-order sufficient statistics,
a low-rank subspace T is learned over those statistics by a Gaussian
factor analyser, and the posterior mean of the latent factor is the
utterance's i-vector. I-vectors from several feature families are fused
by concatenation and the fused vector is centered and length-normalized.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ._kernels import gmm_log_resp
from .features import FeatureMatrix

__all__ = [
    "DiagonalGmm",
    "BwStats",
    "TvModel",
    "IVector",
    "gmm_em_train",
    "gmm_posteriors",
    "collect_bw_stats",
    "tv_train",
    "extract_ivector",
    "extract_ivectors_batch",
    "postprocess_ivector",
    "fuse_ivectors",
]

VARIANCE_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class DiagonalGmm:
    """Gaussian mixture with diagonal covariances.

    train_llk holds the total log-likelihood recorded at the start of each
    EM iteration (before that iteration's M-step).
    """

    weights: np.ndarray       # (C,)
    means: np.ndarray         # (C, d)
    variances: np.ndarray     # (C, d), strictly positive
    train_llk: Optional[np.ndarray] = None

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class BwStats:
    """Per-utterance sufficient statistics under the background model.

    f holds raw (uncentered) posterior-weighted frame sums, which keeps
    stats additive across utterance segments; centering with the UBM means
    happens at i-vector extraction.
    """

    n: np.ndarray   # (C,)
    f: np.ndarray   # (C, d)


@dataclass(frozen=True)
class TvModel:
    """Total-Variability subspace over mean supervectors.

    train_objective holds the per-iteration marginal log-likelihood proxy
    (constant terms dropped) recorded during training.
    """

    t_matrix: np.ndarray      # (C*d, R)
    ubm: DiagonalGmm
    rank: int
    train_objective: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IVector:
    values: np.ndarray
    normalized: bool = False


def _log_consts(gmm: DiagonalGmm):
    log_w = np.log(np.maximum(gmm.weights, 1e-300))
    log_norm = -0.5 * np.sum(np.log(2.0 * np.pi * gmm.variances), axis=1)
    return log_w, log_norm


def _posteriors_batch(gmm: DiagonalGmm, frames: np.ndarray):
    """Responsibilities and per-frame log-likelihood for (N, d) frames."""
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    log_w, log_norm = _log_consts(gmm)
    return gmm_log_resp(frames, log_w, np.ascontiguousarray(gmm.means),
                        np.ascontiguousarray(1.0 / gmm.variances), log_norm)


def _kmeanspp_indices(frames: np.ndarray, c: int,
                      rng: np.random.Generator) -> np.ndarray:
    n = frames.shape[0]
    chosen = np.empty(c, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = ((frames - frames[chosen[0]]) ** 2).sum(axis=1)
    for i in range(1, c):
        total = d2.sum()
        if total <= 0.0:
            chosen[i] = rng.integers(n)
            continue
        chosen[i] = rng.choice(n, p=d2 / total)
        d2 = np.minimum(d2, ((frames - frames[chosen[i]]) ** 2).sum(axis=1))
    return chosen


def gmm_em_train(frames: np.ndarray, c: int, iters: int = 10,
                 seed: int = 0) -> DiagonalGmm:
    """Train a diagonal GMM by EM.

    Initialization: c frames picked by seeded k-means++ style sampling as
    means, the global per-dimension variance as every component variance,
    uniform weights. Variances are floored each M-step at
    VARIANCE_FLOOR_FRACTION times the global variance.
    """
    frames = np.ascontiguousarray(frames, dtype=np.float64)
    if frames.ndim != 2:
        raise ValueError("frames must be 2-D")
    n, d = frames.shape
    if n < 10 * c:
        raise ValueError(f"too few frames: {n} for {c} components, need "
                         f">= {10 * c}")
    if not np.isfinite(frames).all():
        raise ValueError("non-finite frames")
    global_var = frames.var(axis=0)
    if not (global_var > 0.0).any():
        raise ValueError("degenerate data: all frames identical")
    floor = VARIANCE_FLOOR_FRACTION * np.maximum(global_var, 1e-12)

    rng = np.random.default_rng(seed)
    means = frames[_kmeanspp_indices(frames, c, rng)].copy()
    variances = np.tile(np.maximum(global_var, floor), (c, 1))
    weights = np.full(c, 1.0 / c)

    llk_trace = np.empty(iters)
    gmm = DiagonalGmm(weights=weights, means=means, variances=variances)
    for it in range(iters):
        gamma, llk = _posteriors_batch(gmm, frames)
        llk_trace[it] = llk.sum()
        nk = gamma.sum(axis=0)
        nk_safe = np.maximum(nk, 1e-12)
        new_means = (gamma.T @ frames) / nk_safe[:, None]
        sq = (gamma.T @ (frames ** 2)) / nk_safe[:, None]
        new_var = np.maximum(sq - new_means ** 2, floor)
        gmm = DiagonalGmm(weights=nk / n, means=new_means,
                          variances=new_var)
    return DiagonalGmm(weights=gmm.weights, means=gmm.means,
                       variances=gmm.variances, train_llk=llk_trace)


def gmm_posteriors(g: DiagonalGmm, frame: np.ndarray) -> np.ndarray:
    """Component responsibilities for one frame (or rows of a matrix).

    Computed in the log domain, so distant frames still produce a proper
    distribution instead of underflowing to all zeros.
    """
    frame = np.asarray(frame, dtype=np.float64)
    single = frame.ndim == 1
    gamma, _ = _posteriors_batch(g, frame[None, :] if single else frame)
    return gamma[0] if single else gamma


def collect_bw_stats(g: DiagonalGmm, feats: FeatureMatrix) -> BwStats:
    """Zeroth and first-order statistics of an utterance under the UBM."""
    data = feats.data
    if data.shape[1] != g.dim:
        raise ValueError(
            f"feature dim {data.shape[1]} does not match model dim {g.dim}")
    gamma, _ = _posteriors_batch(g, data)
    return BwStats(n=gamma.sum(axis=0), f=gamma.T @ data)


def _estep(t_matrix, gmm, n_mat, f_cent):
    """Latent posterior for every utterance.

    Returns (xhat (U, R), exx (U, R, R), objective scalar)."""
    c, d = gmm.means.shape
    r = t_matrix.shape[1]
    tm = t_matrix.reshape(c, d, r)
    w = tm / gmm.variances[:, :, None]               # Sigma^-1 T
    gram = np.einsum("cdr,cds->crs", w, tm)          # (C, R, R)
    b = np.einsum("cdr,ucd->ur", w, f_cent)          # (U, R)
    lmat = np.eye(r) + np.einsum("uc,crs->urs", n_mat, gram)
    chol = np.linalg.cholesky(lmat)                  # also asserts SPD
    xhat = np.linalg.solve(lmat, b[:, :, None])[:, :, 0]
    linv = np.linalg.inv(lmat)
    exx = linv + np.einsum("ur,us->urs", xhat, xhat)
    logdet = 2.0 * np.log(np.diagonal(chol, axis1=1, axis2=2)).sum(axis=1)
    objective = 0.5 * ((b * xhat).sum() - logdet.sum())
    return xhat, exx, objective


def tv_train(stats: List[BwStats], g: DiagonalGmm, rank: int,
             iters: int = 5, seed: int = 0) -> TvModel:
    """Train the Total-Variability matrix by EM.

    T starts from seeded uniform(-0.1, 0.1) entries. Each iteration runs
    the latent-factor E-step over all utterances and solves per-component
    normal equations for T's rows. There is no minimum-divergence step and
    the UBM is left untouched.
    """
    c, d = g.means.shape
    u = len(stats)
    if u < rank:
        raise ValueError(f"need at least rank={rank} utterances, got {u}")
    if rank > c * d:
        raise ValueError(f"rank {rank} exceeds supervector dim {c * d}")
    n_mat = np.stack([s.n for s in stats])                   # (U, C)
    f_cent = np.stack([s.f for s in stats])                  # (U, C, d)
    f_cent = f_cent - n_mat[:, :, None] * g.means[None, :, :]

    rng = np.random.default_rng(seed)
    t_matrix = rng.uniform(-0.1, 0.1, size=(c * d, rank))
    objective = np.empty(iters)
    has_evidence = n_mat.sum() > 0.0
    for it in range(iters):
        xhat, exx, objective[it] = _estep(t_matrix, g, n_mat, f_cent)
        if not has_evidence:
            continue  # no stats, nothing to estimate
        acc = np.einsum("uc,urs->crs", n_mat, exx)           # (C, R, R)
        rhs = np.einsum("ucd,ur->cdr", f_cent, xhat)         # (C, d, R)
        tm = t_matrix.reshape(c, d, rank)
        for comp in range(c):
            if not acc[comp].any():
                continue
            try:
                tm[comp] = np.linalg.solve(acc[comp], rhs[comp].T).T
            except np.linalg.LinAlgError as exc:
                raise ValueError(
                    f"singular accumulator for component {comp}") from exc
        t_matrix = tm.reshape(c * d, rank)
    return TvModel(t_matrix=t_matrix, ubm=g, rank=rank,
                   train_objective=objective)


def extract_ivector(tv: TvModel, stats: BwStats) -> IVector:
    """Posterior mean of the latent factor for one utterance.

    L = I + sum_c n[c] T_c' Sigma_c^-1 T_c and
    b = sum_c T_c' Sigma_c^-1 (f[c] - n[c] m_c); the i-vector is L^-1 b.
    """
    g = tv.ubm
    c, d = g.means.shape
    if stats.n.shape[0] != c or stats.f.shape != (c, d):
        raise ValueError("stats dimensions do not match the model")
    if not (np.isfinite(stats.n).all() and np.isfinite(stats.f).all()):
        raise ValueError("non-finite statistics")
    f_cent = stats.f - stats.n[:, None] * g.means
    xhat, _, _ = _estep(tv.t_matrix, g, stats.n[None, :], f_cent[None, :, :])
    return IVector(values=xhat[0], normalized=False)


def extract_ivectors_batch(tv: TvModel, stats: List[BwStats]) -> List[IVector]:
    """Extract i-vectors for many utterances in one linear-algebra pass."""
    if not stats:
        return []
    g = tv.ubm
    n_mat = np.stack([s.n for s in stats])
    f_cent = np.stack([s.f for s in stats])
    if not (np.isfinite(n_mat).all() and np.isfinite(f_cent).all()):
        raise ValueError("non-finite statistics")
    f_cent = f_cent - n_mat[:, :, None] * g.means[None, :, :]
    xhat, _, _ = _estep(tv.t_matrix, g, n_mat, f_cent)
    return [IVector(values=xhat[i], normalized=False)
            for i in range(len(stats))]


def postprocess_ivector(v: IVector, training_mean: np.ndarray) -> IVector:
    """Center by the training mean and scale to unit Euclidean norm."""
    if v.normalized:
        raise ValueError("i-vector is already normalized")
    training_mean = np.asarray(training_mean, dtype=np.float64)
    if v.values.shape != training_mean.shape:
        raise ValueError("training mean dimension mismatch")
    centered = v.values - training_mean
    norm = float(np.linalg.norm(centered))
    if norm == 0.0:
        raise ValueError("zero i-vector after centering; utterance unusable")
    return IVector(values=centered / norm, normalized=True)


def fuse_ivectors(parts: List[IVector]) -> IVector:
    """Concatenate per-feature i-vectors in the configured order.

    Centering and normalization are applied after fusion, on the fused
    vector, so parts must share the same (un)normalized state.
    """
    if not parts:
        raise ValueError("no i-vectors to fuse")
    flags = {p.normalized for p in parts}
    if len(flags) != 1:
        raise ValueError("cannot fuse normalized with unnormalized i-vectors")
    return IVector(values=np.concatenate([p.values for p in parts]),
                   normalized=False)
