"""Batch pipeline: train, score, eval, and LDA projection export.

Training fits, per configured feature family, the PCA front end, the
background GMM, and the Total-Variability subspace; fuses per-family
i-vectors; and trains the classifier on centered, length-normalized fused
vectors. All stages derive their randomness from the single config seed,
so repeated runs produce bit-identical model and score files.

Logs go to stderr; data artifacts go to files.
"""

import os
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from .classify import (DbnModel, LinearSvmModel, Score, dbn_score, dbn_train,
                       rbm_pretrain, svm_score, svm_train)
from .config import PipelineConfig
from .container import read_container, write_container
from .evaluation import (EerResult, ManifestEntry, eer_by_attack,
                         format_eer_report, lda_fit_project, parse_manifest,
                         read_score_file, write_eer_tsv, write_score_file)
from .features import (FEATURE_NAMES, FrontEndModels, extract_features,
                       fit_frontend)
from .signal import load_waveform, predetect_zero_run
from .transforms import PcaModel
from .ubmtv import (DiagonalGmm, TvModel, collect_bw_stats,
                    extract_ivectors_batch, fuse_ivectors, gmm_em_train,
                    postprocess_ivector, tv_train)

__all__ = ["PipelineModels", "PREDETECT_SENTINEL", "cmd_train", "cmd_score",
           "cmd_eval", "cmd_project_lda", "load_models"]

PREDETECT_SENTINEL = -1e9
MAX_POOL_FRAMES = 500_000
_CLASSIFIER_CODES = {"svm": 0.0, "dbn": 1.0}


@dataclass
class PipelineModels:
    """Everything cmd_score needs, as loaded from the model directory."""

    frontend: FrontEndModels
    ubms: Dict[str, DiagonalGmm]
    tvs: Dict[str, TvModel]
    ivector_mean: np.ndarray
    svm: Optional[LinearSvmModel] = None
    dbn: Optional[DbnModel] = None


def _log(msg: str):
    print(msg, file=sys.stderr)


@contextmanager
def _stage(name: str):
    """Attach the pipeline stage name to any failure inside it."""
    try:
        yield
    except Exception as exc:
        raise RuntimeError(f"stage {name!r} failed: {exc}") from exc


def _map_ordered(fn, items, jobs: int):
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _resolve(manifest_path, entry: ManifestEntry) -> str:
    base = os.path.dirname(os.path.abspath(manifest_path))
    return os.path.join(base, entry.path)


def _load_entries(config: PipelineConfig, manifest_path):
    manifest_path = manifest_path or config.manifest
    if manifest_path is None:
        raise ValueError("no manifest given")
    entries = parse_manifest(manifest_path)
    return manifest_path, entries


def _subsample_rows(data: np.ndarray, cap: int, seed: int) -> np.ndarray:
    if data.shape[0] <= cap:
        return data
    rng = np.random.default_rng(seed)
    keep = rng.choice(data.shape[0], size=cap, replace=False)
    keep.sort()
    return data[keep]


def _meta_array(config: PipelineConfig) -> np.ndarray:
    codes = [float(FEATURE_NAMES.index(f)) for f in config.feature_set]
    return np.array([1.0, float(config.ubm_components), float(config.tv_rank),
                     _CLASSIFIER_CODES[config.classifier],
                     float(len(codes))] + codes)


def _check_meta(config: PipelineConfig, meta: np.ndarray, path):
    expect = _meta_array(config)
    if meta.shape != expect.shape or not np.array_equal(meta, expect):
        stored_feats = ",".join(
            FEATURE_NAMES[int(i)] for i in meta[5:5 + int(meta[4])])
        raise ValueError(
            f"model/config mismatch at {path}: models were trained with "
            f"features={stored_feats}, ubm_components={int(meta[1])}, "
            f"tv_rank={int(meta[2])}, classifier="
            f"{'dbn' if meta[3] else 'svm'}")


def _frontend_sections(config: PipelineConfig,
                       frontend: FrontEndModels) -> dict:
    sections = {"meta": _meta_array(config)}
    for feat in config.feature_set:
        pca = frontend.pca_for(feat)
        if pca is not None:
            sections[f"pca_{feat}_mean"] = pca.mean
            sections[f"pca_{feat}_basis"] = pca.basis
            sections[f"pca_{feat}_eigenvalues"] = pca.eigenvalues
    return sections


def _frontend_from_sections(config: PipelineConfig,
                            sections: dict) -> FrontEndModels:
    frontend = FrontEndModels()
    for feat in config.feature_set:
        key = f"pca_{feat}_mean"
        if key not in sections:
            continue
        pca = PcaModel(mean=sections[key],
                       basis=sections[f"pca_{feat}_basis"],
                       eigenvalues=sections[f"pca_{feat}_eigenvalues"])
        if feat == "mfpc":
            frontend.pca_mfpc = pca
        elif feat == "cosphasepc":
            frontend.pca_cosphase = pca
        elif feat == "mwpc":
            frontend.pca_mwpc = pca
    return frontend


def cmd_train(config: PipelineConfig, manifest_path=None) -> Dict[str, str]:
    """Fit every stage on the manifest's train partition and write one
    model container per stage into config.models_dir."""
    manifest_path, entries = _load_entries(config, manifest_path)
    models_dir = config.models_dir
    if models_dir is None:
        raise ValueError("no models directory given")
    os.makedirs(models_dir, exist_ok=True)

    train = sorted((e for e in entries if e.partition == "train"),
                   key=lambda e: e.utt_id)
    if not train:
        raise ValueError("manifest has no train partition")
    labels = {e.label for e in train}
    if labels != {"human", "spoof"}:
        missing = sorted({"human", "spoof"} - labels)
        raise ValueError(f"train partition lacks {missing[0]!r} utterances")

    written: Dict[str, str] = {}

    with _stage("load-audio"):
        waves = _map_ordered(
            lambda e: load_waveform(_resolve(manifest_path, e)),
            train, config.jobs)
        _log(f"train: {len(waves)} utterances, features "
             f"{','.join(config.feature_set)}")

    with _stage("frontend"):
        frontend = fit_frontend(waves, config.feature_set, seed=config.seed)
        path = os.path.join(models_dir, "frontend.spgd")
        write_container(path, _frontend_sections(config, frontend))
        written["frontend"] = path

    parts: Dict[str, list] = {}
    for feat in config.feature_set:
        with _stage(f"features-{feat}"):
            feats = _map_ordered(
                lambda w: extract_features(w, frontend, feat),
                waves, config.jobs)
        with _stage(f"ubm-{feat}"):
            pooled = np.concatenate([f.data for f in feats], axis=0)
            pooled = _subsample_rows(pooled, MAX_POOL_FRAMES, config.seed)
            ubm = gmm_em_train(pooled, config.ubm_components,
                               iters=config.ubm_iters, seed=config.seed)
            _log(f"ubm[{feat}]: {pooled.shape[0]} frames, log-likelihood "
                 f"{ubm.train_llk[0]:.1f} -> {ubm.train_llk[-1]:.1f}")
            path = os.path.join(models_dir, f"ubm_{feat}.spgd")
            write_container(path, {"weights": ubm.weights,
                                   "means": ubm.means,
                                   "variances": ubm.variances})
            written[f"ubm_{feat}"] = path
        with _stage(f"tv-{feat}"):
            stats = _map_ordered(
                lambda f: collect_bw_stats(ubm, f), feats, config.jobs)
            tv = tv_train(stats, ubm, config.tv_rank,
                          iters=config.tv_iters, seed=config.seed)
            _log(f"tv[{feat}]: objective "
                 f"{tv.train_objective[0]:.1f} -> {tv.train_objective[-1]:.1f}")
            path = os.path.join(models_dir, f"tv_{feat}.spgd")
            write_container(path, {"t_matrix": tv.t_matrix})
            written[f"tv_{feat}"] = path
        with _stage(f"ivectors-{feat}"):
            parts[feat] = extract_ivectors_batch(tv, stats)

    with _stage("ivector-norm"):
        fused = [fuse_ivectors([parts[feat][i] for feat in config.feature_set])
                 for i in range(len(train))]
        ivector_mean = np.mean([v.values for v in fused], axis=0)
        path = os.path.join(models_dir, "ivnorm.spgd")
        write_container(path, {"mean": ivector_mean})
        written["ivnorm"] = path
        rows, y = [], []
        for entry, vec in zip(train, fused):
            try:
                rows.append(postprocess_ivector(vec, ivector_mean).values)
            except ValueError as exc:
                _log(f"warning: skipping {entry.utt_id}: {exc}")
                continue
            y.append(1.0 if entry.label == "human" else -1.0)
        x = np.stack(rows)
        y = np.asarray(y)

    with _stage("classifier"):
        if config.classifier == "svm":
            model = svm_train(x, y, c_param=config.svm_c, seed=config.seed)
            path = os.path.join(models_dir, "svm.spgd")
            write_container(path, {"weights": model.weights,
                                   "bias": np.float64(model.bias),
                                   "c_param": np.float64(model.c_param)})
            written["classifier"] = path
            _log(f"svm: {x.shape[0]} vectors, dim {x.shape[1]}")
        else:
            pre = rbm_pretrain(x, list(config.dbn_hidden),
                               epochs=config.rbm_epochs, seed=config.seed)
            model = dbn_train(pre, x, y, epochs=config.dbn_epochs,
                              seed=config.seed)
            sections = {"n_layers": np.float64(len(model.layers))}
            for i, (w, b) in enumerate(model.layers):
                sections[f"layer{i}_w"] = w
                sections[f"layer{i}_b"] = b
            sections["head_w"] = model.head[0]
            sections["head_b"] = model.head[1]
            path = os.path.join(models_dir, "dbn.spgd")
            write_container(path, sections)
            written["classifier"] = path
            _log(f"dbn: {x.shape[0]} vectors, layers "
                 f"{'-'.join(str(h) for h in config.dbn_hidden)}")
    return written


def load_models(config: PipelineConfig, models_dir=None) -> PipelineModels:
    """Load every stage container and verify it matches the config."""
    models_dir = models_dir or config.models_dir
    if models_dir is None:
        raise ValueError("no models directory given")
    fe_path = os.path.join(models_dir, "frontend.spgd")
    allowed = {"meta"}
    for feat in FEATURE_NAMES:
        allowed |= {f"pca_{feat}_mean", f"pca_{feat}_basis",
                    f"pca_{feat}_eigenvalues"}
    sections = read_container(fe_path, allowed=allowed)
    _check_meta(config, sections["meta"], fe_path)
    frontend = _frontend_from_sections(config, sections)

    ubms, tvs = {}, {}
    for feat in config.feature_set:
        upath = os.path.join(models_dir, f"ubm_{feat}.spgd")
        usec = read_container(upath,
                              allowed={"weights", "means", "variances"})
        ubm = DiagonalGmm(weights=usec["weights"], means=usec["means"],
                          variances=usec["variances"])
        if ubm.n_components != config.ubm_components:
            raise ValueError(
                f"model/config mismatch at {upath}: {ubm.n_components} "
                f"components, config wants {config.ubm_components}")
        ubms[feat] = ubm
        tpath = os.path.join(models_dir, f"tv_{feat}.spgd")
        tsec = read_container(tpath, allowed={"t_matrix"})
        t_matrix = tsec["t_matrix"]
        if t_matrix.shape != (ubm.n_components * ubm.dim, config.tv_rank):
            raise ValueError(
                f"model/config mismatch at {tpath}: T is {t_matrix.shape}, "
                f"config wants "
                f"{(ubm.n_components * ubm.dim, config.tv_rank)}")
        tvs[feat] = TvModel(t_matrix=t_matrix, ubm=ubm, rank=config.tv_rank)

    ivsec = read_container(os.path.join(models_dir, "ivnorm.spgd"),
                           allowed={"mean"})
    loaded = PipelineModels(frontend=frontend, ubms=ubms, tvs=tvs,
                            ivector_mean=ivsec["mean"])
    fused_dim = config.tv_rank * len(config.feature_set)
    if loaded.ivector_mean.shape != (fused_dim,):
        raise ValueError("model/config mismatch: fused i-vector dimension")
    if config.classifier == "svm":
        ssec = read_container(os.path.join(models_dir, "svm.spgd"),
                              allowed={"weights", "bias", "c_param"})
        loaded.svm = LinearSvmModel(weights=ssec["weights"],
                                    bias=float(ssec["bias"]),
                                    c_param=float(ssec["c_param"]))
        if loaded.svm.weights.shape != (fused_dim,):
            raise ValueError("model/config mismatch: svm weight dimension")
    else:
        dsec = read_container(os.path.join(models_dir, "dbn.spgd"))
        n_layers = int(dsec["n_layers"])
        layers = [(dsec[f"layer{i}_w"], dsec[f"layer{i}_b"])
                  for i in range(n_layers)]
        loaded.dbn = DbnModel(layers=layers,
                              head=(dsec["head_w"], dsec["head_b"]))
        if layers and layers[0][0].shape[0] != fused_dim:
            raise ValueError("model/config mismatch: dbn input dimension")
    return loaded


def _score_one(config: PipelineConfig, models: PipelineModels,
               manifest_path, entry: ManifestEntry) -> Score:
    wav = load_waveform(_resolve(manifest_path, entry))
    if config.predetector and predetect_zero_run(wav):
        return Score(utt_id=entry.utt_id, value=PREDETECT_SENTINEL)
    ivs = []
    for feat in config.feature_set:
        fm = extract_features(wav, models.frontend, feat, entry.utt_id)
        stats = collect_bw_stats(models.ubms[feat], fm)
        ivs.extend(extract_ivectors_batch(models.tvs[feat], [stats]))
    fused = fuse_ivectors(ivs)
    try:
        normalized = postprocess_ivector(fused, models.ivector_mean)
    except ValueError as exc:
        _log(f"warning: {entry.utt_id}: {exc}; emitting sentinel")
        return Score(utt_id=entry.utt_id, value=PREDETECT_SENTINEL)
    if config.classifier == "svm":
        value = svm_score(models.svm, normalized.values)
    else:
        value = dbn_score(models.dbn, normalized.values)
    return Score(utt_id=entry.utt_id, value=float(value))


def cmd_score(config: PipelineConfig, manifest_path=None,
              models_dir=None) -> List[Score]:
    """Score every utterance in the manifest; write config.out if set.

    The pre-detector, when enabled, floors flagged utterances at the
    sentinel without running the models."""
    manifest_path, entries = _load_entries(config, manifest_path)
    models = load_models(config, models_dir)
    entries = sorted(entries, key=lambda e: e.utt_id)
    scores = _map_ordered(
        lambda e: _score_one(config, models, manifest_path, e),
        entries, config.jobs)
    if config.out:
        write_score_file(config.out, scores)
        _log(f"scores: {len(scores)} utterances -> {config.out}")
    return scores


def cmd_eval(scores_path, manifest_path, out=None,
             system: str = "system") -> EerResult:
    """Print the overall and per-attack EER table; optionally write the
    tab-separated copy."""
    scores = read_score_file(scores_path)
    manifest = parse_manifest(manifest_path)
    known = {e.utt_id for e in manifest}
    unmatched = sorted(s.utt_id for s in scores if s.utt_id not in known)
    if unmatched:
        raise ValueError(
            f"{len(unmatched)} scored utterances missing from manifest: "
            f"{', '.join(unmatched[:10])}"
            + ("..." if len(unmatched) > 10 else ""))
    result = eer_by_attack(scores, manifest)
    sys.stdout.write(format_eer_report(result, system))
    if out:
        write_eer_tsv(out, result, system)
        _log(f"eer table -> {out}")
    return result


def cmd_project_lda(config: PipelineConfig, manifest_path=None,
                    models_dir=None, out=None, k: int = 3):
    """Project fused normalized i-vectors with Fisher LDA and export
    utt_id, class, and coordinates as tab-separated text.

    Classes are 'human' and the attack types. The pre-detector is not
    applied: the point of the export is to look at the embedding space.
    """
    manifest_path, entries = _load_entries(config, manifest_path)
    models = load_models(config, models_dir)
    entries = sorted(entries, key=lambda e: e.utt_id)

    def embed(entry):
        wav = load_waveform(_resolve(manifest_path, entry))
        ivs = []
        for feat in config.feature_set:
            fm = extract_features(wav, models.frontend, feat, entry.utt_id)
            stats = collect_bw_stats(models.ubms[feat], fm)
            ivs.extend(extract_ivectors_batch(models.tvs[feat], [stats]))
        return postprocess_ivector(fuse_ivectors(ivs),
                                   models.ivector_mean).values

    vectors = _map_ordered(embed, entries, config.jobs)
    classes = [e.label if e.label == "human" else e.attack for e in entries]
    proj = lda_fit_project(np.stack(vectors), classes, k=k)
    out = out or config.out
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            for entry, cls, row in zip(entries, proj.classes, proj.projected):
                coords = "\t".join(f"{v:.6f}" for v in row)
                fh.write(f"{entry.utt_id}\t{cls}\t{coords}\n")
        _log(f"lda projection -> {out}")
    return proj
