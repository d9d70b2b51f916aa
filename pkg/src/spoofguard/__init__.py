"""spoofguard: a voice anti-spoofing toolkit.

Detects synthetic and converted speech with an i-vector pipeline: four
acoustic feature families (cepstral, mel-PCA, phase, and wavelet/TKE),
a GMM background model with Total-Variability embedding, fusion by
concatenation, and SVM or DBN scoring. A zero-run pre-detector catches
cut-and-paste silence before any modeling.
"""

from ._accel import NUMBA_ENABLED
from .classify import (DbnModel, LinearSvmModel, Score, dbn_score, dbn_train,
                       rbm_pretrain, svm_score, svm_train)
from .config import PRESETS, PipelineConfig, build_config
from .container import read_container, write_container
from .evaluation import (EerResult, LdaProjection, ManifestEntry,
                         compute_eer, eer_by_attack, lda_fit_project,
                         parse_manifest, read_score_file, write_score_file)
from .features import (FeatureMatrix, FrontEndModels, add_deltas,
                       extract_cosphasepc, extract_mfcc, extract_mfpc,
                       extract_mwpc, fit_frontend)
from .pipeline import (PREDETECT_SENTINEL, cmd_eval, cmd_project_lda,
                       cmd_score, cmd_train, load_models)
from .signal import (FrameSet, SpectrumFrames, Waveform, frame_and_window,
                     hamming_window, load_waveform, predetect_zero_run,
                     spectrum)
from .transforms import (MelFilterbank, PcaModel, WaveletPacketTree,
                         apply_dct, build_mel_filterbank, hz_to_mel,
                         pca_apply, pca_fit, tke, wpt_decompose,
                         wpt_reconstruct)
from .ubmtv import (BwStats, DiagonalGmm, IVector, TvModel, collect_bw_stats,
                    extract_ivector, extract_ivectors_batch, fuse_ivectors,
                    gmm_em_train, gmm_posteriors, postprocess_ivector,
                    tv_train)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "__version__",
    # signal
    "Waveform", "FrameSet", "SpectrumFrames", "load_waveform",
    "predetect_zero_run", "hamming_window", "frame_and_window", "spectrum",
    # transforms
    "MelFilterbank", "PcaModel", "WaveletPacketTree", "hz_to_mel",
    "build_mel_filterbank", "apply_dct", "pca_fit", "pca_apply",
    "wpt_decompose", "wpt_reconstruct", "tke",
    # features
    "FeatureMatrix", "FrontEndModels", "add_deltas", "extract_mfcc",
    "extract_mfpc", "extract_cosphasepc", "extract_mwpc", "fit_frontend",
    # ubm-tv
    "DiagonalGmm", "BwStats", "TvModel", "IVector", "gmm_em_train",
    "gmm_posteriors", "collect_bw_stats", "tv_train", "extract_ivector",
    "extract_ivectors_batch", "postprocess_ivector", "fuse_ivectors",
    # classify
    "LinearSvmModel", "DbnModel", "Score", "svm_train", "svm_score",
    "rbm_pretrain", "dbn_train", "dbn_score",
    # eval
    "ManifestEntry", "EerResult", "LdaProjection", "parse_manifest",
    "compute_eer", "eer_by_attack", "lda_fit_project", "read_score_file",
    "write_score_file",
    # pipeline / config
    "PipelineConfig", "PRESETS", "build_config", "cmd_train", "cmd_score",
    "cmd_eval", "cmd_project_lda", "load_models", "PREDETECT_SENTINEL",
    "read_container", "write_container",
]
