"""Dataset protocol, score files, equal error rate, and LDA export.

Score polarity is fixed package-wide: higher means more human-like. EER is
computed by sweeping thresholds at the midpoints of adjacent distinct
scores and linearly interpolating the FAR/FRR crossing.
"""

import re
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import scipy.linalg

from .classify import Score

__all__ = [
    "ManifestEntry",
    "EerResult",
    "LdaProjection",
    "parse_manifest",
    "compute_eer",
    "eer_by_attack",
    "lda_fit_project",
    "read_score_file",
    "write_score_file",
    "format_eer_report",
    "write_eer_tsv",
]

LABELS = ("human", "spoof")
PARTITIONS = ("train", "dev", "eval")
_ATTACK_RE = re.compile(r"^S(10|[1-9])$")


@dataclass(frozen=True)
class ManifestEntry:
    utt_id: str
    path: str
    label: str                # human | spoof
    attack: Optional[str]     # S1..S10 for spoof, None for human
    partition: str            # train | dev | eval


@dataclass(frozen=True)
class EerResult:
    eer_overall: float
    threshold_at_eer: float
    eer_by_attack: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class LdaProjection:
    basis: np.ndarray        # (D, k), orthonormal columns
    projected: np.ndarray    # (N, k)
    classes: List[str]


def parse_manifest(path) -> List[ManifestEntry]:
    """Read the tab-separated protocol file.

    Columns: utt_id, path, label, attack ('-' for genuine), partition.
    Lines starting with '#' and blank lines are skipped. Duplicate ids,
    unknown labels/partitions, and label/attack inconsistencies are
    rejected with the offending line number.
    """
    entries = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 5:
                raise ValueError(
                    f"{path}:{lineno}: expected 5 tab-separated fields, "
                    f"got {len(parts)}")
            utt_id, rel, label, attack, partition = parts
            if not utt_id:
                raise ValueError(f"{path}:{lineno}: empty utt_id")
            if utt_id in seen:
                raise ValueError(f"{path}:{lineno}: duplicate utt_id "
                                 f"{utt_id!r}")
            if label not in LABELS:
                raise ValueError(f"{path}:{lineno}: unknown label {label!r}")
            if partition not in PARTITIONS:
                raise ValueError(
                    f"{path}:{lineno}: unknown partition {partition!r}")
            if label == "human":
                if attack != "-":
                    raise ValueError(
                        f"{path}:{lineno}: genuine utterance with attack "
                        f"{attack!r}")
                attack_val = None
            else:
                if not _ATTACK_RE.match(attack):
                    raise ValueError(
                        f"{path}:{lineno}: spoof utterance needs attack "
                        f"S1..S10, got {attack!r}")
                attack_val = attack
            seen.add(utt_id)
            entries.append(ManifestEntry(utt_id=utt_id, path=rel,
                                         label=label, attack=attack_val,
                                         partition=partition))
    return entries


def compute_eer(genuine, spoof) -> EerResult:
    """Equal error rate in percent.

    Candidate thresholds are the midpoints of adjacent distinct scores
    plus one sentinel beyond each end. FRR(t) is the fraction of genuine
    scores below t, FAR(t) the fraction of spoof scores at or above t.
    FAR - FRR decreases along the sweep; the EER is the linear
    interpolation of the two rates at the first sign change, with ties
    resolved toward the lower threshold.
    """
    genuine = np.asarray(genuine, dtype=np.float64)
    spoof = np.asarray(spoof, dtype=np.float64)
    if genuine.size == 0 or spoof.size == 0:
        raise ValueError("both genuine and spoof scores are required")
    if not (np.isfinite(genuine).all() and np.isfinite(spoof).all()):
        raise ValueError("scores must be finite")
    distinct = np.unique(np.concatenate([genuine, spoof]))
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    cands = np.concatenate([[distinct[0] - 1.0], mids, [distinct[-1] + 1.0]])
    frr = 100.0 * (genuine[None, :] < cands[:, None]).mean(axis=1)
    far = 100.0 * (spoof[None, :] >= cands[:, None]).mean(axis=1)
    diff = far - frr
    # diff is nonincreasing from +100 to -100; the first bracket
    # [i, i+1] with diff[i] >= 0 >= diff[i+1] is the crossing, and taking
    # the first one resolves ties toward the lower threshold.
    i = int(np.flatnonzero((diff[:-1] >= 0.0) & (diff[1:] <= 0.0))[0])
    denom = diff[i] - diff[i + 1]
    lam = 0.0 if denom == 0.0 else diff[i] / denom
    eer = far[i] + lam * (far[i + 1] - far[i])
    thr = cands[i] + lam * (cands[i + 1] - cands[i])
    return EerResult(eer_overall=float(eer), threshold_at_eer=float(thr))


def eer_by_attack(scores: List[Score], manifest: List[ManifestEntry]) -> EerResult:
    """Overall EER plus one EER per attack type present in the scores.

    Every attack is evaluated against the full genuine pool. Scored
    utterances missing from the manifest are an error.
    """
    by_id = {e.utt_id: e for e in manifest}
    genuine = []
    spoof_all = []
    spoof_by_attack: Dict[str, list] = {}
    for s in scores:
        entry = by_id.get(s.utt_id)
        if entry is None:
            raise ValueError(f"scored utt_id {s.utt_id!r} not in manifest")
        if entry.label == "human":
            genuine.append(s.value)
        else:
            spoof_all.append(s.value)
            spoof_by_attack.setdefault(entry.attack, []).append(s.value)
    overall = compute_eer(genuine, spoof_all)
    per_attack = {
        attack: compute_eer(genuine, vals).eer_overall
        for attack, vals in sorted(spoof_by_attack.items())
    }
    return EerResult(eer_overall=overall.eer_overall,
                     threshold_at_eer=overall.threshold_at_eer,
                     eer_by_attack=per_attack)


def _fix_column_signs(basis: np.ndarray) -> np.ndarray:
    out = basis.copy()
    for j in range(out.shape[1]):
        nz = np.flatnonzero(np.abs(out[:, j]) > 1e-12)
        if nz.size and out[nz[0], j] < 0:
            out[:, j] = -out[:, j]
    return out


def lda_fit_project(ivectors: np.ndarray, classes, k: int = 3) -> LdaProjection:
    """Fisher discriminant directions and the projected points.

    Solves S_b v = lambda S_w v with S_w ridge-regularized by
    1e-6 * trace(S_w) / D, keeps the top eigenvectors, orthonormalizes
    them, and projects the centered i-vectors. k is clamped to
    n_classes - 1 when necessary (reported on stderr).
    """
    x = np.asarray(ivectors, dtype=np.float64)
    labels = [str(c) for c in classes]
    if x.shape[0] != len(labels):
        raise ValueError("one class label per i-vector required")
    uniq = sorted(set(labels))
    if len(uniq) < 2:
        raise ValueError("need at least 2 classes")
    d = x.shape[1]
    max_k = len(uniq) - 1
    if k > max_k:
        print(f"lda: clamping k from {k} to {max_k} (rank bound)",
              file=sys.stderr)
        k = max_k
    if k < 1:
        raise ValueError("k must be >= 1")
    mean_all = x.mean(axis=0)
    s_w = np.zeros((d, d))
    s_b = np.zeros((d, d))
    lab_arr = np.array(labels)
    for c in uniq:
        xc = x[lab_arr == c]
        mc = xc.mean(axis=0)
        dev = xc - mc
        s_w += dev.T @ dev
        gap = (mc - mean_all)[:, None]
        s_b += xc.shape[0] * (gap @ gap.T)
    s_w = s_w + (1e-6 * np.trace(s_w) / d) * np.eye(d)
    try:
        evals, evecs = scipy.linalg.eigh(s_b, s_w)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:
        raise ValueError(
            "singular within-class scatter beyond ridge repair") from exc
    top = evecs[:, np.argsort(evals)[::-1][:k]]
    q, _ = np.linalg.qr(top)
    basis = _fix_column_signs(q)
    return LdaProjection(basis=basis, projected=(x - mean_all) @ basis,
                         classes=labels)


def read_score_file(path) -> List[Score]:
    scores = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected 'utt_id<TAB>score'")
            try:
                value = float(parts[1])
            except ValueError as exc:
                raise ValueError(
                    f"{path}:{lineno}: bad score {parts[1]!r}") from exc
            scores.append(Score(utt_id=parts[0], value=value))
    return scores


def write_score_file(path, scores: List[Score]):
    """One line per utterance, sorted by utt_id, scores with 6 fraction
    digits."""
    with open(path, "w", encoding="utf-8") as fh:
        for s in sorted(scores, key=lambda s: s.utt_id):
            fh.write(f"{s.utt_id}\t{s.value:.6f}\n")


def _attack_sort_key(attack: str):
    return int(attack[1:])


def format_eer_report(result: EerResult, system: str = "system") -> str:
    """Text table: one row per system, columns for each attack present
    plus the overall pool."""
    attacks = sorted(result.eer_by_attack, key=_attack_sort_key)
    headers = ["system"] + attacks + ["All"]
    values = [system] + [f"{result.eer_by_attack[a]:.2f}" for a in attacks]
    values.append(f"{result.eer_overall:.2f}")
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    line1 = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    line2 = "  ".join(v.ljust(w) for v, w in zip(values, widths))
    return line1 + "\n" + line2 + "\n"


def write_eer_tsv(path, result: EerResult, system: str = "system"):
    """Machine-readable copy of the report: system, attack, eer rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("system\tattack\teer\n")
        for attack in sorted(result.eer_by_attack, key=_attack_sort_key):
            fh.write(f"{system}\t{attack}\t{result.eer_by_attack[attack]:.6f}\n")
        fh.write(f"{system}\tAll\t{result.eer_overall:.6f}\n")
