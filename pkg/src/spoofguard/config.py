"""Pipeline configuration and named system presets.

Precedence, lowest to highest: built-in defaults, preset expansion,
config-file keys, command-line flags. Preset expansion is pure: the same
preset name always yields the same expanded values.
"""

from dataclasses import dataclass, fields, replace
from typing import Optional, Tuple

from .features import FEATURE_NAMES

__all__ = ["PipelineConfig", "PRESETS", "parse_config_file",
           "parse_feature_list", "build_config"]


@dataclass(frozen=True)
class PipelineConfig:
    feature_set: Tuple[str, ...] = ("mfcc",)
    ubm_components: int = 256
    tv_rank: int = 200
    classifier: str = "svm"
    predetector: bool = True
    seed: int = 0
    jobs: int = 1
    svm_c: float = 1.0
    ubm_iters: int = 10
    tv_iters: int = 5
    rbm_epochs: int = 5
    dbn_epochs: int = 30
    dbn_hidden: Tuple[int, ...] = (256, 256)
    manifest: Optional[str] = None
    models_dir: Optional[str] = None
    out: Optional[str] = None
    preset: Optional[str] = None


# The three full-corpus systems, plus a small configuration sized for
# laptop-scale experiments.
PRESETS = {
    "primary": dict(feature_set=("mfcc", "mfpc", "cosphasepc"),
                    ubm_components=1024, tv_rank=400,
                    classifier="svm", predetector=True),
    "contrastive1": dict(feature_set=("mfpc", "cosphasepc", "mwpc"),
                         ubm_components=1024, tv_rank=400,
                         classifier="svm", predetector=False),
    "contrastive2": dict(feature_set=("mfcc", "mfpc", "cosphasepc"),
                         ubm_components=256, tv_rank=200,
                         classifier="dbn", predetector=False),
    "desk": dict(feature_set=("mwpc",),
                 ubm_components=32, tv_rank=20,
                 classifier="svm", predetector=True),
}

_BOOL_TRUE = ("on", "true", "yes", "1")
_BOOL_FALSE = ("off", "false", "no", "0")


def parse_feature_list(text: str) -> Tuple[str, ...]:
    """Parse a comma-separated, case-insensitive feature list."""
    names = tuple(t.strip().lower() for t in text.split(",") if t.strip())
    if not names:
        raise ValueError("feature list is empty")
    for name in names:
        if name not in FEATURE_NAMES:
            raise ValueError(
                f"unknown feature {name!r}; choose from "
                f"{', '.join(FEATURE_NAMES)}")
    if len(set(names)) != len(names):
        raise ValueError("duplicate feature in list")
    return names


def _parse_bool(key, text):
    low = text.strip().lower()
    if low in _BOOL_TRUE:
        return True
    if low in _BOOL_FALSE:
        return False
    raise ValueError(f"bad boolean for {key}: {text!r}")


def _parse_int_tuple(text):
    return tuple(int(t.strip()) for t in text.split(",") if t.strip())


_PARSERS = {
    "feature_set": lambda v: parse_feature_list(v),
    "features": lambda v: parse_feature_list(v),
    "ubm_components": int,
    "tv_rank": int,
    "classifier": lambda v: v.strip().lower(),
    "predetector": lambda v: _parse_bool("predetector", v),
    "seed": int,
    "jobs": int,
    "svm_c": float,
    "ubm_iters": int,
    "tv_iters": int,
    "rbm_epochs": int,
    "dbn_epochs": int,
    "dbn_hidden": _parse_int_tuple,
    "manifest": str,
    "models_dir": str,
    "models": str,
    "out": str,
    "preset": lambda v: v.strip().lower(),
}
_ALIASES = {"features": "feature_set", "models": "models_dir"}


def parse_config_file(path) -> dict:
    """Read "key = value" lines; '#' starts a comment; keys must be known."""
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip().lower()
            value = value.strip()
            if key not in _PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                parsed = _PARSERS[key](value)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
            values[_ALIASES.get(key, key)] = parsed
    return values


def _validate(cfg: PipelineConfig) -> PipelineConfig:
    if not cfg.feature_set:
        raise ValueError("feature_set must not be empty")
    for name in cfg.feature_set:
        if name not in FEATURE_NAMES:
            raise ValueError(f"unknown feature {name!r}")
    if cfg.classifier not in ("svm", "dbn"):
        raise ValueError(f"classifier must be svm or dbn, got "
                         f"{cfg.classifier!r}")
    if cfg.ubm_components < 1 or cfg.tv_rank < 1:
        raise ValueError("ubm_components and tv_rank must be positive")
    if cfg.jobs < 1:
        raise ValueError("jobs must be >= 1")
    return cfg


def build_config(file_values: Optional[dict] = None,
                 flag_values: Optional[dict] = None) -> PipelineConfig:
    """Merge defaults, preset, config file, and flags into a validated
    PipelineConfig."""
    file_values = dict(file_values or {})
    flag_values = {k: v for k, v in (flag_values or {}).items()
                   if v is not None}
    preset = flag_values.get("preset", file_values.get("preset"))
    merged = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ValueError(
                f"unknown preset {preset!r}; choose from "
                f"{', '.join(sorted(PRESETS))}")
        merged.update(PRESETS[preset])
        merged["preset"] = preset
    merged.update(file_values)
    merged.update(flag_values)
    if preset is not None:
        merged["preset"] = preset
    known = {f.name for f in fields(PipelineConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return _validate(replace(PipelineConfig(), **merged))
