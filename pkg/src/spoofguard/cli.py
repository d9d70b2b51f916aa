"""Command line interface.

Subcommands: train, score, eval, project-lda. Configuration values merge
in order: defaults, --preset expansion, --config file, explicit flags.
"""

import argparse
import sys

from .config import PRESETS, build_config, parse_config_file, \
    parse_feature_list
from .pipeline import cmd_eval, cmd_project_lda, cmd_score, cmd_train

__all__ = ["main"]


def _add_config_flags(sub):
    sub.add_argument("--config", metavar="PATH",
                     help="key = value configuration file")
    sub.add_argument("--preset", choices=sorted(PRESETS),
                     help="named system preset")
    sub.add_argument("--features", metavar="LIST",
                     help="comma-separated feature families "
                          "(mfcc,mfpc,cosphasepc,mwpc)")
    sub.add_argument("--seed", type=int, metavar="N")
    sub.add_argument("--jobs", type=int, metavar="N",
                     help="utterance-level worker threads")
    sub.add_argument("--ubm-components", type=int, metavar="N")
    sub.add_argument("--tv-rank", type=int, metavar="N")
    sub.add_argument("--classifier", choices=("svm", "dbn"))
    sub.add_argument("--predetector", choices=("on", "off"),
                     help="zero-run pre-detection before modeling")
    sub.add_argument("--svm-c", type=float, metavar="X",
                     help="SVM regularization trade-off")


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="spoofguard",
        description="Voice anti-spoofing toolkit: i-vector front end with "
                    "SVM or DBN scoring.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="fit all pipeline stages")
    _add_config_flags(p_train)
    p_train.add_argument("--manifest", required=True, metavar="PATH")
    p_train.add_argument("--models", required=True, metavar="DIR",
                         help="output directory for model containers")

    p_score = sub.add_parser("score", help="score a manifest")
    _add_config_flags(p_score)
    p_score.add_argument("--manifest", required=True, metavar="PATH")
    p_score.add_argument("--models", required=True, metavar="DIR")
    p_score.add_argument("--out", required=True, metavar="PATH",
                         help="score file to write")

    p_eval = sub.add_parser("eval", help="EER report from a score file")
    p_eval.add_argument("--scores", required=True, metavar="PATH")
    p_eval.add_argument("--manifest", required=True, metavar="PATH")
    p_eval.add_argument("--out", metavar="PATH",
                        help="tab-separated table to write")
    p_eval.add_argument("--system", default="system", metavar="NAME",
                        help="row label in the report")

    p_lda = sub.add_parser("project-lda",
                           help="export LDA projection of i-vectors")
    _add_config_flags(p_lda)
    p_lda.add_argument("--manifest", required=True, metavar="PATH")
    p_lda.add_argument("--models", required=True, metavar="DIR")
    p_lda.add_argument("--out", required=True, metavar="PATH")
    return parser


def _config_from_args(args) -> "PipelineConfig":
    file_values = parse_config_file(args.config) if args.config else {}
    flags = {
        "preset": args.preset,
        "seed": args.seed,
        "jobs": args.jobs,
        "ubm_components": args.ubm_components,
        "tv_rank": args.tv_rank,
        "classifier": args.classifier,
        "svm_c": args.svm_c,
        "manifest": args.manifest,
        "models_dir": args.models,
        "out": getattr(args, "out", None),
    }
    if args.features is not None:
        flags["feature_set"] = parse_feature_list(args.features)
    if args.predetector is not None:
        flags["predetector"] = args.predetector == "on"
    return build_config(file_values, flags)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cmd_train(_config_from_args(args))
        elif args.command == "score":
            cmd_score(_config_from_args(args))
        elif args.command == "eval":
            cmd_eval(args.scores, args.manifest, out=args.out,
                     system=args.system)
        elif args.command == "project-lda":
            cmd_project_lda(_config_from_args(args))
        return 0
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"spoofguard: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
