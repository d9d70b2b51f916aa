"""Command line entry point behavior."""

import os

import numpy as np
import pytest

from spoofguard.cli import main

from conftest import make_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("clicorpus")
    man_all, man_eval = make_corpus(str(root), 8, n_samples=4000, seed=7)
    return root, man_all, man_eval


BASE_FLAGS = ["--features", "mwpc", "--ubm-components", "4",
              "--tv-rank", "2", "--seed", "3"]


class TestHappyPath:
    def test_train_score_eval_project(self, corpus, tmp_path, capsys):
        root, man_all, man_eval = corpus
        models = tmp_path / "models"
        scores = tmp_path / "scores.tsv"
        table = tmp_path / "eer.tsv"
        proj = tmp_path / "proj.tsv"

        rc = main(["train", "--manifest", str(man_all),
                   "--models", str(models)] + BASE_FLAGS)
        assert rc == 0
        assert (models / "frontend.spgd").is_file()

        rc = main(["score", "--manifest", str(man_eval),
                   "--models", str(models), "--out", str(scores)]
                  + BASE_FLAGS)
        assert rc == 0
        assert scores.is_file()

        rc = main(["eval", "--scores", str(scores),
                   "--manifest", str(man_eval), "--out", str(table),
                   "--system", "tiny"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "tiny" in out and "All" in out
        assert table.is_file()

        rc = main(["project-lda", "--manifest", str(man_eval),
                   "--models", str(models), "--out", str(proj)]
                  + BASE_FLAGS)
        assert rc == 0
        assert len(proj.read_text().strip().split("\n")) == 8

    def test_config_file_merges_under_flags(self, corpus, tmp_path):
        root, man_all, _ = corpus
        conf = tmp_path / "run.conf"
        conf.write_text("features = mwpc\nubm_components = 4\n"
                        "tv_rank = 2\nseed = 11\n")
        models = tmp_path / "models_conf"
        rc = main(["train", "--manifest", str(man_all),
                   "--models", str(models), "--config", str(conf),
                   "--seed", "3"])
        assert rc == 0
        assert (models / "tv_mwpc.spgd").is_file()


class TestFailurePaths:
    def test_missing_manifest_reports_error(self, tmp_path, capsys):
        rc = main(["train", "--manifest", str(tmp_path / "ghost.tsv"),
                   "--models", str(tmp_path / "m")] + BASE_FLAGS)
        assert rc == 1
        assert "spoofguard: error:" in capsys.readouterr().err

    def test_bad_feature_list_reports_error(self, corpus, tmp_path, capsys):
        _, man_all, _ = corpus
        rc = main(["train", "--manifest", str(man_all),
                   "--models", str(tmp_path / "m"),
                   "--features", "mfcc,plp"])
        assert rc == 1
        assert "unknown feature" in capsys.readouterr().err

    def test_score_without_models_reports_error(self, corpus, tmp_path,
                                                capsys):
        _, _, man_eval = corpus
        rc = main(["score", "--manifest", str(man_eval),
                   "--models", str(tmp_path / "never_trained"),
                   "--out", str(tmp_path / "s.tsv")] + BASE_FLAGS)
        assert rc == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_preset_is_a_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["train", "--manifest", "x", "--models", "y",
                  "--preset", "warp9"])
        assert err.value.code == 2

    def test_predetector_flag_validated(self):
        with pytest.raises(SystemExit):
            main(["train", "--manifest", "x", "--models", "y",
                  "--predetector", "sometimes"])
