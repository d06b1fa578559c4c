import filecmp

import numpy as np
import pytest

from hostquality import evaluate
from hostquality.corpus import derive_quality_class, read_labels
from hostquality.errors import AlignmentError, ConfigError, DataError, FormatError
from hostquality.features import FeatureMatrix
from hostquality.pipeline import FusionSpec, fuse, gen_synthetic, run_task
from hostquality.pipeline.config import make_config, read_config_file


def block(hosts, width, tag, offset=0.0):
    vals = np.arange(len(hosts) * width, dtype=float).reshape(len(hosts), width) + offset
    return FeatureMatrix(hosts, [f"{tag}{j}" for j in range(width)], vals)


HOSTS = ("a.org", "b.org", "c.org")


class TestFusion:
    def test_widths(self):
        blocks = {"H": block(HOSTS, 50, "h"), "C": block(HOSTS, 7, "c"), "T": block(HOSTS, 500, "t")}
        assert fuse(blocks, "H").shape == (3, 50)
        X = fuse(blocks, "HCT")
        assert X.shape == (3, 50 + 7 + 500) and len(set(X.columns)) == 557

    def test_canonical_block_order(self):
        blocks = {"H": block(HOSTS, 2, "h"), "T": block(HOSTS[::-1], 3, "t")}
        a, b = fuse(blocks, "TH"), fuse(blocks, "HT")
        assert a.columns == b.columns and np.array_equal(a.values, b.values)
        assert a.columns[0] == "H:h0" and a.columns[-1] == "T:t2"
        # T rows were stored reversed; fusion realigns them by host
        assert a.values[0, 2:].tolist() == blocks["T"].values[2].tolist()

    def test_presets_parse(self):
        for name in ("L", "H", "C", "T", "HCT", "LHCT", "LH"):
            assert FusionSpec.parse(name).name == name
        with pytest.raises(ConfigError):
            FusionSpec.parse("HX")
        with pytest.raises(ConfigError):
            FusionSpec.parse("HH")

    def test_alignment_errors(self):
        blocks = {"H": block(HOSTS, 2, "h"), "C": block(HOSTS[:2], 2, "c")}
        with pytest.raises(AlignmentError, match="c.org"):
            fuse(blocks, "HC")
        with pytest.raises(AlignmentError, match="z.org"):
            fuse(blocks, "H", hosts=["a.org", "z.org"])
        with pytest.raises(ConfigError):
            fuse(blocks, "T")

    def test_rows_follow_requested_hosts(self):
        blocks = {"H": block(HOSTS, 2, "h")}
        X = fuse(blocks, "H", hosts=["c.org", "a.org"])
        assert X.hosts == ("c.org", "a.org")
        assert X.values.tolist() == [[4.0, 5.0], [0.0, 1.0]]


class TestSynthetic:
    def test_same_seed_same_bytes(self, tmp_path):
        a = gen_synthetic(60, 0.7, 3).write(tmp_path / "a")
        b = gen_synthetic(60, 0.7, 3).write(tmp_path / "b")
        names = sorted(p.name for p in a.iterdir())
        match, mismatch, errors = filecmp.cmpfiles(a, b, names, shallow=False)
        assert not mismatch and not errors and len(match) == 10

    def test_labels_match_classes(self, tmp_path):
        corpus = gen_synthetic(80, 1.0, 1)
        out = corpus.write(tmp_path)
        labels = read_labels(out / "labels.tsv")
        assert len(labels) == 80
        for h, c in zip(corpus.hosts, corpus.classes):
            assert derive_quality_class(labels[h]) == c
        assert set(corpus.classes) <= {0, 3, 4, 5, 7}
        assert set(corpus.train).isdisjoint(corpus.test)
        assert len(corpus.train) == 40

    def test_argument_checks(self):
        with pytest.raises(ConfigError):
            gen_synthetic(10, 0.5, 0)
        with pytest.raises(ConfigError):
            gen_synthetic(50, 1.5, 0)


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    return gen_synthetic(120, 1.0, 5).write(root)


def config(corpus_dir, out_dir, **overrides):
    values = read_config_file(corpus_dir / "run.conf")
    values.update(out_dir=str(out_dir), n_trees=15)
    values.update(overrides)
    return make_config(values)


class TestRun:
    def test_outputs_and_report(self, small_corpus, tmp_path):
        ranked, report = run_task(config(small_corpus, tmp_path, fusion="HC"))
        assert {p.name for p in tmp_path.iterdir()} == {"ranking.tsv", "report.txt", "timing.txt"}
        assert len(ranked) == 60
        text = (tmp_path / "report.txt").read_text()
        assert "fusion=HC" in text and "dim_fused=58" in text and "ndcg=" in text
        assert "out_dir" not in text
        scores = [r.score for r in ranked]
        assert scores == sorted(scores, reverse=True)
        assert all(0.0 <= s <= 9.0 for s in scores)
        grades = evaluate.ranked_grades(evaluate.read_ranking(tmp_path / "ranking.tsv"),
                                        evaluate.read_qrels(small_corpus / "qrels.tsv"))
        assert report["ndcg"] == evaluate.ndcg(grades)

    def test_single_class_training(self, small_corpus, tmp_path):
        labels = small_corpus / "labels.tsv"
        spam_only = tmp_path / "labels.tsv"
        lines = []
        for line in labels.read_text().splitlines():
            if line.startswith("#"):
                continue
            host = line.split("\t")[0]
            lines.append(f"{host}\tspam\t0\t0")
        spam_only.write_text("\n".join(lines) + "\n")
        ranked, report = run_task(config(small_corpus, tmp_path / "out", labels=str(spam_only), fusion="H"))
        assert {r.score for r in ranked} == {0.0}
        assert 0.0 < report["ndcg"] <= 1.0

    def test_facet_task(self, small_corpus, tmp_path):
        ranked, report = run_task(config(
            small_corpus, tmp_path, fusion="H", task="facet:spam", qrels=""))
        assert all(0.0 <= r.score <= 1.0 for r in ranked)
        assert report["dims"]["classes"] == "0,1"
        assert report["ndcg"] > 0.5

    def test_tfidf_selection_ignores_test_labels(self, small_corpus, tmp_path):
        base = run_task(config(small_corpus, tmp_path / "a", fusion="T", k=20))[1]["columns"]
        test_hosts = set((small_corpus / "test.txt").read_text().split())
        mutated = tmp_path / "labels.tsv"
        out = []
        for line in (small_corpus / "labels.tsv").read_text().splitlines():
            host = line.split("\t")[0].removeprefix("www.")
            if host in test_hosts:
                line = "\t".join([line.split("\t")[0], "spam", "0", "0"])
            out.append(line)
        mutated.write_text("\n".join(out) + "\n")
        again = run_task(config(small_corpus, tmp_path / "b", fusion="T", k=20,
                                labels=str(mutated)))[1]["columns"]
        assert base == again
        assert (tmp_path / "a" / "ranking.tsv").read_bytes() == (tmp_path / "b" / "ranking.tsv").read_bytes()

    def test_stage_errors_named(self, small_corpus, tmp_path):
        bad = tmp_path / "termfreq.tsv"
        bad.write_text("a.org\tx\tmany\n")
        with pytest.raises(FormatError, match=r"^\[textfeat\]"):
            run_task(config(small_corpus, tmp_path / "out", fusion="T", termfreq=str(bad)))

    def test_partial_outputs_removed(self, small_corpus, tmp_path, monkeypatch):
        from hostquality.pipeline import run as run_mod

        def boom(*args, **kwargs):
            raise DataError("qrels unusable")

        monkeypatch.setattr(run_mod, "ndcg_table", boom)
        out = tmp_path / "out"
        with pytest.raises(DataError, match=r"^\[eval\]"):
            run_task(config(small_corpus, out, fusion="H"))
        assert not any(out.iterdir())

    def test_config_validation(self, small_corpus, tmp_path):
        with pytest.raises(ConfigError, match="seed"):
            run_task(config(small_corpus, tmp_path, seed=None))
        with pytest.raises(ConfigError, match="not found"):
            run_task(config(small_corpus, tmp_path, edges=str(tmp_path / "nope.tsv")))
        with pytest.raises(ConfigError):
            run_task(config(small_corpus, tmp_path, task="ranking"))
        with pytest.raises(ConfigError, match="unknown config key"):
            make_config({"colour": "red"})
