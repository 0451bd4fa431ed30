"""Smoke tests for the volctrans_miner extension module."""

import json
import math
import os
import subprocess
import sys
from pathlib import Path

import pytest

import volctrans_miner as vm

ZWSP = "​"
KHAN = "។"

SOURCE_DIR = Path(os.environ.get("VTM_SOURCE_DIR", Path(__file__).resolve().parents[2]))
DEMO = SOURCE_DIR / "data" / "demo"


def test_tokenize_english():
    ts = vm.tokenize("Hello, world!", "en")
    assert ts.tokens == ["Hello", ",", "world", "!"]
    assert vm.tokenize("pi is 3.14", "en").tokens == ["pi", "is", "3.14"]


def test_khmer_lexicon_and_viterbi():
    w1, w2 = "កន", "មា"
    lex = vm.build_khmer_lexicon([f"{w1}{ZWSP}{w2}"])
    assert len(lex) == 2
    assert vm.tokenize(f"{w1}{ZWSP}{w2}", "km", lex).tokens == [w1, w2]
    # no ZWSP: Viterbi against the lexicon
    assert vm.tokenize(w1 + w2, "km", lex).tokens == [w1, w2]
    with pytest.raises(ValueError):
        vm.tokenize("xx", "km")


def test_split_sentences():
    assert vm.split_sentences("A. B? C", "en") == ["A.", "B?", "C"]
    assert vm.split_sentences(f"ក{KHAN} ខ{KHAN}", "km") == [
        f"ក{KHAN}",
        f"ខ{KHAN}",
    ]


def test_langid_round_trip(tmp_path):
    en = [f"the quick brown fox {i}" for i in range(120)]
    km = [f"កខ{ZWSP}មា {i}" for i in range(120)]
    model = vm.train_langid([("en", en), ("km", km)])
    lang, conf = vm.identify_language(model, "the quick fox")
    assert lang == "en" and conf > 0.9
    assert vm.identify_language(model, "")[0] == "und"
    path = tmp_path / "langid.jsonl"
    model.save(str(path))
    loaded = vm.LangIdModel.load(str(path))
    assert loaded.languages == model.languages


def seq(tokens):
    ts = vm.TokenSequence()
    ts.tokens = list(tokens)
    return ts


def test_aligner_and_yisi():
    pairs = [(seq(["a"]), seq(["x"])), (seq(["a", "b"]), seq(["x", "y"]))]
    cfg = vm.AlignerConfig()
    cfg.em_iterations = 1
    cfg.diagonal_tension = 0.0
    cfg.null_prob = 0.0
    res = vm.train_aligner(pairs, cfg)
    assert res.forward.lookup("a", "x") == pytest.approx(0.75, abs=1e-12)
    assert res.forward_stats.training_pairs == 2

    links = vm.align_pair(res.forward, seq(["a", "b"]), seq(["x", "y"]))
    assert len(links) == 2

    idf = vm.compute_idf([seq(["a", "b"]), seq(["x", "y"])])
    score = vm.yisi2_score(res.forward, res.reverse, idf, idf, seq(["a"]), seq(["x"]))
    assert 0.0 <= score <= 1.0


def test_mining_with_python_scorer():
    doc = vm.DocumentPair()
    doc.doc_id = "d"
    doc.src_segments = ["s1", "s2"]
    doc.tgt_segments = ["t1", "t2"]

    def scorer(s, t):
        return 0.9 if s.replace("s", "") == t.replace("t", "") else 0.1

    matches = vm.greedy_extract(doc, scorer, 0.5)
    assert [(m.src_index, m.tgt_index) for m in matches] == [(1, 1), (2, 2)]

    cfg = vm.MiningConfig()
    segmentation = vm.dp_segment(doc, scorer, cfg)
    assert segmentation is not None
    assert [(g.src_begin, g.tgt_begin) for g in segmentation.groups] == [(1, 1), (2, 2)]

    corpus = vm.mine_documents([doc], scorer, cfg)
    assert {(p.src, p.tgt) for p in corpus.pairs} == {("s1", "t1"), ("s2", "t2")}


def test_negatives_and_rank_normalize():
    positives = [("a b c d", "p q r s"), ("e f g h", "t u v w")]
    cfg = vm.NegativeSamplingConfig()
    cfg.seed = 3
    negs = vm.generate_negatives(positives, cfg)
    assert any(n.mode == vm.NegativeMode.swap_or_copy for n in negs)
    again = vm.generate_negatives(positives, cfg)
    assert [(n.src, n.tgt) for n in negs] == [(n.src, n.tgt) for n in again]

    assert vm.rank_normalize([0.9, 0.7, 0.8, 0.1]) == [0.75, 0.25, 0.5, 0.0]


def test_rerank_and_ensemble():
    scored = [
        vm.ScoredPair("the same one", "t1", final_score=0.9),
        vm.ScoredPair("the same one", "t2", final_score=0.6),
    ]
    out = vm.rerank_ngram_coverage(scored, 2, 0.2)
    assert out[0].final_score == 0.9
    assert out[1].final_score == pytest.approx(0.6 * 0.8, abs=0)

    norm = vm.rank_normalize([3.0, 1.0, 2.0, 0.5])
    assert vm.ensemble([norm, norm]) == norm
    reversed_norm = vm.rank_normalize([-3.0, -1.0, -2.0, -0.5])
    for v in vm.ensemble([norm, reversed_norm]):
        assert math.isclose(v, 3.0 / 8.0, abs_tol=1e-12)


def test_subsample_boundary():
    scored = [
        vm.ScoredPair("s1", "one two three four", final_score=0.9),
        vm.ScoredPair("s2", "five six seven eight", final_score=0.5),
        vm.ScoredPair("s3", "nine ten eleven twelve", final_score=0.1),
    ]
    assert len(vm.subsample(scored, 8)) == 2
    assert len(vm.subsample(scored, 7)) == 2
    assert len(vm.subsample(scored, 0)) == 0


def test_stats_and_io(tmp_path):
    pairs = [vm.PairRecord("a b", "x y z"), vm.PairRecord("a b", "x y z")]
    stats = vm.compute_stats(pairs, [0.9, 0.2])
    assert stats.pair_count == 2
    assert stats.duplicate_rate == 0.5
    assert sum(stats.score_histogram) == 2

    path = tmp_path / "pairs.tsv"
    vm.write_pairs(str(path), pairs)
    assert [p.src for p in vm.read_pairs(str(path))] == ["a b", "a b"]


@pytest.mark.skipif(not DEMO.exists(), reason="bundled demo data not found")
def test_pipeline_runs_on_demo_data(tmp_path):
    config = json.loads((DEMO / "config.km-en.json").read_text())
    config["paths"]["seed_corpus"] = str(DEMO / "seed.km-en.tsv")
    config["paths"]["documents"] = str(DEMO / "docs.km-en.jsonl")
    config["paths"]["output_dir"] = str(tmp_path / "out")
    config["mining"]["iterations"] = 1  # smoke-sized
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))

    result = vm.run_pipeline(str(config_path))
    assert result.subsampled_pairs > 0
    stage_names = [name for name, _ in result.stage_wall_ms]
    assert stage_names == [
        "tokenize",
        "mine",
        "merge",
        "train_scorer",
        "score",
        "normalize",
        "rerank",
        "subsample",
    ]
    assert Path(result.final_tsv_path).exists()
    manifest = json.loads(Path(result.manifest_path).read_text())
    assert manifest["format"] == "run-manifest"


@pytest.mark.skipif("VTM_CLI" not in os.environ, reason="CLI path not provided")
class TestCli:
    def run(self, *args, stdin=None):
        return subprocess.run(
            [os.environ["VTM_CLI"], *args],
            input=stdin,
            capture_output=True,
            text=True,
        )

    def test_tokenize_subcommand(self):
        proc = self.run("textprep", "tokenize", "--lang", "en", stdin="Hello, world!\n")
        assert proc.returncode == 0
        assert proc.stdout == "Hello , world !\n"

    def test_split_subcommand(self):
        proc = self.run("textprep", "split", "--lang", "en", stdin="A. B? C\n")
        assert proc.returncode == 0
        assert proc.stdout.splitlines() == ["A.", "B?", "C"]

    def test_normalize_subcommand(self, tmp_path):
        scores = tmp_path / "raw.txt"
        scores.write_text("0.9\n0.7\n0.8\n0.1\n")
        proc = self.run("score", "normalize", "--scores", str(scores))
        assert proc.returncode == 0
        assert proc.stdout.splitlines() == ["0.75", "0.25", "0.5", "0"]

    def test_stats_subcommand(self, tmp_path):
        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("a\tx y\nb\tz\n")
        proc = self.run("stats", "--pairs", str(pairs))
        assert proc.returncode == 0
        stats = json.loads(proc.stdout)
        assert stats["pair_count"] == 2
        assert stats["en_words"] == 3

    def test_error_exit_code(self, tmp_path):
        proc = self.run("stats", "--pairs", str(tmp_path / "missing.tsv"))
        assert proc.returncode != 0
        assert "error" in proc.stderr

    @pytest.mark.skipif(not DEMO.exists(), reason="bundled demo data not found")
    def test_full_stage_chain(self, tmp_path):
        """mine -> score train/run -> normalize -> rerank -> subsample -> ensemble."""
        seed_lines = (DEMO / "seed.km-en.tsv").read_text().splitlines()[:800]
        seed = tmp_path / "seed.tsv"
        seed.write_text("\n".join(seed_lines) + "\n")
        docs = tmp_path / "docs.jsonl"
        docs.write_text(
            "\n".join((DEMO / "docs.km-en.jsonl").read_text().splitlines()[:40]) + "\n"
        )

        mined_dir = tmp_path / "mined"
        proc = self.run(
            "mine", "run", "--docs", str(docs), "--seed", str(seed),
            "--iterations", "1", "--threshold", "0.5", "--out", str(mined_dir),
            "--em-iters", "3",
        )
        assert proc.returncode == 0, proc.stderr
        mined_tsv = mined_dir / "mined.tsv"
        assert mined_tsv.exists()
        mined_rows = mined_tsv.read_text().splitlines()
        assert len(mined_rows) > 50
        assert all(len(r.split("\t")) == 5 for r in mined_rows)

        lex = tmp_path / "lex.jsonl"
        src_txt = tmp_path / "src.txt"
        src_txt.write_text("\n".join(l.split("\t")[0] for l in seed_lines) + "\n")
        tgt_txt = tmp_path / "tgt.txt"
        tgt_txt.write_text("\n".join(l.split("\t")[1] for l in seed_lines) + "\n")
        assert self.run("textprep", "lexicon", "--input", str(src_txt), "--out", str(lex)).returncode == 0
        langid = tmp_path / "langid.jsonl"
        assert (
            self.run(
                "textprep", "langid-train",
                "--samples", f"km={src_txt}", f"en={tgt_txt}", "--out", str(langid),
            ).returncode
            == 0
        )

        model = tmp_path / "scorer.json"
        table_args = [
            "--fwd", str(mined_dir / "table.fwd.tsv"), "--rev", str(mined_dir / "table.rev.tsv"),
            "--idf-src", str(mined_dir / "idf.src.tsv"), "--idf-tgt", str(mined_dir / "idf.tgt.tsv"),
            "--langid", str(langid), "--lexicon", str(lex),
        ]
        proc = self.run(
            "score", "train", "--seed-pairs", str(seed), *table_args,
            "--epochs", "8", "--max-positives", "300", "--out", str(model),
        )
        assert proc.returncode == 0, proc.stderr

        raw = tmp_path / "raw.txt"
        proc = self.run(
            "score", "run", "--pairs", str(mined_tsv), "--model", str(model),
            *table_args, "--output", str(raw),
        )
        assert proc.returncode == 0, proc.stderr
        assert len(raw.read_text().splitlines()) == len(mined_rows)

        norm = tmp_path / "norm.txt"
        assert self.run("score", "normalize", "--scores", str(raw), "--output", str(norm)).returncode == 0

        scored = tmp_path / "scored.tsv"
        scored.write_text(
            "".join(
                f"{row.split(chr(9))[0]}\t{row.split(chr(9))[1]}\t{score}\n"
                for row, score in zip(mined_rows, norm.read_text().splitlines())
            )
        )
        reranked = tmp_path / "reranked.tsv"
        proc = self.run(
            "score", "rerank", "--in", str(scored), "--langid", str(langid),
            "--lexicon", str(lex), "--alpha", "0.2", "--n", "2", "--beta", "0.2",
            "--out", str(reranked),
        )
        assert proc.returncode == 0, proc.stderr

        final = tmp_path / "final.tsv"
        proc = self.run(
            "subsample", "--in", str(reranked), "--target-en-words", "300", "--out", str(final)
        )
        assert proc.returncode == 0, proc.stderr
        stats = json.loads(self.run("stats", "--pairs", str(final)).stdout)
        assert stats["en_words"] >= 300
        assert stats["pair_count"] > 0

        # ensembling a list with itself is the identity
        avg = tmp_path / "avg.txt"
        assert self.run("score", "ensemble", str(norm), str(norm), "--output", str(avg)).returncode == 0
        assert avg.read_text() == norm.read_text()

        # external score validation: aligned file passes, truncated file fails
        assert (
            self.run("score", "load-external", "--scores", str(raw), "--pairs", str(mined_tsv)).returncode
            == 0
        )
        short = tmp_path / "short.txt"
        short.write_text("0.5\n")
        proc = self.run("score", "load-external", "--scores", str(short), "--pairs", str(mined_tsv))
        assert proc.returncode != 0

    @pytest.mark.skipif(not DEMO.exists(), reason="bundled demo data not found")
    def test_align_and_sim_round_trip(self, tmp_path):
        src = tmp_path / "src.txt"
        tgt = tmp_path / "tgt.txt"
        seed = (DEMO / "seed.km-en.tsv").read_text().splitlines()[:300]
        src.write_text("\n".join(line.split("\t")[0] for line in seed) + "\n")
        tgt.write_text("\n".join(line.split("\t")[1] for line in seed) + "\n")
        fwd, rev = tmp_path / "fwd.tsv", tmp_path / "rev.tsv"
        proc = self.run(
            "align", "train", "--src", str(src), "--tgt", str(tgt),
            "--src-lang", "km", "--tgt-lang", "en", "--iters", "3",
            "--out-fwd", str(fwd), "--out-rev", str(rev),
        )
        assert proc.returncode == 0, proc.stderr
        assert fwd.exists() and rev.exists()

        idf_src, idf_tgt = tmp_path / "idf_src.tsv", tmp_path / "idf_tgt.tsv"
        lex = tmp_path / "lex.jsonl"
        assert self.run("textprep", "lexicon", "--input", str(src), "--out", str(lex)).returncode == 0
        assert (
            self.run(
                "sim", "idf", "--input", str(src), "--lang", "km",
                "--lexicon", str(lex), "--out", str(idf_src),
            ).returncode
            == 0
        )
        assert (
            self.run(
                "sim", "idf", "--input", str(tgt), "--lang", "en",
                "--lowercase", "--out", str(idf_tgt),
            ).returncode
            == 0
        )

        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("\n".join(seed[:20]) + "\n")
        proc = self.run(
            "sim", "score", "--pairs", str(pairs), "--fwd", str(fwd), "--rev", str(rev),
            "--idf-src", str(idf_src), "--idf-tgt", str(idf_tgt), "--lexicon", str(lex),
        )
        assert proc.returncode == 0, proc.stderr
        values = [float(line) for line in proc.stdout.splitlines()]
        assert len(values) == 20
        assert all(0.0 <= v <= 1.0 for v in values)
        # true pairs under their own tables score high
        assert sum(1 for v in values if v >= 0.5) >= 18
