#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "vtm/corpus_io.hpp"
#include "vtm/pipeline.hpp"
#include "vtm/synth_corpus.hpp"

using namespace vtm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

ScoredPair sp(const std::string& src, const std::string& tgt, double final_score) {
  return {src, tgt, final_score, final_score, final_score};
}

// Writes a km-en demo corpus and returns a ready-to-run config.
PipelineConfig demo_setup(const TempDir& dir, int seed_pairs, int doc_pairs) {
  SynthOptions opt;
  opt.vocab_size = 150;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(101);
  const auto seed = synth.make_pairs(static_cast<std::size_t>(seed_pairs), rng);
  std::vector<PairRecord> records;
  for (const auto& [s, t] : seed) records.push_back({s, t});
  write_pairs(dir.file("seed.tsv"), records);

  const auto built =
      synth.make_documents(synth.make_pairs(static_cast<std::size_t>(doc_pairs), rng), 10, 0.1, rng);
  std::vector<std::pair<std::string, std::string>> raw_docs;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < built.docs.size(); ++i) {
    raw_docs.emplace_back(join_str(built.docs[i].src_segments, " "),
                          join_str(built.docs[i].tgt_segments, " "));
    ids.push_back(built.docs[i].doc_id);
  }
  write_document_pairs_jsonl(dir.file("docs.jsonl"), raw_docs, ids);

  PipelineConfig cfg;
  cfg.language_pair = "km-en";
  cfg.seed = 7;
  cfg.seed_corpus_path = dir.file("seed.tsv");
  cfg.documents_path = dir.file("docs.jsonl");
  cfg.output_dir = dir.file("out");
  cfg.aligner.em_iterations = 3;
  cfg.mining.iterations = 2;
  cfg.scorer.epochs = 10;
  cfg.rerank = rerank_preset("km-en");
  cfg.target_en_words = 2000;
  return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("corpus_io");

TEST_CASE("pair TSV round trip") {
  TempDir dir("vtm_io_test");
  const std::vector<PairRecord> pairs = {{"a b", "x y"}, {"c", "z"}};
  write_pairs(dir.file("p.tsv"), pairs);
  const auto loaded = read_pairs(dir.file("p.tsv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].src == "a b");
  CHECK(loaded[1].tgt == "z");
}

TEST_CASE("pair TSV accepts CRLF and reports malformed rows") {
  TempDir dir("vtm_io_crlf");
  {
    std::ofstream out(dir.file("p.tsv"), std::ios::binary);
    out << "a\tb\r\nc\td\r\n";
  }
  const auto loaded = read_pairs(dir.file("p.tsv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].tgt == "b");

  {
    std::ofstream out(dir.file("bad.tsv"), std::ios::binary);
    out << "a\tb\nonly-one-column\n";
  }
  try {
    read_pairs(dir.file("bad.tsv"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("scored TSV round trip") {
  TempDir dir("vtm_io_scored");
  const std::vector<ScoredPair> scored = {sp("a", "b", 0.75), sp("c", "d", 0.5)};
  write_scored(dir.file("s.tsv"), scored);
  const auto loaded = read_scored(dir.file("s.tsv"));
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].final_score == 0.75);
  CHECK(loaded[1].src == "c");
}

TEST_CASE("document JSONL preserves embedded newlines") {
  TempDir dir("vtm_io_docs");
  write_document_pairs_jsonl(dir.file("d.jsonl"), {{"line one\nline two. three", "x. y"}},
                             {"doc-0"});
  const auto result = read_document_pairs_jsonl(dir.file("d.jsonl"), "en", "en");
  REQUIRE(result.docs.size() == 1);
  CHECK(result.docs[0].src_segments ==
        std::vector<std::string>{"line one", "line two.", "three"});
  CHECK(result.docs[0].tgt_segments == std::vector<std::string>{"x.", "y"});
  CHECK(result.skipped_lines == 0);
}

TEST_CASE("unreadable document lines are counted, not fatal") {
  TempDir dir("vtm_io_badjson");
  {
    std::ofstream out(dir.file("d.jsonl"), std::ios::binary);
    out << R"({"doc_id":"a","src_text":"s.","tgt_text":"t."})" << "\n";
    out << "{not json}\n";
    out << R"({"doc_id":"b","src_text":"s."})" << "\n";  // missing field
  }
  const auto result = read_document_pairs_jsonl(dir.file("d.jsonl"), "en", "en");
  CHECK(result.docs.size() == 1);
  CHECK(result.skipped_lines == 2);
}

TEST_CASE("merge keeps provided pairs first and dedups") {
  const std::vector<PairRecord> provided = {{"a", "x"}, {"b", "y"}, {"a", "x"}};
  MinedCorpus mined;
  mined.pairs = {{"a", "x", 0.9, Provenance::greedy, 1},  // duplicate of provided
                 {"c", "z", 0.8, Provenance::dp, 2}};
  const auto merged = merge_corpora(provided, {&mined});
  REQUIRE(merged.size() == 3);
  CHECK(merged[0].provenance == Provenance::provided);
  CHECK(merged[2].src == "c");
  CHECK(merged[2].iteration == 2);

  CHECK(merge_corpora(provided, {}).size() == 2);  // just dedup
  MinedCorpus disjoint;
  disjoint.pairs = {{"d", "w", 0.7, Provenance::greedy, 1}};
  CHECK(merge_corpora(provided, {&mined, &disjoint}).size() == 4);
}

TEST_CASE("subsample walks the stated boundary rule") {
  const std::vector<ScoredPair> scored = {sp("s1", "one two three four", 0.9),
                                          sp("s2", "five six seven eight", 0.5),
                                          sp("s3", "nine ten eleven twelve", 0.1)};
  CHECK(subsample(scored, 8).size() == 2);   // 8 reached exactly; third excluded
  CHECK(subsample(scored, 7).size() == 2);   // second pair crosses, included
  CHECK(subsample(scored, 9).size() == 3);
  CHECK(subsample(scored, 0).empty());
  CHECK(subsample(scored, 1000).size() == 3);
  // exclusive mode drops the crossing pair
  CHECK(subsample(scored, 7, /*inclusive=*/false).size() == 1);
  CHECK(subsample(scored, 8, /*inclusive=*/false).size() == 2);
}

TEST_CASE("subsample output is a prefix of the score order") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredPair> scored;
    const std::size_t n = rng_below(rng, 30);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::string> words(1 + rng_below(rng, 10), "w");
      scored.push_back(sp("s", join_str(words, " "), rng_unit(rng)));
    }
    const std::uint64_t target = rng_below(rng, 120);
    const auto out = subsample(scored, target);

    std::vector<ScoredPair> sorted = scored;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const ScoredPair& a, const ScoredPair& b) {
                       return a.final_score > b.final_score;
                     });
    REQUIRE(out.size() <= sorted.size());
    std::uint64_t words = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      CHECK(out[i].tgt == sorted[i].tgt);  // prefix property
      CHECK(out[i].final_score == sorted[i].final_score);
      words += en_word_count(out[i], true);
    }
    if (out.size() < sorted.size()) {
      CHECK(words >= target);  // stopped because the budget was reached
    }
    if (!out.empty()) {
      CHECK(words - en_word_count(out.back(), true) < target);  // crossing pair rule
    }
  }
}

TEST_CASE("stats counts, duplicates, histogram") {
  CHECK(compute_stats({}).pair_count == 0);
  const std::vector<PairRecord> pairs = {{"a b", "x y z"}, {"a b", "x y z"}};
  const std::vector<double> scores = {0.96, 0.2};
  const CorpusStats stats = compute_stats(pairs, &scores);
  CHECK(stats.pair_count == 2);
  CHECK(stats.duplicate_rate == 0.5);
  CHECK(stats.en_words == 6);
  CHECK(stats.src_words == 4);
  CHECK(stats.has_scores);
  CHECK(stats.score_histogram[19] == 1);
  CHECK(stats.score_histogram[4] == 1);
  std::uint64_t total = 0;
  for (const auto b : stats.score_histogram) total += b;
  CHECK(total == stats.pair_count);
}

TEST_CASE("stats counts scale to full seed-corpus size") {
  std::vector<PairRecord> pairs(290051, PairRecord{"s", "t u"});
  const CorpusStats stats = compute_stats(pairs);
  CHECK(stats.pair_count == 290051);
  CHECK(stats.en_words == 2 * 290051);
}

TEST_CASE("pipeline validates before running") {
  PipelineConfig cfg;
  cfg.seed_corpus_path = "/nonexistent/seed.tsv";
  cfg.documents_path = "/nonexistent/docs.jsonl";
  cfg.output_dir = "/tmp/vtm_never";
  CHECK_THROWS_AS(run_pipeline(cfg), ConfigError);
  CHECK(!fs::exists("/tmp/vtm_never"));
}

TEST_CASE("pipeline errors carry the failing stage") {
  TempDir dir("vtm_pipe_err");
  PipelineConfig cfg = demo_setup(dir, 200, 50);
  {
    std::ofstream out(cfg.documents_path, std::ios::binary);
    out << "not json\n";  // readable file, zero usable documents
  }
  try {
    run_pipeline(cfg);
    FAIL("expected PipelineError");
  } catch (const PipelineError& e) {
    CHECK(e.stage == "mine");
  }
}

TEST_CASE("pipeline completes and reruns byte-identically") {
  TempDir dir("vtm_pipe_run");
  PipelineConfig cfg = demo_setup(dir, 300, 60);
  const PipelineResult first = run_pipeline(cfg);

  const std::vector<std::string> expected_stages = {"tokenize",     "mine",  "merge",
                                                    "train_scorer", "score", "normalize",
                                                    "rerank",       "subsample"};
  REQUIRE(first.stage_wall_ms.size() == expected_stages.size());
  for (std::size_t i = 0; i < expected_stages.size(); ++i) {
    CHECK(first.stage_wall_ms[i].first == expected_stages[i]);
  }
  CHECK(first.merged_pairs > 0);
  CHECK(first.subsampled_pairs > 0);
  for (const char* name :
       {"khmer_lexicon.jsonl", "langid.jsonl", "table.fwd.tsv", "table.rev.tsv", "mined.tsv",
        "merged.tsv", "scorer.json", "scores.raw.txt", "scores.norm.txt", "reranked.tsv",
        "subsampled.tsv", "stats.json", "manifest.json", "iteration_stats.json"}) {
    CHECK(fs::exists(fs::path(first.output_dir) / name));
  }

  const std::string final_once = slurp(first.final_tsv_path);
  const std::string reranked_once = slurp((fs::path(first.output_dir) / "reranked.tsv").string());
  cfg.output_dir = dir.file("out2");
  const PipelineResult second = run_pipeline(cfg);
  CHECK(slurp(second.final_tsv_path) == final_once);
  CHECK(slurp((fs::path(second.output_dir) / "reranked.tsv").string()) == reranked_once);
}

TEST_CASE("pipeline runs the ensemble stage when external scores are given") {
  TempDir dir("vtm_pipe_ext");
  PipelineConfig cfg = demo_setup(dir, 200, 40);
  PipelineResult probe = run_pipeline(cfg);  // to learn the merged pair count
  std::vector<double> external;
  for (std::size_t i = 0; i < probe.merged_pairs; ++i) {
    external.push_back(static_cast<double>(i % 17) / 17.0);
  }
  write_score_file(dir.file("external.txt"), external);
  cfg.external_score_paths = {dir.file("external.txt")};
  cfg.output_dir = dir.file("out_ext");
  const PipelineResult result = run_pipeline(cfg);
  bool saw_ensemble = false;
  for (const auto& [name, ms] : result.stage_wall_ms) saw_ensemble |= name == "ensemble";
  CHECK(saw_ensemble);
  CHECK(fs::exists(fs::path(result.output_dir) / "scores.ensembled.txt"));
}

TEST_CASE("config JSON round trip") {
  TempDir dir("vtm_cfg");
  PipelineConfig cfg = demo_setup(dir, 150, 30);
  cfg.mining.quality_threshold = 0.66;
  cfg.rerank.alpha = 0.3;
  {
    std::ofstream out(dir.file("config.json"), std::ios::binary);
    out << cfg.to_json() << "\n";
  }
  const PipelineConfig loaded = PipelineConfig::from_json_file(dir.file("config.json"));
  CHECK(loaded.language_pair == cfg.language_pair);
  CHECK(loaded.mining.quality_threshold == 0.66);
  CHECK(loaded.rerank.alpha == 0.3);
  CHECK(loaded.seed == cfg.seed);
  CHECK(loaded.target_en_words == cfg.target_en_words);
}

TEST_SUITE_END();
