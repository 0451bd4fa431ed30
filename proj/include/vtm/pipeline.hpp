#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "vtm/corpus_io.hpp"
#include "vtm/mining.hpp"
#include "vtm/scoring.hpp"

namespace vtm {

// Carries the failing stage name so CLI errors stay attributable.
struct PipelineError : Error {
  PipelineError(const std::string& stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage(stage) {}
  std::string stage;
};

struct RerankSettings {
  double alpha = 0.0;
  int ngram_n = 1;
  double beta = 0.0;
  bool check_src = true;
  bool check_tgt = true;
};

// Submitted presets: km-en has alpha=0.2, n=2, beta=0.2; ps-en has alpha=0,
// n=1, beta=0.1.
RerankSettings rerank_preset(const std::string& language_pair);

struct PipelineConfig {
  std::string language_pair = "km-en";  // km-en | ps-en
  std::uint64_t seed = 1;

  std::string seed_corpus_path;
  std::string documents_path;
  std::string output_dir;
  std::vector<std::string> external_score_paths;

  AlignerConfig aligner;
  MiningConfig mining;

  TrainOptions scorer;
  NegativeSamplingConfig negatives;
  std::size_t max_scorer_positives = 20000;

  RerankSettings rerank;
  bool rerank_from_preset = true;  // take rerank from the language-pair preset

  std::uint64_t target_en_words = 5000000;
  bool subsample_inclusive = true;
  bool count_tokenized_words = false;  // default: raw whitespace tokens

  bool lowercase_english = true;

  std::string src_lang() const;
  std::string tgt_lang() const;
  void validate() const;  // value ranges plus referenced-path existence

  static PipelineConfig from_json_file(const std::string& path);
  std::string to_json() const;
};

struct PipelineResult {
  std::string output_dir;
  std::vector<std::pair<std::string, double>> stage_wall_ms;  // in execution order
  std::size_t merged_pairs = 0;
  std::size_t subsampled_pairs = 0;
  std::string final_tsv_path;
  std::string manifest_path;
};

// Runs tokenize -> mine -> merge -> train_scorer -> score -> normalize ->
// (ensemble with external scores, when configured) -> rerank -> subsample,
// writing every intermediate artifact plus a run manifest into output_dir.
// Identical config and seed produce byte-identical output TSVs.
PipelineResult run_pipeline(const PipelineConfig& config);

}  // namespace vtm
