#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vtm/similarity.hpp"
#include "vtm/text_prep.hpp"
#include "vtm/word_align.hpp"

namespace vtm {

enum class NegativeMode { shuffle_misalign, truncate_to_3, shuffle_order, swap_or_copy };
std::string_view negative_mode_name(NegativeMode m);

struct LabeledPair {
  std::string src, tgt;
  NegativeMode mode;
};

// Per-mode multipliers: each active mode emits round(multiplier * N)
// negatives (mode swap_or_copy emits a swapped pair plus both same-same
// copies per unit). Generation is bit-reproducible under a fixed seed.
struct NegativeSamplingConfig {
  double shuffle_misalign = 1.0;
  double truncate_to_3 = 1.0;
  double shuffle_order = 1.0;
  double swap_or_copy = 1.0;
  std::uint64_t seed = 1;

  void validate() const;  // multipliers >= 0, at least one active
};

// Builds negatives from positives using the four corruption modes:
//   shuffle_misalign: re-pair sources and targets by a random derangement
//   truncate_to_3:    cut one or both sides to their first 3 tokens
//   shuffle_order:    permute the token order of one or both sides (never
//                     the identity permutation)
//   swap_or_copy:     (tgt,src) plus the copies (src,src) and (tgt,tgt)
// Throws Error when shuffle_misalign is active with fewer than 2 positives.
std::vector<LabeledPair> generate_negatives(
    const std::vector<std::pair<std::string, std::string>>& positives,
    const NegativeSamplingConfig& config);

inline constexpr int kNumFeatures = 11;
extern const std::array<const char*, kNumFeatures> kFeatureNames;

struct FeatureVector {
  std::array<double, kNumFeatures> values{};
  bool valid = false;
};

// Everything feature extraction needs. Sides are truncated to max_tokens
// tokens before any feature is computed.
struct FeatureContext {
  const TranslationTable* forward = nullptr;
  const TranslationTable* reverse = nullptr;
  const IdfWeights* idf_src = nullptr;
  const IdfWeights* idf_tgt = nullptr;
  const LangIdModel* langid = nullptr;
  std::string src_lang, tgt_lang;
  Tokenizer tokenize_src, tokenize_tgt;
  std::size_t max_tokens = 128;
};

FeatureVector extract_features(const std::string& src, const std::string& tgt,
                               const FeatureContext& ctx);

struct TrainOptions {
  double learning_rate = 0.1;
  int epochs = 30;
  std::uint64_t seed = 1;
  double l2 = 1e-4;
  double holdout_fraction = 0.1;
};

// Logistic regression over the fixed feature set. Standardization is folded
// into the stored weights, so inference is sigmoid(w . x + b) on raw values.
struct ScorerModel {
  std::vector<std::string> feature_names;
  std::vector<double> weights;
  double bias = 0.0;

  struct Metadata {
    int epochs = 0;
    double learning_rate = 0.0;
    std::uint64_t seed = 0;
    double holdout_accuracy = 0.0;
    double holdout_auc = 0.0;
    std::size_t train_examples = 0;
    std::size_t holdout_examples = 0;
  } meta;

  double predict(const FeatureVector& fv) const;  // in (0,1); 0.0 for invalid

  void save_json(const std::string& path) const;
  static ScorerModel load_json(const std::string& path);
};

// SGD on logistic loss; deterministic under a fixed seed. Reports held-out
// accuracy and AUC in the metadata. Throws Error when a class is empty.
ScorerModel train_scorer(const std::vector<FeatureVector>& positives,
                         const std::vector<FeatureVector>& negatives, const TrainOptions& options);

// Trapezoidal (tie-aware) area under the ROC curve.
double auc_score(const std::vector<double>& scores, const std::vector<int>& labels);

// Sigmoid scores for each pair; invalid pairs (an empty side) score 0.0.
std::vector<double> score_pairs(const ScorerModel& model,
                                const std::vector<std::pair<std::string, std::string>>& pairs,
                                const FeatureContext& ctx);

// Rank normalization: score_i = 1 - rank_i / N over a stable descending
// sort (ties keep input order). Output is aligned with the input.
std::vector<double> rank_normalize(const std::vector<double>& raw_scores);

struct ScoredPair {
  std::string src, tgt;
  double raw_score = 0.0;
  double norm_score = 0.0;
  double final_score = 0.0;
};

// Multiplies final_score by (1 - alpha) for pairs where an enabled side is
// not identified as its expected language. Returns the discounted count.
std::size_t rerank_langid(std::vector<ScoredPair>& scored, const LangIdModel& model,
                          const std::string& expected_src_lang, const std::string& expected_tgt_lang,
                          double alpha, bool check_src = true, bool check_tgt = true);

// Running pool of already-seen source-side n-grams.
struct NgramPool {
  int n = 2;
  std::unordered_set<std::string> seen;

  // Token n-grams; sequences shorter than n contribute one whole-sequence gram.
  static std::vector<std::string> grams(const std::vector<std::string>& tokens, int n);
  bool contains_all(const std::vector<std::string>& grams) const;
  void insert(const std::vector<std::string>& grams);
};

// Scans pairs in descending final_score order (stable on ties); a pair whose
// source n-grams are all already pooled is discounted by (1 - beta); its
// grams are pooled afterwards either way. Returns the discounted count.
// Without a tokenizer, sources split on whitespace/zero-width-space units.
std::size_t rerank_ngram_coverage(std::vector<ScoredPair>& scored, int n, double beta,
                                  const Tokenizer& tokenize_src = nullptr);

// Elementwise mean of K aligned score lists. Throws Error on length mismatch.
std::vector<double> ensemble(const std::vector<std::vector<double>>& score_lists);

// One real per line, aligned with the pair file. Throws ParseError with the
// line number on non-numeric lines and Error on a count mismatch.
std::vector<double> load_external_scores(const std::string& path, std::size_t expected_count);

}  // namespace vtm
