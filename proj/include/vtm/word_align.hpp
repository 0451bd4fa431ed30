#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vtm/text_prep.hpp"
#include "vtm/util.hpp"

namespace vtm {

struct AlignerConfig {
  int em_iterations = 5;
  // Fixed diagonal tension lambda of the reparameterized alignment prior
  // delta(i,j,m,n) = exp(-lambda * |i/m - j/n|); 0 gives plain Model 1.
  double diagonal_tension = 4.0;
  double null_prob = 0.08;   // p0, mass reserved for the null word
  double prob_floor = 1e-9;  // entries below this are pruned after training

  void validate() const;
};

struct TrainingStats {
  std::vector<double> log_likelihood;  // one value per EM iteration
  double final_perplexity = 0.0;
  std::size_t table_entries = 0;  // nonzero entries after pruning
  std::size_t training_pairs = 0;
  std::size_t skipped_pairs = 0;  // pairs with an empty side
};

// Sparse conditional word-translation table t(col | row). For the forward
// direction rows are source-language tokens; for the reverse direction rows
// are target-language tokens. Rows are normalized to sum to 1 and include
// the reserved null token.
class TranslationTable {
 public:
  enum class Direction { forward, reverse };
  static constexpr std::string_view kNullToken = "<NULL>";

  Direction direction = Direction::forward;
  // Carried from training so align_pair can rebuild the alignment prior.
  double diagonal_tension = 0.0;
  double null_prob = 0.0;

  double lookup(std::string_view row_token, std::string_view col_token) const;
  double row_max(std::string_view row_token) const;  // 0 if the row is absent
  double row_max_by_id(int row) const { return row_max_[static_cast<std::size_t>(row)]; }
  bool has_row(std::string_view row_token) const;
  std::size_t size() const;        // stored entries
  std::size_t row_count() const { return rows_.size(); }

  // TSV persistence: row<TAB>col<TAB>prob, sorted by (row, -prob, col).
  void save_tsv(const std::string& path) const;
  static TranslationTable load_tsv(const std::string& path,
                                   Direction direction = Direction::forward);

  // Construction interface used by training and deserialization.
  int intern_row(std::string_view token);
  int intern_col(std::string_view token);
  int find_row(std::string_view token) const;  // -1 if absent
  int find_col(std::string_view token) const;
  void set_prob(int row, int col, double p);
  void finalize();  // sorts rows by column id and caches row maxima

  const std::vector<std::string>& row_tokens() const { return row_tokens_; }
  const std::vector<std::string>& col_tokens() const { return col_tokens_; }
  const std::vector<std::pair<int, double>>& row_entries(int row) const { return rows_[row]; }
  double lookup_ids(int row, int col) const;

 private:
  std::unordered_map<std::string, int> row_ids_, col_ids_;
  std::vector<std::string> row_tokens_, col_tokens_;
  std::vector<std::vector<std::pair<int, double>>> rows_;  // sorted by col id
  std::vector<double> row_max_;
};

struct AlignerResult {
  TranslationTable forward;
  TranslationTable reverse;
  TrainingStats forward_stats;
  TrainingStats reverse_stats;
};

// Trains forward and reverse tables by EM over the tokenized pairs. The two
// directions are trained independently; pairs with an empty side are skipped
// and counted. Throws Error on an empty pair list.
AlignerResult train_aligner(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                            const AlignerConfig& config);

// Per-target-token argmax alignment. Links are 1-based
// (src_index, tgt_index); src_index 0 denotes the null word. Ties resolve
// toward the smaller source index, with null counting as smallest.
std::vector<std::pair<int, int>> align_pair(const TranslationTable& forward,
                                            const TokenSequence& src, const TokenSequence& tgt);

// Stored probability, 0.0 for absent pairs.
double lookup(const TranslationTable& table, std::string_view row_token,
              std::string_view col_token);

}  // namespace vtm
