#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vtm/similarity.hpp"
#include "vtm/text_prep.hpp"
#include "vtm/word_align.hpp"

namespace vtm {

// A paired document with its monolingual initial segmentations (1-based ids).
struct DocumentPair {
  std::string doc_id;
  std::vector<std::string> src_segments;
  std::vector<std::string> tgt_segments;
};

// Total scorer over raw segment text, in [0,1].
using PairScorer = std::function<double(std::string_view, std::string_view)>;

struct MiningConfig {
  double sim_threshold = 0.5;    // greedy acceptance threshold
  int join_limit = 3;            // max initial segments joined per group side
  // Per-group log prior added to the DP objective (log C). Quality scores are
  // roughly length-invariant, so at log C = 0 a merged group outscores the
  // split of it into two groups of the same quality; 0.25 keeps sentence
  // granularity whenever per-sentence quality stays above exp(-0.25) ~ 0.78.
  double log_c = 0.25;
  double dp_min_pair_score = -1; // emit threshold for DP groups; <0 means sim_threshold
  double quality_threshold = 0.7;  // acceptance into the next training pool; >1 disables
  int iterations = 3;

  double effective_dp_min() const { return dp_min_pair_score < 0 ? sim_threshold : dp_min_pair_score; }
  void validate() const;
};

// One aligned group of a parallel segmentation; ranges are 1-based inclusive
// over initial segment ids.
struct SegmentGroup {
  int src_begin = 0, src_end = 0;
  int tgt_begin = 0, tgt_end = 0;
  double similarity = 0.0;  // scorer value of the joined texts
};

// A monotone, complete grouping of both segment lists. Groups are contiguous,
// strictly increasing, cover 1..a and 1..b exactly, and span at most
// join_limit segments per side.
struct Segmentation {
  std::vector<SegmentGroup> groups;
  double score = 0.0;  // total log objective
};

struct GreedyMatch {
  int src_index = 0, tgt_index = 0;  // 1-based
  double similarity = 0.0;
};

// Cursor-based threshold extraction from (1,1). On a hit both cursors
// advance; on a miss the cursor whose one-step lookahead scores higher
// advances (ties advance the source). Matches are strictly increasing on
// both sides.
std::vector<GreedyMatch> greedy_extract(const DocumentPair& doc, const PairScorer& scorer,
                                        double threshold);

// Best parallel segmentation under
//   sum over groups of [ log_c + log(max(scorer(src_group, tgt_group), 1e-12)) ].
// Ties prefer fewer groups, then lexicographically earliest boundaries.
// Returns nullopt when no complete monotone segmentation exists under the
// join limit (e.g. a > join_limit * b).
std::optional<Segmentation> dp_segment(const DocumentPair& doc, const PairScorer& scorer,
                                       const MiningConfig& config);

enum class Provenance { greedy, dp, provided };
std::string_view provenance_name(Provenance p);
Provenance provenance_from_name(std::string_view name);

struct MinedPair {
  std::string src, tgt;
  double similarity = 0.0;
  Provenance provenance = Provenance::greedy;
  int iteration = 1;
};

// Removes pairs whose (whitespace-normalized, case-folded) key was already
// seen; keeps the first occurrence, preserving order.
std::vector<MinedPair> dedup(std::vector<MinedPair> pairs);

struct MinedCorpus {
  std::vector<MinedPair> pairs;  // globally deduplicated
  std::size_t skipped_docs = 0;  // documents with an empty side
};

// Joins greedy matches and emitted DP groups per document (segment texts are
// whitespace-normalized; groups joined with single spaces), then applies
// global deduplication across all documents.
MinedCorpus mine_documents(const std::vector<DocumentPair>& docs, const PairScorer& scorer,
                           const MiningConfig& config, int iteration = 1);

struct IterationReport {
  int iteration = 0;
  TrainingStats forward_stats, reverse_stats;
  std::size_t mined_total = 0;   // pairs mined this iteration (before global dedup)
  std::size_t mined_new = 0;     // newly added to the corpus
  std::size_t accepted_new = 0;  // new pairs above quality_threshold, added to the pool
  std::size_t pool_size = 0;     // training pool after this iteration
};

struct IterativeMineResult {
  MinedCorpus corpus;  // pairs tagged with the iteration that first mined them
  std::vector<IterationReport> reports;
  TranslationTable forward, reverse;  // tables from the last iteration
  IdfWeights idf_src, idf_tgt;
};

// Alternates alignment-table training and mining: each iteration trains on
// seed + accepted pairs, rebuilds IDF from the pool, mines all documents, and
// accepts new pairs scoring >= quality_threshold into the pool.
IterativeMineResult iterative_mine(const std::vector<std::pair<std::string, std::string>>& seed_pairs,
                                   const std::vector<DocumentPair>& docs,
                                   const MiningConfig& config, const AlignerConfig& aligner_config,
                                   const Tokenizer& tokenize_src, const Tokenizer& tokenize_tgt);

}  // namespace vtm
