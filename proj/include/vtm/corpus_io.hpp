#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vtm/mining.hpp"
#include "vtm/scoring.hpp"

namespace vtm {

struct PairRecord {
  std::string src, tgt;
};

// UTF-8 TSV with at least two columns; extra columns are ignored. CRLF input
// is accepted. Throws ParseError with the line number on malformed rows.
std::vector<PairRecord> read_pairs(const std::string& path);
// Two-column TSV, LF-terminated.
void write_pairs(const std::string& path, const std::vector<PairRecord>& pairs);

// Scored TSV: src<TAB>tgt<TAB>score. read_scored fills final_score (and
// norm_score) from the third column.
std::vector<ScoredPair> read_scored(const std::string& path);
// Final submission format: src<TAB>tgt<TAB>final_score.
void write_scored(const std::string& path, const std::vector<ScoredPair>& scored);

// One score per line.
std::vector<double> read_score_file(const std::string& path);
void write_score_file(const std::string& path, const std::vector<double>& scores);

// Document pairs as JSON lines: {"doc_id": ..., "src_text": ..., "tgt_text": ...}.
// Raw text; embedded newlines survive via JSON escapes. Unreadable lines are
// skipped and counted.
struct DocumentReadResult {
  std::vector<DocumentPair> docs;  // segmented with split_sentences
  std::size_t skipped_lines = 0;
};
DocumentReadResult read_document_pairs_jsonl(const std::string& path, const std::string& src_lang,
                                             const std::string& tgt_lang);
void write_document_pairs_jsonl(const std::string& path,
                                const std::vector<std::pair<std::string, std::string>>& raw_docs,
                                const std::vector<std::string>& doc_ids);

struct CorpusEntry {
  std::string src, tgt;
  double similarity = 0.0;
  Provenance provenance = Provenance::provided;
  int iteration = 0;
};

// Mined corpus TSV: src<TAB>tgt<TAB>similarity<TAB>provenance<TAB>iteration.
void write_mined_tsv(const std::string& path, const std::vector<MinedPair>& pairs);
std::vector<MinedPair> read_mined_tsv(const std::string& path);

// Concatenates provided pairs (provenance "provided") with mined slices,
// then deduplicates globally, keeping first occurrences.
std::vector<CorpusEntry> merge_corpora(const std::vector<PairRecord>& provided,
                                       const std::vector<const MinedCorpus*>& mined);

// Whitespace token count of the raw English side (tgt by default).
std::size_t en_word_count(const ScoredPair& pair, bool en_is_target);

// Takes pairs in stable descending final_score order while the cumulative
// English word count is below the target; the pair crossing the target is
// included (inclusive mode, the default) or dropped (exclusive mode).
std::vector<ScoredPair> subsample(const std::vector<ScoredPair>& scored,
                                  std::uint64_t target_en_words, bool inclusive = true,
                                  bool en_is_target = true);

struct CorpusStats {
  std::size_t pair_count = 0;
  std::uint64_t en_words = 0;   // whitespace tokens, English side
  std::uint64_t src_words = 0;  // whitespace tokens, source side
  double duplicate_rate = 0.0;  // fraction of pairs repeating an earlier key
  bool has_scores = false;
  std::array<std::uint64_t, 20> score_histogram{};  // over [0,1), 20 bins

  std::string to_json() const;
};

CorpusStats compute_stats(const std::vector<PairRecord>& pairs,
                          const std::vector<double>* final_scores = nullptr,
                          bool en_is_target = true);

}  // namespace vtm
