#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vtm/mining.hpp"

namespace vtm {

// Deterministic generator of pseudo-bilingual corpora in the supported
// scripts (Khmer text is ZWSP-segmented, Pashto uses Arabic letters). Used
// for the bundled demo data and for benchmarks; translation follows a fixed
// word-for-word dictionary with configurable drop/insert noise, so alignment
// models can actually learn the mapping.
struct SynthOptions {
  std::string language_pair = "km-en";
  int vocab_size = 800;
  int noise_vocab_size = 200;  // extra untranslated words for noise sentences
  int min_tokens = 4;
  int max_tokens = 12;
  double translation_drop = 0.03;
  double translation_insert = 0.03;
  double secondary_translation = 0.1;  // chance of the alternative translation
  std::uint64_t seed = 42;             // seeds the vocabulary, not the sampling
};

class SynthCorpus {
 public:
  explicit SynthCorpus(SynthOptions options);

  const SynthOptions& options() const { return options_; }

  struct VocabRange {
    int lo = 0, hi = 0;  // half-open id range
    double weight = 1.0;
  };

  // One parallel sentence pair over the full vocabulary, or over a weighted
  // mix of id ranges.
  std::pair<std::string, std::string> make_pair(std::mt19937_64& rng) const;
  std::pair<std::string, std::string> make_pair(std::mt19937_64& rng,
                                                const std::vector<VocabRange>& mix) const;
  std::vector<std::pair<std::string, std::string>> make_pairs(std::size_t n,
                                                              std::mt19937_64& rng) const;

  // A long untranslatable sentence drawn from the disjoint noise vocabulary.
  std::string make_noise_sentence(std::mt19937_64& rng, bool src_side, int min_tokens = 15,
                                  int max_tokens = 25) const;

  struct DocBuildResult {
    std::vector<DocumentPair> docs;
    std::vector<std::pair<std::string, std::string>> planted;  // the aligned sentences
  };

  // Assembles documents from consecutive sentence pairs, injecting noise
  // sentences independently on each side at the given per-slot rate.
  // Document text goes through split_sentences, exactly like JSONL ingestion.
  DocBuildResult make_documents(const std::vector<std::pair<std::string, std::string>>& pairs,
                                std::size_t sentences_per_doc, double noise_rate,
                                std::mt19937_64& rng) const;

  std::string src_word(int id) const { return src_vocab_[static_cast<std::size_t>(id)]; }
  std::string tgt_word(int id) const { return tgt_vocab_[static_cast<std::size_t>(id)]; }
  std::string render_src_sentence(const std::vector<int>& ids) const;
  std::string render_tgt_sentence(const std::vector<int>& ids) const;

 private:
  std::vector<int> sample_ids(std::mt19937_64& rng, const std::vector<VocabRange>& mix,
                              int min_tokens, int max_tokens) const;

  SynthOptions options_;
  std::string src_lang_, tgt_lang_;
  std::vector<std::string> src_vocab_, tgt_vocab_;        // aligned translations
  std::vector<std::string> src_noise_, tgt_noise_;        // untranslated words
  std::vector<int> secondary_;                             // alternative translation ids
};

}  // namespace vtm
