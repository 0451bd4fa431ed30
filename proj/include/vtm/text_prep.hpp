#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vtm/util.hpp"

namespace vtm {

// A tokenized sentence. Tokens are never empty and never contain internal
// whitespace; concatenating them reproduces the input minus whitespace (and,
// for Khmer, minus zero-width spaces).
struct TokenSequence {
  std::vector<std::string> tokens;
  std::string lang;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::string joined() const { return join_str(tokens, " "); }
};

TokenSequence lowercased(TokenSequence ts);

// Unigram dictionary for Khmer Viterbi segmentation. Log-probabilities are
// add-one smoothed relative frequencies over ZWSP-delimited words:
//   p(w) = (count(w) + 1) / (total + vocab + 1)
// with the leftover denominator unit reserved for out-of-vocabulary mass;
// each OOV character scores log(1 / (total + vocab + 1)) - oov_log_penalty.
struct KhmerLexicon {
  std::unordered_map<std::string, double> entries;  // word -> log prob
  double oov_log_prob = 0.0;                        // per OOV character
  std::int64_t total_count = 0;
  std::size_t max_word_cps = 0;  // longest entry, in codepoints

  bool has(const std::string& word) const { return entries.count(word) != 0; }
  double log_prob(const std::string& word) const;

  void save_jsonl(const std::string& path) const;
  static KhmerLexicon load_jsonl(const std::string& path);
};

// Harvests ZWSP-delimited words from Khmer sentences and estimates the
// smoothed unigram model described on KhmerLexicon. Throws Error when the
// corpus is empty or contains no ZWSP-delimited words.
KhmerLexicon build_khmer_lexicon(const std::vector<std::string>& sentences,
                                 double oov_log_penalty = 0.0);

// Tokenizes one sentence.
//   en/ps: split on whitespace, detach punctuation, keep numbers ("3.14",
//          "1,000", "12:30"), a fixed abbreviation list ("etc.", "e.g.") and
//          letter-internal apostrophes/hyphens intact.
//   km:    requires a lexicon. If the text contains U+200B, split on it
//          (plus whitespace) and detach edge punctuation; otherwise run
//          Viterbi segmentation maximizing the total lexicon log-probability.
//          Viterbi ties prefer fewer tokens, then leftmost-longest.
TokenSequence tokenize(std::string_view text, std::string_view lang,
                       const KhmerLexicon* lexicon = nullptr);

using Tokenizer = std::function<TokenSequence(std::string_view)>;

// Binds language, lexicon and optional lowercasing into a reusable callable.
Tokenizer make_tokenizer(std::string lang, std::shared_ptr<const KhmerLexicon> lexicon,
                         bool lowercase = false);

// Splits document text into initial segments: on newlines, and after the
// terminal marks {. ! ? U+17D4 U+061F} when followed by whitespace. Segments
// are trimmed; empty ones are dropped. Position in the result is the 1-based
// segment id.
std::vector<std::string> split_sentences(std::string_view doc_text, std::string_view lang);

// Character n-gram language classifier (n = 1..3), multinomial naive Bayes
// with add-one smoothing over the union vocabulary of all training languages.
struct LangIdModel {
  struct PerLang {
    double log_prior = 0.0;
    // For each order: log-probs of grams seen in this language. Grams from
    // the union vocabulary that are unseen here take default_log_prob[n].
    std::array<std::unordered_map<std::string, double>, 3> ngram_log_probs;
    std::array<double, 3> default_log_prob{};
  };

  std::vector<std::string> languages;
  std::vector<PerLang> models;            // aligned with `languages`
  std::array<std::size_t, 3> vocab_sizes{};  // union vocabulary per order

  bool trained() const { return !languages.empty(); }
  int language_index(std::string_view lang) const;  // -1 if absent

  void save_jsonl(const std::string& path) const;
  static LangIdModel load_jsonl(const std::string& path);
};

// Trains the classifier. Requires at least two languages with at least 100
// sample sentences each; priors are proportional to sample counts.
LangIdModel train_langid(const std::vector<std::pair<std::string, std::vector<std::string>>>& samples);

// Posterior distribution over model.languages; sums to 1. Empty for empty
// or whitespace-only text.
std::vector<double> language_posteriors(const LangIdModel& model, std::string_view text);

// Argmax language and its posterior; ("und", 0.0) for empty text.
std::pair<std::string, double> identify_language(const LangIdModel& model, std::string_view text);

}  // namespace vtm
