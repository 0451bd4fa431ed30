#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "vtm/text_prep.hpp"
#include "vtm/word_align.hpp"

namespace vtm {

// Sentence-frequency IDF weights: weight(u) = log(1 + (D+1)/(df(u)+1)).
// Unseen tokens take the df = 0 value of the same formula.
struct IdfWeights {
  std::unordered_map<std::string, double> weights;
  std::int64_t doc_count = 0;
  double default_weight = 0.0;

  double weight(const std::string& token) const;

  void save_tsv(const std::string& path) const;
  static IdfWeights load_tsv(const std::string& path);
};

// Throws Error on an empty corpus.
IdfWeights compute_idf(const std::vector<TokenSequence>& corpus);

// Row-max-normalized lexical similarity:
//   sim(e,f) = max( t_fwd(f|e)/max_f' t_fwd(f'|e), t_rev(e|f)/max_e' t_rev(e'|f) )
// taking each term only where the row exists; when both rows are absent the
// similarity is the exact-match indicator.
double lexical_sim(const TranslationTable& forward, const TranslationTable& reverse,
                   const std::string& e, const std::string& f);

// Lexical-weighted F-measure over max similarities:
//   P = sum_j w_f(f_j) max_i sim(e_i,f_j) / sum_j w_f(f_j), R analogously over e,
//   score = P*R / (0.5*P + 0.5*R), 0 when both are 0.
// Throws Error when either side is empty.
double yisi2_score(const TranslationTable& forward, const TranslationTable& reverse,
                   const IdfWeights& idf_e, const IdfWeights& idf_f, const TokenSequence& e,
                   const TokenSequence& f);

// Sentence-pair scorer over raw text: tokenizes both sides and applies
// yisi2_score; returns 0.0 when either side tokenizes to nothing, so it is
// total over arbitrary segment text (as the mining passes require).
//
// Each instance memoizes tokenizations (mining rescoring revisits the same
// joined segment texts many times). The cache is not synchronized: copies
// start with a fresh cache, so concurrent use wants one copy per thread.
class YisiScorer {
 public:
  const TranslationTable* forward = nullptr;
  const TranslationTable* reverse = nullptr;
  const IdfWeights* idf_src = nullptr;
  const IdfWeights* idf_tgt = nullptr;
  Tokenizer tokenize_src, tokenize_tgt;

  YisiScorer() = default;
  YisiScorer(const TranslationTable* fwd, const TranslationTable* rev, const IdfWeights* is,
             const IdfWeights* it, Tokenizer tok_src, Tokenizer tok_tgt)
      : forward(fwd), reverse(rev), idf_src(is), idf_tgt(it),
        tokenize_src(std::move(tok_src)), tokenize_tgt(std::move(tok_tgt)) {}
  YisiScorer(const YisiScorer& other)
      : forward(other.forward), reverse(other.reverse), idf_src(other.idf_src),
        idf_tgt(other.idf_tgt), tokenize_src(other.tokenize_src),
        tokenize_tgt(other.tokenize_tgt) {}
  YisiScorer& operator=(const YisiScorer& other);
  YisiScorer(YisiScorer&&) = default;
  YisiScorer& operator=(YisiScorer&&) = default;

  double operator()(std::string_view src_text, std::string_view tgt_text) const;

 private:
  struct TokenCache;
  const TokenSequence& cached(std::string_view text, bool src_side) const;
  mutable std::shared_ptr<TokenCache> cache_;
};

}  // namespace vtm
