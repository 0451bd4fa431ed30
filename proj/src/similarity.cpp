#include "vtm/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

namespace vtm {

double IdfWeights::weight(const std::string& token) const {
  const auto it = weights.find(token);
  return it == weights.end() ? default_weight : it->second;
}

IdfWeights compute_idf(const std::vector<TokenSequence>& corpus) {
  if (corpus.empty()) throw Error("compute_idf: empty corpus");
  std::map<std::string, std::int64_t> df;
  for (const auto& sent : corpus) {
    std::vector<std::string> uniq(sent.tokens);
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (auto& t : uniq) ++df[t];
  }
  IdfWeights idf;
  idf.doc_count = static_cast<std::int64_t>(corpus.size());
  const double d1 = static_cast<double>(idf.doc_count) + 1.0;
  for (const auto& [token, n] : df) {
    idf.weights[token] = std::log(1.0 + d1 / (static_cast<double>(n) + 1.0));
  }
  idf.default_weight = std::log(1.0 + d1);  // df = 0
  return idf;
}

double lexical_sim(const TranslationTable& forward, const TranslationTable& reverse,
                   const std::string& e, const std::string& f) {
  const double fwd_max = forward.row_max(e);
  const double rev_max = reverse.row_max(f);
  if (fwd_max <= 0.0 && rev_max <= 0.0) return e == f ? 1.0 : 0.0;
  double sim = 0.0;
  if (fwd_max > 0.0) sim = std::max(sim, forward.lookup(e, f) / fwd_max);
  if (rev_max > 0.0) sim = std::max(sim, reverse.lookup(f, e) / rev_max);
  return sim;
}

double yisi2_score(const TranslationTable& forward, const TranslationTable& reverse,
                   const IdfWeights& idf_e, const IdfWeights& idf_f, const TokenSequence& e,
                   const TokenSequence& f) {
  if (e.empty() || f.empty()) throw Error("yisi2_score: empty side");
  const std::size_t m = e.size(), n = f.size();

  // Resolve table ids and row maxima once per token; the pairwise loops then
  // run on integer ids. Values are identical to calling lexical_sim per pair.
  struct SrcTok {
    int fwd_row, rev_col;
    double fwd_max;
  };
  struct TgtTok {
    int rev_row, fwd_col;
    double rev_max;
  };
  std::vector<SrcTok> es(m);
  std::vector<TgtTok> fs(n);
  for (std::size_t i = 0; i < m; ++i) {
    const int row = forward.find_row(e.tokens[i]);
    es[i] = {row, reverse.find_col(e.tokens[i]), row >= 0 ? forward.row_max_by_id(row) : 0.0};
  }
  for (std::size_t j = 0; j < n; ++j) {
    const int row = reverse.find_row(f.tokens[j]);
    fs[j] = {row, forward.find_col(f.tokens[j]), row >= 0 ? reverse.row_max_by_id(row) : 0.0};
  }
  auto sim = [&](std::size_t i, std::size_t j) {
    if (es[i].fwd_max <= 0.0 && fs[j].rev_max <= 0.0) {
      return e.tokens[i] == f.tokens[j] ? 1.0 : 0.0;
    }
    double s = 0.0;
    if (es[i].fwd_max > 0.0) {
      s = std::max(s, forward.lookup_ids(es[i].fwd_row, fs[j].fwd_col) / es[i].fwd_max);
    }
    if (fs[j].rev_max > 0.0) {
      s = std::max(s, reverse.lookup_ids(fs[j].rev_row, es[i].rev_col) / fs[j].rev_max);
    }
    return s;
  };

  double p_num = 0.0, p_den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < m; ++i) best = std::max(best, sim(i, j));
    const double w = idf_f.weight(f.tokens[j]);
    p_num += w * best;
    p_den += w;
  }
  const double precision = p_den > 0.0 ? p_num / p_den : 0.0;

  double r_num = 0.0, r_den = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) best = std::max(best, sim(i, j));
    const double w = idf_e.weight(e.tokens[i]);
    r_num += w * best;
    r_den += w;
  }
  const double recall = r_den > 0.0 ? r_num / r_den : 0.0;

  const double denom = 0.5 * precision + 0.5 * recall;
  if (denom <= 0.0) return 0.0;
  return precision * recall / denom;
}

struct YisiScorer::TokenCache {
  std::unordered_map<std::string, TokenSequence> src, tgt;
};

YisiScorer& YisiScorer::operator=(const YisiScorer& other) {
  if (this == &other) return *this;
  forward = other.forward;
  reverse = other.reverse;
  idf_src = other.idf_src;
  idf_tgt = other.idf_tgt;
  tokenize_src = other.tokenize_src;
  tokenize_tgt = other.tokenize_tgt;
  cache_.reset();
  return *this;
}

const TokenSequence& YisiScorer::cached(std::string_view text, bool src_side) const {
  if (!cache_) cache_ = std::make_shared<TokenCache>();
  auto& map = src_side ? cache_->src : cache_->tgt;
  const auto it = map.find(std::string(text));
  if (it != map.end()) return it->second;
  return map.emplace(std::string(text), (src_side ? tokenize_src : tokenize_tgt)(text))
      .first->second;
}

double YisiScorer::operator()(std::string_view src_text, std::string_view tgt_text) const {
  const TokenSequence& e = cached(src_text, true);
  const TokenSequence& f = cached(tgt_text, false);
  if (e.empty() || f.empty()) return 0.0;
  return yisi2_score(*forward, *reverse, *idf_src, *idf_tgt, e, f);
}

void IdfWeights::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "#doc_count\t" << doc_count << '\n';
  out << "#default_weight\t" << format_score(default_weight) << '\n';
  std::vector<std::pair<std::string, double>> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [token, w] : sorted) out << token << '\t' << format_score(w) << '\n';
}

IdfWeights IdfWeights::load_tsv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  IdfWeights idf;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    const auto fields = split_str(sv, '\t');
    if (fields.size() != 2) throw ParseError(path, lineno, "expected 2 tab-separated columns");
    if (fields[0] == "#doc_count") {
      idf.doc_count = std::strtoll(fields[1].c_str(), nullptr, 10);
    } else if (fields[0] == "#default_weight") {
      idf.default_weight = std::strtod(fields[1].c_str(), nullptr);
    } else {
      char* end = nullptr;
      const double w = std::strtod(fields[1].c_str(), &end);
      if (end == fields[1].c_str() || *end != '\0') throw ParseError(path, lineno, "bad weight");
      idf.weights[fields[0]] = w;
    }
  }
  return idf;
}

}  // namespace vtm
