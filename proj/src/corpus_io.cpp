#include "vtm/corpus_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

namespace vtm {

using json = nlohmann::json;

namespace {

std::size_t ws_token_count(std::string_view text) {
  std::size_t count = 0;
  bool in_token = false;
  for (const char c : text) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_token) ++count;
    in_token = !space;
  }
  return count;
}

template <typename RowFn>
void read_tsv(const std::string& path, std::size_t min_columns, RowFn row_fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    auto fields = split_str(sv, '\t');
    if (fields.size() < min_columns) {
      throw ParseError(path, lineno,
                       "expected at least " + std::to_string(min_columns) + " columns, got " +
                           std::to_string(fields.size()));
    }
    row_fn(std::move(fields), lineno);
  }
}

double parse_double(const std::string& field, const std::string& path, std::size_t lineno,
                    const char* what) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (end == field.c_str() || *end != '\0') throw ParseError(path, lineno, what);
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  return out;
}

}  // namespace

std::vector<PairRecord> read_pairs(const std::string& path) {
  std::vector<PairRecord> pairs;
  read_tsv(path, 2, [&](std::vector<std::string>&& f, std::size_t) {
    pairs.push_back({std::move(f[0]), std::move(f[1])});
  });
  return pairs;
}

void write_pairs(const std::string& path, const std::vector<PairRecord>& pairs) {
  auto out = open_out(path);
  for (const auto& p : pairs) out << p.src << '\t' << p.tgt << '\n';
}

std::vector<ScoredPair> read_scored(const std::string& path) {
  std::vector<ScoredPair> scored;
  read_tsv(path, 3, [&](std::vector<std::string>&& f, std::size_t lineno) {
    ScoredPair p;
    p.src = std::move(f[0]);
    p.tgt = std::move(f[1]);
    p.final_score = parse_double(f[2], path, lineno, "bad score");
    p.norm_score = p.final_score;
    p.raw_score = p.final_score;
    scored.push_back(std::move(p));
  });
  return scored;
}

void write_scored(const std::string& path, const std::vector<ScoredPair>& scored) {
  auto out = open_out(path);
  for (const auto& p : scored) {
    out << p.src << '\t' << p.tgt << '\t' << format_score(p.final_score) << '\n';
  }
}

std::vector<double> read_score_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string field{strip_cr(line)};
    if (field.empty()) continue;
    out.push_back(parse_double(field, path, lineno, "bad score"));
  }
  return out;
}

void write_score_file(const std::string& path, const std::vector<double>& scores) {
  auto out = open_out(path);
  for (const double s : scores) out << format_score(s) << '\n';
}

DocumentReadResult read_document_pairs_jsonl(const std::string& path, const std::string& src_lang,
                                             const std::string& tgt_lang) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  DocumentReadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    try {
      const json j = json::parse(sv);
      DocumentPair doc;
      doc.doc_id = j.at("doc_id").get<std::string>();
      doc.src_segments = split_sentences(j.at("src_text").get<std::string>(), src_lang);
      doc.tgt_segments = split_sentences(j.at("tgt_text").get<std::string>(), tgt_lang);
      result.docs.push_back(std::move(doc));
    } catch (const json::exception&) {
      ++result.skipped_lines;
    }
  }
  return result;
}

void write_document_pairs_jsonl(const std::string& path,
                                const std::vector<std::pair<std::string, std::string>>& raw_docs,
                                const std::vector<std::string>& doc_ids) {
  if (raw_docs.size() != doc_ids.size())
    throw Error("write_document_pairs_jsonl: id/document count mismatch");
  auto out = open_out(path);
  for (std::size_t i = 0; i < raw_docs.size(); ++i) {
    out << json{{"doc_id", doc_ids[i]}, {"src_text", raw_docs[i].first},
                {"tgt_text", raw_docs[i].second}}
               .dump()
        << '\n';
  }
}

void write_mined_tsv(const std::string& path, const std::vector<MinedPair>& pairs) {
  auto out = open_out(path);
  for (const auto& p : pairs) {
    out << p.src << '\t' << p.tgt << '\t' << format_score(p.similarity) << '\t'
        << provenance_name(p.provenance) << '\t' << p.iteration << '\n';
  }
}

std::vector<MinedPair> read_mined_tsv(const std::string& path) {
  std::vector<MinedPair> pairs;
  read_tsv(path, 5, [&](std::vector<std::string>&& f, std::size_t lineno) {
    MinedPair p;
    p.src = std::move(f[0]);
    p.tgt = std::move(f[1]);
    p.similarity = parse_double(f[2], path, lineno, "bad similarity");
    p.provenance = provenance_from_name(f[3]);
    p.iteration = static_cast<int>(parse_double(f[4], path, lineno, "bad iteration"));
    pairs.push_back(std::move(p));
  });
  return pairs;
}

std::vector<CorpusEntry> merge_corpora(const std::vector<PairRecord>& provided,
                                       const std::vector<const MinedCorpus*>& mined) {
  std::vector<CorpusEntry> out;
  std::unordered_set<std::string> seen;
  for (const auto& p : provided) {
    if (!seen.insert(dedup_key(p.src, p.tgt)).second) continue;
    out.push_back({p.src, p.tgt, 0.0, Provenance::provided, 0});
  }
  for (const MinedCorpus* corpus : mined) {
    for (const auto& p : corpus->pairs) {
      if (!seen.insert(dedup_key(p.src, p.tgt)).second) continue;
      out.push_back({p.src, p.tgt, p.similarity, p.provenance, p.iteration});
    }
  }
  return out;
}

std::size_t en_word_count(const ScoredPair& pair, bool en_is_target) {
  return ws_token_count(en_is_target ? pair.tgt : pair.src);
}

std::vector<ScoredPair> subsample(const std::vector<ScoredPair>& scored,
                                  std::uint64_t target_en_words, bool inclusive,
                                  bool en_is_target) {
  std::vector<std::size_t> order(scored.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].final_score > scored[b].final_score;
  });
  std::vector<ScoredPair> out;
  std::uint64_t words = 0;
  for (const std::size_t idx : order) {
    if (words >= target_en_words) break;
    const std::uint64_t w = en_word_count(scored[idx], en_is_target);
    if (!inclusive && words + w > target_en_words) break;
    out.push_back(scored[idx]);
    words += w;
  }
  return out;
}

CorpusStats compute_stats(const std::vector<PairRecord>& pairs,
                          const std::vector<double>* final_scores, bool en_is_target) {
  if (final_scores && final_scores->size() != pairs.size())
    throw Error("compute_stats: score/pair count mismatch");
  CorpusStats stats;
  stats.pair_count = pairs.size();
  std::unordered_set<std::string> seen;
  std::size_t dup = 0;
  for (const auto& p : pairs) {
    stats.en_words += ws_token_count(en_is_target ? p.tgt : p.src);
    stats.src_words += ws_token_count(en_is_target ? p.src : p.tgt);
    if (!seen.insert(dedup_key(p.src, p.tgt)).second) ++dup;
  }
  stats.duplicate_rate =
      pairs.empty() ? 0.0 : static_cast<double>(dup) / static_cast<double>(pairs.size());
  if (final_scores) {
    stats.has_scores = true;
    for (const double s : *final_scores) {
      const double clamped = std::min(std::max(s, 0.0), 1.0);
      const std::size_t bin = std::min<std::size_t>(19, static_cast<std::size_t>(clamped * 20.0));
      ++stats.score_histogram[bin];
    }
  }
  return stats;
}

std::string CorpusStats::to_json() const {
  json j = {{"pair_count", pair_count},
            {"en_words", en_words},
            {"src_words", src_words},
            {"duplicate_rate", duplicate_rate},
            {"has_scores", has_scores},
            {"score_histogram", score_histogram}};
  return j.dump(2);
}

}  // namespace vtm
