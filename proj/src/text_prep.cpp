#include "vtm/text_prep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "json.hpp"

namespace vtm {

namespace {

using json = nlohmann::json;

bool is_word_cp(char32_t cp) { return !is_space_cp(cp) && !is_punct_cp(cp) && cp != kZwsp; }
bool is_letter_cp(char32_t cp) { return is_word_cp(cp) && !is_digit_cp(cp); }

// Abbreviations kept as single tokens (matched case-insensitively).
const std::vector<std::u32string>& abbreviations() {
  static const std::vector<std::u32string> kAbbrevs = [] {
    const char* raw[] = {"mr.",  "mrs.", "ms.",  "dr.",  "prof.", "sr.",   "jr.",
                         "st.",  "no.",  "vs.",  "etc.", "e.g.",  "i.e.",  "cf.",
                         "inc.", "ltd.", "co.",  "al.",  "fig.",  "dept.", "approx."};
    std::vector<std::u32string> out;
    for (const char* a : raw) out.push_back(decode_utf8(a));
    std::sort(out.begin(), out.end(),
              [](const std::u32string& x, const std::u32string& y) { return x.size() > y.size(); });
    return out;
  }();
  return kAbbrevs;
}

char32_t ascii_lower_cp(char32_t cp) { return (cp >= U'A' && cp <= U'Z') ? cp + 32 : cp; }

// Longest abbreviation starting at i, or 0. Only tried at word-run starts;
// the match must be followed by end-of-chunk or punctuation.
std::size_t match_abbreviation(const std::u32string& cps, std::size_t i) {
  for (const auto& abbr : abbreviations()) {
    if (i + abbr.size() > cps.size()) continue;
    bool ok = true;
    for (std::size_t k = 0; k < abbr.size(); ++k) {
      if (ascii_lower_cp(cps[i + k]) != abbr[k]) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    const std::size_t end = i + abbr.size();
    if (end < cps.size() && is_word_cp(cps[end])) continue;
    return abbr.size();
  }
  return 0;
}

// Punctuation kept inside a token: decimal/thousand/time separators between
// digits, apostrophes and hyphens between letters.
bool is_protected_internal(const std::u32string& cps, std::size_t j) {
  const char32_t cp = cps[j];
  if (j == 0 || j + 1 >= cps.size()) return false;
  if (cp == U'.' || cp == U',' || cp == U':') {
    return is_digit_cp(cps[j - 1]) && is_digit_cp(cps[j + 1]);
  }
  if (cp == U'\'' || cp == 0x2019 || cp == U'-') {
    return is_letter_cp(cps[j - 1]) && is_letter_cp(cps[j + 1]);
  }
  return false;
}

void scan_rule_based_chunk(const std::u32string& cps, std::vector<std::string>& tokens) {
  std::size_t i = 0;
  while (i < cps.size()) {
    if (is_word_cp(cps[i])) {
      if (i == 0 || !is_word_cp(cps[i - 1])) {
        if (const std::size_t len = match_abbreviation(cps, i)) {
          tokens.push_back(encode_utf8(std::u32string_view(cps).substr(i, len)));
          i += len;
          continue;
        }
      }
      std::size_t j = i + 1;
      while (j < cps.size() && (is_word_cp(cps[j]) || is_protected_internal(cps, j))) ++j;
      tokens.push_back(encode_utf8(std::u32string_view(cps).substr(i, j - i)));
      i = j;
    } else {
      std::string tok;
      append_utf8(tok, cps[i]);
      tokens.push_back(std::move(tok));
      ++i;
    }
  }
}

// Viterbi segmentation of a punctuation-free codepoint span. Maximizes the
// summed log-probability; OOV codepoints stand alone at oov_log_prob each.
// Ties prefer fewer tokens, then the leftmost-longest word.
void viterbi_segment(const std::u32string& span, const KhmerLexicon& lex,
                     std::vector<std::string>& tokens) {
  const std::size_t L = span.size();
  if (L == 0) return;
  const std::size_t max_len = std::max<std::size_t>(1, lex.max_word_cps);
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<double> score(L + 1, kNegInf);
  std::vector<std::size_t> ntok(L + 1, 0);
  score[L] = 0.0;
  auto word_log_prob = [&](const std::string& w, std::size_t len) {
    const auto it = lex.entries.find(w);
    if (it != lex.entries.end()) return it->second;
    return len == 1 ? lex.oov_log_prob : kNegInf;
  };
  for (std::size_t i = L; i-- > 0;) {
    std::string w;
    for (std::size_t len = 1; len <= std::min(max_len, L - i); ++len) {
      append_utf8(w, span[i + len - 1]);
      const double lp = word_log_prob(w, len);
      if (lp == kNegInf || score[i + len] == kNegInf) continue;
      const double cand = lp + score[i + len];
      const std::size_t cand_tok = 1 + ntok[i + len];
      if (cand > score[i] || (cand == score[i] && cand_tok < ntok[i])) {
        score[i] = cand;
        ntok[i] = cand_tok;
      }
    }
  }
  std::size_t i = 0;
  while (i < L) {
    std::string w;
    std::string best;
    std::size_t best_len = 0;
    for (std::size_t len = 1; len <= std::min(max_len, L - i); ++len) {
      append_utf8(w, span[i + len - 1]);
      const double lp = word_log_prob(w, len);
      if (lp == kNegInf || score[i + len] == kNegInf) continue;
      if (lp + score[i + len] == score[i] && 1 + ntok[i + len] == ntok[i]) {
        best = w;
        best_len = len;
      }
    }
    // score[0] is finite (single-char fallback always applies), so a step exists
    tokens.push_back(best);
    i += best_len;
  }
}

// Splits a chunk at punctuation, emitting punctuation codepoints as single
// tokens and applying `segment` to the spans in between.
template <typename SegmentFn>
void split_on_punct(const std::u32string& chunk, std::vector<std::string>& tokens,
                    SegmentFn segment) {
  std::size_t i = 0;
  while (i < chunk.size()) {
    if (is_punct_cp(chunk[i])) {
      std::string tok;
      append_utf8(tok, chunk[i]);
      tokens.push_back(std::move(tok));
      ++i;
    } else {
      std::size_t j = i + 1;
      while (j < chunk.size() && !is_punct_cp(chunk[j])) ++j;
      segment(chunk.substr(i, j - i), tokens);
      i = j;
    }
  }
}

std::vector<std::u32string> whitespace_chunks(const std::u32string& cps, bool split_zwsp) {
  std::vector<std::u32string> chunks;
  std::u32string cur;
  for (char32_t cp : cps) {
    if (is_space_cp(cp) || (split_zwsp && cp == kZwsp)) {
      if (!cur.empty()) chunks.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(cp);
    }
  }
  if (!cur.empty()) chunks.push_back(std::move(cur));
  return chunks;
}

}  // namespace

TokenSequence lowercased(TokenSequence ts) {
  for (auto& t : ts.tokens) t = ascii_lower(t);
  return ts;
}

double KhmerLexicon::log_prob(const std::string& word) const {
  const auto it = entries.find(word);
  if (it != entries.end()) return it->second;
  return oov_log_prob;
}

KhmerLexicon build_khmer_lexicon(const std::vector<std::string>& sentences,
                                 double oov_log_penalty) {
  if (sentences.empty()) throw Error("build_khmer_lexicon: empty corpus");
  std::map<std::string, std::int64_t> counts;
  std::int64_t total = 0;
  for (const auto& sent : sentences) {
    const std::u32string cps = decode_utf8(sent);
    if (cps.find(kZwsp) == std::u32string::npos) continue;  // not ZWSP-segmented
    for (const auto& chunk : whitespace_chunks(cps, /*split_zwsp=*/true)) {
      std::size_t i = 0;
      while (i < chunk.size()) {
        if (is_punct_cp(chunk[i])) {
          ++i;
          continue;
        }
        std::size_t j = i + 1;
        while (j < chunk.size() && !is_punct_cp(chunk[j])) ++j;
        ++counts[encode_utf8(chunk.substr(i, j - i))];
        ++total;
        i = j;
      }
    }
  }
  if (total == 0) throw Error("build_khmer_lexicon: corpus has no ZWSP-delimited words");

  KhmerLexicon lex;
  lex.total_count = total;
  const double denom = static_cast<double>(total) + static_cast<double>(counts.size()) + 1.0;
  for (const auto& [word, count] : counts) {
    lex.entries[word] = std::log((static_cast<double>(count) + 1.0) / denom);
    lex.max_word_cps = std::max(lex.max_word_cps, decode_utf8(word).size());
  }
  lex.oov_log_prob = std::log(1.0 / denom) - oov_log_penalty;
  return lex;
}

TokenSequence tokenize(std::string_view text, std::string_view lang,
                       const KhmerLexicon* lexicon) {
  TokenSequence out;
  out.lang = std::string(lang);
  const std::u32string cps = decode_utf8(text);
  if (lang == "km") {
    if (lexicon == nullptr) throw ConfigError("tokenize: Khmer requires a lexicon");
    const bool has_zwsp = cps.find(kZwsp) != std::u32string::npos;
    for (const auto& chunk : whitespace_chunks(cps, /*split_zwsp=*/true)) {
      if (has_zwsp) {
        split_on_punct(chunk, out.tokens, [](const std::u32string& span, auto& toks) {
          toks.push_back(encode_utf8(span));
        });
      } else {
        split_on_punct(chunk, out.tokens, [&](const std::u32string& span, auto& toks) {
          viterbi_segment(span, *lexicon, toks);
        });
      }
    }
  } else {
    for (const auto& chunk : whitespace_chunks(cps, /*split_zwsp=*/false)) {
      scan_rule_based_chunk(chunk, out.tokens);
    }
  }
  return out;
}

Tokenizer make_tokenizer(std::string lang, std::shared_ptr<const KhmerLexicon> lexicon,
                         bool lowercase) {
  if (lang == "km" && !lexicon) throw ConfigError("make_tokenizer: Khmer requires a lexicon");
  return [lang = std::move(lang), lexicon = std::move(lexicon), lowercase](std::string_view text) {
    TokenSequence ts = tokenize(text, lang, lexicon.get());
    return lowercase ? lowercased(std::move(ts)) : ts;
  };
}

std::vector<std::string> split_sentences(std::string_view doc_text, std::string_view /*lang*/) {
  const std::u32string cps = decode_utf8(doc_text);
  std::vector<std::string> segments;
  auto flush = [&](std::size_t begin, std::size_t end) {
    while (begin < end && is_space_cp(cps[begin])) ++begin;
    while (end > begin && is_space_cp(cps[end - 1])) --end;
    if (begin < end) segments.push_back(encode_utf8(std::u32string_view(cps).substr(begin, end - begin)));
  };
  auto is_terminal = [](char32_t cp) {
    return cp == U'.' || cp == U'!' || cp == U'?' || cp == 0x17D4 || cp == 0x061F;
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    if (cps[i] == U'\n') {
      flush(start, i);
      start = i + 1;
    } else if (is_terminal(cps[i]) && i + 1 < cps.size() && is_space_cp(cps[i + 1])) {
      flush(start, i + 1);
      start = i + 1;
    }
  }
  flush(start, cps.size());
  return segments;
}

// ---------------------------------------------------------------------------
// Language identification

namespace {

// Normalized codepoints used for n-gram extraction (spaces carry boundary
// information, so they are kept as single separators).
std::u32string langid_normalize(std::string_view text) {
  return decode_utf8(normalize_ws(text));
}

void for_each_ngram(const std::u32string& cps, int n,
                    const std::function<void(const std::string&)>& fn) {
  if (static_cast<int>(cps.size()) < n) return;
  for (std::size_t i = 0; i + n <= cps.size(); ++i) {
    fn(encode_utf8(std::u32string_view(cps).substr(i, n)));
  }
}

}  // namespace

int LangIdModel::language_index(std::string_view lang) const {
  for (std::size_t i = 0; i < languages.size(); ++i) {
    if (languages[i] == lang) return static_cast<int>(i);
  }
  return -1;
}

LangIdModel train_langid(
    const std::vector<std::pair<std::string, std::vector<std::string>>>& samples) {
  if (samples.size() < 2) throw Error("train_langid: need at least 2 languages");
  std::set<std::string> seen_langs;
  std::size_t total_sentences = 0;
  for (const auto& [lang, sents] : samples) {
    if (!seen_langs.insert(lang).second) throw Error("train_langid: duplicate language " + lang);
    if (sents.size() < 100) {
      throw Error("train_langid: language " + lang + " has only " +
                  std::to_string(sents.size()) + " sample sentences (need >= 100)");
    }
    total_sentences += sents.size();
  }

  LangIdModel model;
  std::array<std::set<std::string>, 3> union_vocab;
  std::vector<std::array<std::map<std::string, std::int64_t>, 3>> counts(samples.size());
  std::vector<std::array<std::int64_t, 3>> totals(samples.size(), {0, 0, 0});

  for (std::size_t li = 0; li < samples.size(); ++li) {
    model.languages.push_back(samples[li].first);
    for (const auto& sent : samples[li].second) {
      const std::u32string cps = langid_normalize(sent);
      for (int n = 1; n <= 3; ++n) {
        for_each_ngram(cps, n, [&](const std::string& g) {
          ++counts[li][n - 1][g];
          ++totals[li][n - 1];
          union_vocab[n - 1].insert(g);
        });
      }
    }
  }
  for (int n = 0; n < 3; ++n) model.vocab_sizes[n] = union_vocab[n].size();

  model.models.resize(samples.size());
  for (std::size_t li = 0; li < samples.size(); ++li) {
    auto& pl = model.models[li];
    pl.log_prior = std::log(static_cast<double>(samples[li].second.size()) /
                            static_cast<double>(total_sentences));
    for (int n = 0; n < 3; ++n) {
      const double denom =
          static_cast<double>(totals[li][n]) + static_cast<double>(model.vocab_sizes[n]);
      pl.default_log_prob[n] = std::log(1.0 / denom);
      for (const auto& [g, c] : counts[li][n]) {
        pl.ngram_log_probs[n][g] = std::log((static_cast<double>(c) + 1.0) / denom);
      }
    }
  }
  return model;
}

std::vector<double> language_posteriors(const LangIdModel& model, std::string_view text) {
  if (!model.trained()) throw ConfigError("language_posteriors: model not trained");
  const std::u32string cps = langid_normalize(text);
  if (cps.empty()) return {};

  std::vector<double> scores(model.languages.size());
  for (std::size_t li = 0; li < model.languages.size(); ++li) {
    const auto& pl = model.models[li];
    double s = pl.log_prior;
    for (int n = 1; n <= 3; ++n) {
      for_each_ngram(cps, n, [&](const std::string& g) {
        const auto it = pl.ngram_log_probs[n - 1].find(g);
        s += it != pl.ngram_log_probs[n - 1].end() ? it->second : pl.default_log_prob[n - 1];
      });
    }
    scores[li] = s;
  }
  const double max_score = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double& s : scores) {
    s = std::exp(s - max_score);
    z += s;
  }
  for (double& s : scores) s /= z;
  return scores;
}

std::pair<std::string, double> identify_language(const LangIdModel& model, std::string_view text) {
  const std::vector<double> post = language_posteriors(model, text);
  if (post.empty()) return {"und", 0.0};
  std::size_t best = 0;
  for (std::size_t i = 1; i < post.size(); ++i) {
    if (post[i] > post[best]) best = i;
  }
  return {model.languages[best], post[best]};
}

// ---------------------------------------------------------------------------
// Persistence

void KhmerLexicon::save_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  json header = {{"format", "khmer-lexicon"},
                 {"version", 1},
                 {"oov_log_prob", oov_log_prob},
                 {"total_count", total_count},
                 {"max_word_cps", max_word_cps}};
  out << header.dump() << '\n';
  std::vector<std::pair<std::string, double>> sorted(entries.begin(), entries.end());
  std::sort(sorted.begin(), sorted.end());
  for (const auto& [key, lp] : sorted) {
    out << json{{"key", key}, {"log_prob", lp}}.dump() << '\n';
  }
}

KhmerLexicon load_lexicon_jsonl_impl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty lexicon file");
  KhmerLexicon lex;
  try {
    const json header = json::parse(strip_cr(line));
    if (header.at("format") != "khmer-lexicon") throw ParseError(path, 1, "not a lexicon file");
    lex.oov_log_prob = header.at("oov_log_prob").get<double>();
    lex.total_count = header.at("total_count").get<std::int64_t>();
    lex.max_word_cps = header.at("max_word_cps").get<std::size_t>();
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const json entry = json::parse(strip_cr(line));
      lex.entries[entry.at("key").get<std::string>()] = entry.at("log_prob").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("bad JSON: ") + e.what());
  }
  return lex;
}

KhmerLexicon KhmerLexicon::load_jsonl(const std::string& path) {
  return load_lexicon_jsonl_impl(path);
}

void LangIdModel::save_jsonl(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  json priors = json::array();
  json defaults = json::array();
  for (const auto& pl : models) {
    priors.push_back(pl.log_prior);
    defaults.push_back({pl.default_log_prob[0], pl.default_log_prob[1], pl.default_log_prob[2]});
  }
  json header = {{"format", "langid"}, {"version", 1},       {"languages", languages},
                 {"priors", priors},   {"defaults", defaults}, {"vocab_sizes", vocab_sizes}};
  out << header.dump() << '\n';
  for (std::size_t li = 0; li < languages.size(); ++li) {
    for (int n = 0; n < 3; ++n) {
      std::vector<std::pair<std::string, double>> sorted(models[li].ngram_log_probs[n].begin(),
                                                         models[li].ngram_log_probs[n].end());
      std::sort(sorted.begin(), sorted.end());
      for (const auto& [key, lp] : sorted) {
        out << json{{"lang", languages[li]}, {"n", n + 1}, {"key", key}, {"log_prob", lp}}.dump()
            << '\n';
      }
    }
  }
}

LangIdModel LangIdModel::load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path, 1, "empty langid file");
  LangIdModel model;
  try {
    const json header = json::parse(strip_cr(line));
    if (header.at("format") != "langid") throw ParseError(path, 1, "not a langid model file");
    model.languages = header.at("languages").get<std::vector<std::string>>();
    const auto priors = header.at("priors").get<std::vector<double>>();
    const auto vocab = header.at("vocab_sizes").get<std::vector<std::size_t>>();
    for (int n = 0; n < 3; ++n) model.vocab_sizes[n] = vocab.at(n);
    model.models.resize(model.languages.size());
    for (std::size_t li = 0; li < model.languages.size(); ++li) {
      model.models[li].log_prior = priors.at(li);
      const auto& d = header.at("defaults").at(li);
      for (int n = 0; n < 3; ++n) model.models[li].default_log_prob[n] = d.at(n).get<double>();
    }
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const json entry = json::parse(strip_cr(line));
      const int li = model.language_index(entry.at("lang").get<std::string>());
      if (li < 0) continue;
      const int n = entry.at("n").get<int>();
      model.models[li].ngram_log_probs[n - 1][entry.at("key").get<std::string>()] =
          entry.at("log_prob").get<double>();
    }
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("bad JSON: ") + e.what());
  }
  return model;
}

}  // namespace vtm
