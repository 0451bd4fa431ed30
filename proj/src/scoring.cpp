#include "vtm/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

namespace vtm {

using json = nlohmann::json;

std::string_view negative_mode_name(NegativeMode m) {
  switch (m) {
    case NegativeMode::shuffle_misalign: return "shuffle_misalign";
    case NegativeMode::truncate_to_3: return "truncate_to_3";
    case NegativeMode::shuffle_order: return "shuffle_order";
    case NegativeMode::swap_or_copy: return "swap_or_copy";
  }
  return "unknown";
}

void NegativeSamplingConfig::validate() const {
  if (shuffle_misalign < 0 || truncate_to_3 < 0 || shuffle_order < 0 || swap_or_copy < 0)
    throw ConfigError("NegativeSamplingConfig: multipliers must be >= 0");
  if (shuffle_misalign == 0 && truncate_to_3 == 0 && shuffle_order == 0 && swap_or_copy == 0)
    throw ConfigError("NegativeSamplingConfig: at least one mode must be active");
}

namespace {

// Word-like units split on whitespace or zero-width space, keeping the
// separator runs so corrupted text is rebuilt with its original delimiters
// (Khmer separates words with U+200B, not spaces).
struct TextUnits {
  std::vector<std::string> units;
  std::vector<std::string> separators;  // between consecutive units

  std::string rebuild() const {
    std::string out;
    for (std::size_t i = 0; i < units.size(); ++i) {
      if (i) out += separators[i - 1];
      out += units[i];
    }
    return out;
  }
};

bool is_separator_cp(char32_t cp) { return is_space_cp(cp) || cp == kZwsp; }

TextUnits split_units(std::string_view text) {
  TextUnits out;
  const std::u32string cps = decode_utf8(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    while (i < cps.size() && is_separator_cp(cps[i])) ++i;  // leading/trailing dropped
    std::size_t j = i;
    while (j < cps.size() && !is_separator_cp(cps[j])) ++j;
    if (j == i) break;
    if (!out.units.empty()) {
      std::size_t sep_start = i;
      // the separator run preceding this unit
      while (sep_start > 0 && is_separator_cp(cps[sep_start - 1])) --sep_start;
      out.separators.push_back(encode_utf8(std::u32string_view(cps).substr(sep_start, i - sep_start)));
    }
    out.units.push_back(encode_utf8(std::u32string_view(cps).substr(i, j - i)));
    i = j;
  }
  return out;
}

std::string truncate_units(const std::string& text, std::size_t n) {
  TextUnits tu = split_units(text);
  if (tu.units.size() > n) {
    tu.units.resize(n);
    tu.separators.resize(n - 1);
  }
  return tu.rebuild();
}

std::string shuffle_units(const std::string& text, std::mt19937_64& rng) {
  TextUnits tu = split_units(text);
  if (tu.units.size() < 2) return tu.rebuild();
  // cyclic permutation: always differs from the input order
  const std::vector<std::size_t> perm = random_cyclic_permutation(tu.units.size(), rng);
  std::vector<std::string> shuffled(tu.units.size());
  for (std::size_t i = 0; i < tu.units.size(); ++i) shuffled[i] = tu.units[perm[i]];
  tu.units = std::move(shuffled);
  return tu.rebuild();
}

std::size_t mode_volume(double multiplier, std::size_t n) {
  return static_cast<std::size_t>(std::llround(multiplier * static_cast<double>(n)));
}

}  // namespace

std::vector<LabeledPair> generate_negatives(
    const std::vector<std::pair<std::string, std::string>>& positives,
    const NegativeSamplingConfig& config) {
  config.validate();
  const std::size_t n = positives.size();
  if (config.shuffle_misalign > 0 && n < 2)
    throw Error("generate_negatives: shuffle_misalign needs at least 2 positives");
  if (n == 0) throw Error("generate_negatives: no positives");

  std::vector<LabeledPair> out;
  std::mt19937_64 rng(config.seed);

  // (a) derangement-paired sources and targets, one derangement per round
  {
    std::size_t remaining = mode_volume(config.shuffle_misalign, n);
    while (remaining > 0) {
      const std::vector<std::size_t> perm = random_cyclic_permutation(n, rng);
      const std::size_t take = std::min(remaining, n);
      for (std::size_t i = 0; i < take; ++i) {
        out.push_back({positives[i].first, positives[perm[i]].second, NegativeMode::shuffle_misalign});
      }
      remaining -= take;
    }
  }
  // (b) truncate one or both sides to 3 tokens
  for (std::size_t k = 0; k < mode_volume(config.truncate_to_3, n); ++k) {
    const auto& [src, tgt] = positives[k % n];
    const std::uint64_t side = rng_below(rng, 3);  // 0 src, 1 tgt, 2 both
    out.push_back({side != 1 ? truncate_units(src, 3) : src,
                   side != 0 ? truncate_units(tgt, 3) : tgt, NegativeMode::truncate_to_3});
  }
  // (c) shuffle token order of one or both sides
  for (std::size_t k = 0; k < mode_volume(config.shuffle_order, n); ++k) {
    const auto& [src, tgt] = positives[k % n];
    const std::uint64_t side = rng_below(rng, 3);
    out.push_back({side != 1 ? shuffle_units(src, rng) : src,
                   side != 0 ? shuffle_units(tgt, rng) : tgt, NegativeMode::shuffle_order});
  }
  // (d) swap plus same-same copies
  for (std::size_t k = 0; k < mode_volume(config.swap_or_copy, n); ++k) {
    const auto& [src, tgt] = positives[k % n];
    out.push_back({tgt, src, NegativeMode::swap_or_copy});
    out.push_back({src, src, NegativeMode::swap_or_copy});
    out.push_back({tgt, tgt, NegativeMode::swap_or_copy});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Features

const std::array<const char*, kNumFeatures> kFeatureNames = {
    "yisi2",          "fwd_logprob_norm", "rev_logprob_norm", "length_ratio",
    "src_lid_conf",   "tgt_lid_conf",     "jaccard",          "fwd_row_coverage",
    "rev_row_coverage", "align_concordance", "align_diag_dev"};

namespace {

constexpr double kLogFloor = 1e-12;

// Length-normalized Model-1 log score of `cols` given `rows` under `table`
// with a uniform alignment prior and the stored null probability.
double length_norm_logprob(const TranslationTable& table, const std::vector<std::string>& rows,
                           const std::vector<std::string>& cols) {
  const int null_row = table.find_row(TranslationTable::kNullToken);
  const double p0 = table.null_prob;
  std::vector<int> row_ids(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) row_ids[i] = table.find_row(rows[i]);
  double total = 0.0;
  for (const auto& c : cols) {
    const int col = table.find_col(c);
    double p = p0 * table.lookup_ids(null_row, col);
    const double w = (1.0 - p0) / static_cast<double>(rows.size());
    for (const int r : row_ids) p += w * table.lookup_ids(r, col);
    total += std::log(std::max(p, kLogFloor));
  }
  return total / static_cast<double>(cols.size());
}

double jaccard(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> sa(a), sb(b);
  std::sort(sa.begin(), sa.end());
  sa.erase(std::unique(sa.begin(), sa.end()), sa.end());
  std::sort(sb.begin(), sb.end());
  sb.erase(std::unique(sb.begin(), sb.end()), sb.end());
  std::vector<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  const std::size_t uni = sa.size() + sb.size() - inter.size();
  return uni == 0 ? 0.0 : static_cast<double>(inter.size()) / static_cast<double>(uni);
}

double row_coverage(const TranslationTable& table, const std::vector<std::string>& tokens) {
  std::size_t covered = 0;
  for (const auto& t : tokens) covered += table.has_row(t) ? 1 : 0;
  return static_cast<double>(covered) / static_cast<double>(tokens.size());
}

double expected_lang_posterior(const LangIdModel& model, std::string_view text,
                               const std::string& lang) {
  const int idx = model.language_index(lang);
  if (idx < 0) return 0.0;
  const std::vector<double> post = language_posteriors(model, text);
  if (post.empty()) return 0.0;
  return post[static_cast<std::size_t>(idx)];
}

// Word-order signals from the per-target argmax alignment: the fraction of
// adjacent monotone link steps, and the mean |i/m - j/n| diagonal deviation.
// These separate order-shuffled copies, which every bag-of-words feature
// above scores identically to the original pair.
std::pair<double, double> alignment_order_stats(const TranslationTable& fwd,
                                                const TokenSequence& src,
                                                const TokenSequence& tgt) {
  const auto links = align_pair(fwd, src, tgt);
  std::vector<std::pair<int, int>> real;
  for (const auto& [i, j] : links) {
    if (i > 0) real.emplace_back(i, j);
  }
  if (real.empty()) return {0.0, 1.0};
  double concordant = 0.0;
  for (std::size_t k = 1; k < real.size(); ++k) {
    if (real[k].first >= real[k - 1].first) concordant += 1.0;
  }
  const double concordance = real.size() == 1 ? 1.0 : concordant / static_cast<double>(real.size() - 1);
  double dev = 0.0;
  const double m = static_cast<double>(src.size()), n = static_cast<double>(tgt.size());
  for (const auto& [i, j] : real) {
    dev += std::abs(static_cast<double>(i) / m - static_cast<double>(j) / n);
  }
  return {concordance, dev / static_cast<double>(real.size())};
}

TokenSequence truncated(TokenSequence ts, std::size_t max_tokens) {
  if (ts.tokens.size() > max_tokens) ts.tokens.resize(max_tokens);
  return ts;
}

}  // namespace

FeatureVector extract_features(const std::string& src, const std::string& tgt,
                               const FeatureContext& ctx) {
  FeatureVector fv;
  const TokenSequence e = truncated(ctx.tokenize_src(src), ctx.max_tokens);
  const TokenSequence f = truncated(ctx.tokenize_tgt(tgt), ctx.max_tokens);
  if (e.empty() || f.empty()) return fv;  // valid = false
  fv.valid = true;

  const std::string src_txt = e.joined();
  const std::string tgt_txt = f.joined();

  fv.values[0] = yisi2_score(*ctx.forward, *ctx.reverse, *ctx.idf_src, *ctx.idf_tgt, e, f);
  fv.values[1] = length_norm_logprob(*ctx.forward, e.tokens, f.tokens);
  fv.values[2] = length_norm_logprob(*ctx.reverse, f.tokens, e.tokens);
  const double m = static_cast<double>(e.size()), n = static_cast<double>(f.size());
  fv.values[3] = std::min(m, n) / std::max(m, n);
  fv.values[4] = expected_lang_posterior(*ctx.langid, src_txt, ctx.src_lang);
  fv.values[5] = expected_lang_posterior(*ctx.langid, tgt_txt, ctx.tgt_lang);
  fv.values[6] = jaccard(e.tokens, f.tokens);
  fv.values[7] = row_coverage(*ctx.forward, e.tokens);
  fv.values[8] = row_coverage(*ctx.reverse, f.tokens);
  const auto [concordance, diag_dev] = alignment_order_stats(*ctx.forward, e, f);
  fv.values[9] = concordance;
  fv.values[10] = diag_dev;
  return fv;
}

// ---------------------------------------------------------------------------
// Classifier

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double ScorerModel::predict(const FeatureVector& fv) const {
  if (!fv.valid) return 0.0;
  double z = bias;
  for (std::size_t k = 0; k < weights.size(); ++k) z += weights[k] * fv.values[k];
  return sigmoid(z);
}

double auc_score(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) throw Error("auc_score: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // rank-sum with average ranks for ties
  std::size_t pos = 0, neg = 0;
  for (const int y : labels) (y > 0 ? pos : neg) += 1;
  if (pos == 0 || neg == 0) throw Error("auc_score: need both classes");
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] > 0) rank_sum_pos += avg_rank;
    }
    i = j;
  }
  const double p = static_cast<double>(pos), q = static_cast<double>(neg);
  return (rank_sum_pos - p * (p + 1.0) / 2.0) / (p * q);
}

ScorerModel train_scorer(const std::vector<FeatureVector>& positives,
                         const std::vector<FeatureVector>& negatives,
                         const TrainOptions& options) {
  if (positives.empty() || negatives.empty())
    throw Error("train_scorer: both classes must be nonempty");

  struct Example {
    std::array<double, kNumFeatures> x;
    int y;
  };
  std::vector<Example> data;
  data.reserve(positives.size() + negatives.size());
  std::size_t pos_n = 0, neg_n = 0;
  for (const auto& fv : positives) {
    if (fv.valid) {
      data.push_back({fv.values, 1});
      ++pos_n;
    }
  }
  for (const auto& fv : negatives) {
    if (fv.valid) {
      data.push_back({fv.values, 0});
      ++neg_n;
    }
  }
  if (pos_n == 0 || neg_n == 0) throw Error("train_scorer: both classes must be nonempty");

  std::mt19937_64 rng(options.seed);
  shuffle_det(data, rng);

  std::size_t holdout = static_cast<std::size_t>(
      options.holdout_fraction * static_cast<double>(data.size()));
  holdout = std::min(holdout, data.size() - 2);
  // keep both classes in the training span
  const std::size_t train_n = data.size() - holdout;

  // standardize features over the training span
  std::array<double, kNumFeatures> mean{}, stdev{};
  for (std::size_t i = 0; i < train_n; ++i) {
    for (int k = 0; k < kNumFeatures; ++k) mean[k] += data[i].x[k];
  }
  for (int k = 0; k < kNumFeatures; ++k) mean[k] /= static_cast<double>(train_n);
  for (std::size_t i = 0; i < train_n; ++i) {
    for (int k = 0; k < kNumFeatures; ++k) {
      const double d = data[i].x[k] - mean[k];
      stdev[k] += d * d;
    }
  }
  for (int k = 0; k < kNumFeatures; ++k) {
    stdev[k] = std::sqrt(stdev[k] / static_cast<double>(train_n));
    if (stdev[k] < 1e-12) stdev[k] = 1.0;  // constant feature
  }

  std::vector<double> w(kNumFeatures, 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(train_n);
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    shuffle_det(order, rng);
    const double lr = options.learning_rate / (1.0 + 0.1 * static_cast<double>(epoch));
    for (const std::size_t i : order) {
      const Example& ex = data[i];
      double z = b;
      for (int k = 0; k < kNumFeatures; ++k) z += w[k] * (ex.x[k] - mean[k]) / stdev[k];
      const double g = sigmoid(z) - static_cast<double>(ex.y);
      for (int k = 0; k < kNumFeatures; ++k) {
        w[k] -= lr * (g * (ex.x[k] - mean[k]) / stdev[k] + options.l2 * w[k]);
      }
      b -= lr * g;
    }
  }

  ScorerModel model;
  model.feature_names.assign(kFeatureNames.begin(), kFeatureNames.end());
  model.weights.resize(kNumFeatures);
  model.bias = b;
  for (int k = 0; k < kNumFeatures; ++k) {
    model.weights[k] = w[k] / stdev[k];
    model.bias -= w[k] * mean[k] / stdev[k];
  }
  model.meta.epochs = options.epochs;
  model.meta.learning_rate = options.learning_rate;
  model.meta.seed = options.seed;
  model.meta.train_examples = train_n;
  model.meta.holdout_examples = holdout;

  if (holdout > 0) {
    std::vector<double> scores;
    std::vector<int> labels;
    std::size_t correct = 0;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = train_n; i < data.size(); ++i) {
      FeatureVector fv;
      fv.valid = true;
      fv.values = data[i].x;
      const double s = model.predict(fv);
      scores.push_back(s);
      labels.push_back(data[i].y);
      (data[i].y > 0 ? has_pos : has_neg) = true;
      correct += (s >= 0.5) == (data[i].y > 0) ? 1 : 0;
    }
    model.meta.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(holdout);
    model.meta.holdout_auc = (has_pos && has_neg) ? auc_score(scores, labels) : 0.0;
  }
  return model;
}

std::vector<double> score_pairs(const ScorerModel& model,
                                const std::vector<std::pair<std::string, std::string>>& pairs,
                                const FeatureContext& ctx) {
  std::vector<double> out;
  out.reserve(pairs.size());
  parallel_map_ordered_fold<double>(
      pairs.size(),
      [&](std::size_t i) {
        return model.predict(extract_features(pairs[i].first, pairs[i].second, ctx));
      },
      [&](std::size_t, double&& s) { out.push_back(s); });
  return out;
}

// ---------------------------------------------------------------------------
// Rank normalization, reranking, ensembling

std::vector<double> rank_normalize(const std::vector<double>& raw_scores) {
  const std::size_t n = raw_scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw_scores[a] > raw_scores[b]; });
  std::vector<double> out(n, 0.0);
  for (std::size_t rank = 1; rank <= n; ++rank) {
    out[order[rank - 1]] = 1.0 - static_cast<double>(rank) / static_cast<double>(n);
  }
  return out;
}

std::size_t rerank_langid(std::vector<ScoredPair>& scored, const LangIdModel& model,
                          const std::string& expected_src_lang,
                          const std::string& expected_tgt_lang, double alpha, bool check_src,
                          bool check_tgt) {
  if (alpha < 0.0 || alpha > 1.0) throw ConfigError("rerank_langid: alpha must be in [0,1]");
  const double factor = 1.0 - alpha;
  std::size_t discounted = 0;
  std::vector<char> fails(scored.size(), 0);
  parallel_map_ordered_fold<char>(
      scored.size(),
      [&](std::size_t i) -> char {
        const ScoredPair& p = scored[i];
        if (check_src && identify_language(model, p.src).first != expected_src_lang) return 1;
        if (check_tgt && identify_language(model, p.tgt).first != expected_tgt_lang) return 1;
        return 0;
      },
      [&](std::size_t i, char&& f) { fails[i] = f; });
  for (std::size_t i = 0; i < scored.size(); ++i) {
    if (fails[i]) {
      scored[i].final_score *= factor;
      ++discounted;
    }
  }
  return discounted;
}

std::vector<std::string> NgramPool::grams(const std::vector<std::string>& tokens, int n) {
  std::vector<std::string> out;
  if (tokens.empty()) return out;
  if (static_cast<int>(tokens.size()) < n) {
    out.push_back(join_str(tokens, "\x1f"));
    return out;
  }
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string g = tokens[i];
    for (int k = 1; k < n; ++k) {
      g += '\x1f';
      g += tokens[i + static_cast<std::size_t>(k)];
    }
    out.push_back(std::move(g));
  }
  return out;
}

bool NgramPool::contains_all(const std::vector<std::string>& grams) const {
  for (const auto& g : grams) {
    if (seen.find(g) == seen.end()) return false;
  }
  return true;
}

void NgramPool::insert(const std::vector<std::string>& grams) {
  for (const auto& g : grams) seen.insert(g);
}

std::size_t rerank_ngram_coverage(std::vector<ScoredPair>& scored, int n, double beta,
                                  const Tokenizer& tokenize_src) {
  if (n < 1) throw ConfigError("rerank_ngram_coverage: n must be >= 1");
  if (beta < 0.0 || beta > 1.0) throw ConfigError("rerank_ngram_coverage: beta must be in [0,1]");
  const double factor = 1.0 - beta;

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scored[a].final_score > scored[b].final_score;
  });

  NgramPool pool;
  pool.n = n;
  std::size_t discounted = 0;
  for (const std::size_t idx : order) {
    const std::vector<std::string> tokens =
        tokenize_src ? tokenize_src(scored[idx].src).tokens : split_units(scored[idx].src).units;
    const std::vector<std::string> grams = NgramPool::grams(tokens, n);
    if (!grams.empty() && pool.contains_all(grams)) {
      scored[idx].final_score *= factor;
      ++discounted;
    }
    pool.insert(grams);
  }
  return discounted;
}

std::vector<double> ensemble(const std::vector<std::vector<double>>& score_lists) {
  if (score_lists.empty()) throw Error("ensemble: no score lists");
  const std::size_t n = score_lists.front().size();
  for (const auto& list : score_lists) {
    if (list.size() != n) throw Error("ensemble: score lists have different lengths");
  }
  std::vector<double> out(n, 0.0);
  const double k = static_cast<double>(score_lists.size());
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (const auto& list : score_lists) sum += list[i];
    out[i] = sum / k;
  }
  return out;
}

std::vector<double> load_external_scores(const std::string& path, std::size_t expected_count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = strip_cr(line);
    if (sv.empty() && in.peek() == std::char_traits<char>::eof()) break;  // trailing newline
    const std::string field(sv);
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    while (end && *end == ' ') ++end;
    if (end == field.c_str() || *end != '\0')
      throw ParseError(path, lineno, "expected one numeric score");
    out.push_back(v);
  }
  if (out.size() != expected_count) {
    throw Error(path + ": score count " + std::to_string(out.size()) + " does not match pair count " +
                std::to_string(expected_count));
  }
  return out;
}

void ScorerModel::save_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  json j = {{"format", "scorer-model"},
            {"version", 1},
            {"feature_names", feature_names},
            {"weights", weights},
            {"bias", bias},
            {"meta",
             {{"epochs", meta.epochs},
              {"learning_rate", meta.learning_rate},
              {"seed", meta.seed},
              {"holdout_accuracy", meta.holdout_accuracy},
              {"holdout_auc", meta.holdout_auc},
              {"train_examples", meta.train_examples},
              {"holdout_examples", meta.holdout_examples}}}};
  out << j.dump(2) << '\n';
}

ScorerModel ScorerModel::load_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  ScorerModel model;
  try {
    const json j = json::parse(in);
    if (j.at("format") != "scorer-model") throw Error(path + ": not a scorer model file");
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.weights = j.at("weights").get<std::vector<double>>();
    model.bias = j.at("bias").get<double>();
    const auto& m = j.at("meta");
    model.meta.epochs = m.at("epochs").get<int>();
    model.meta.learning_rate = m.at("learning_rate").get<double>();
    model.meta.seed = m.at("seed").get<std::uint64_t>();
    model.meta.holdout_accuracy = m.at("holdout_accuracy").get<double>();
    model.meta.holdout_auc = m.at("holdout_auc").get<double>();
    model.meta.train_examples = m.at("train_examples").get<std::size_t>();
    model.meta.holdout_examples = m.at("holdout_examples").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("bad JSON: ") + e.what());
  }
  if (model.weights.size() != model.feature_names.size())
    throw Error(path + ": weight/feature size mismatch");
  return model;
}

}  // namespace vtm
