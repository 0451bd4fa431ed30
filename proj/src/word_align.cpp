#include "vtm/word_align.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <tuple>

namespace vtm {

void AlignerConfig::validate() const {
  if (em_iterations < 1) throw ConfigError("AlignerConfig: em_iterations must be >= 1");
  if (diagonal_tension < 0) throw ConfigError("AlignerConfig: diagonal_tension must be >= 0");
  if (null_prob < 0 || null_prob >= 1) throw ConfigError("AlignerConfig: null_prob must be in [0,1)");
  if (prob_floor < 0) throw ConfigError("AlignerConfig: prob_floor must be >= 0");
}

// ---------------------------------------------------------------------------
// TranslationTable

int TranslationTable::intern_row(std::string_view token) {
  const auto it = row_ids_.find(std::string(token));
  if (it != row_ids_.end()) return it->second;
  const int id = static_cast<int>(row_tokens_.size());
  row_ids_.emplace(std::string(token), id);
  row_tokens_.emplace_back(token);
  rows_.emplace_back();
  row_max_.push_back(0.0);
  return id;
}

int TranslationTable::intern_col(std::string_view token) {
  const auto it = col_ids_.find(std::string(token));
  if (it != col_ids_.end()) return it->second;
  const int id = static_cast<int>(col_tokens_.size());
  col_ids_.emplace(std::string(token), id);
  col_tokens_.emplace_back(token);
  return id;
}

int TranslationTable::find_row(std::string_view token) const {
  const auto it = row_ids_.find(std::string(token));
  return it == row_ids_.end() ? -1 : it->second;
}

int TranslationTable::find_col(std::string_view token) const {
  const auto it = col_ids_.find(std::string(token));
  return it == col_ids_.end() ? -1 : it->second;
}

void TranslationTable::set_prob(int row, int col, double p) {
  rows_[static_cast<std::size_t>(row)].emplace_back(col, p);
}

void TranslationTable::finalize() {
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    auto& row = rows_[r];
    std::sort(row.begin(), row.end());
    double mx = 0.0;
    for (const auto& [col, p] : row) mx = std::max(mx, p);
    row_max_[r] = mx;
  }
}

double TranslationTable::lookup_ids(int row, int col) const {
  if (row < 0 || col < 0) return 0.0;
  const auto& entries = rows_[static_cast<std::size_t>(row)];
  const auto it = std::lower_bound(entries.begin(), entries.end(), col,
                                   [](const std::pair<int, double>& e, int c) { return e.first < c; });
  if (it == entries.end() || it->first != col) return 0.0;
  return it->second;
}

double TranslationTable::lookup(std::string_view row_token, std::string_view col_token) const {
  return lookup_ids(find_row(row_token), find_col(col_token));
}

double TranslationTable::row_max(std::string_view row_token) const {
  const int r = find_row(row_token);
  return r < 0 ? 0.0 : row_max_[static_cast<std::size_t>(r)];
}

bool TranslationTable::has_row(std::string_view row_token) const {
  return find_row(row_token) >= 0;
}

std::size_t TranslationTable::size() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.size();
  return n;
}

void TranslationTable::save_tsv(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  std::vector<int> order(rows_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return row_tokens_[a] < row_tokens_[b]; });
  for (const int r : order) {
    std::vector<std::pair<int, double>> entries = rows_[r];
    std::sort(entries.begin(), entries.end(), [&](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return col_tokens_[a.first] < col_tokens_[b.first];
    });
    for (const auto& [col, p] : entries) {
      out << row_tokens_[r] << '\t' << col_tokens_[col] << '\t' << format_score(p) << '\n';
    }
  }
}

TranslationTable TranslationTable::load_tsv(const std::string& path, Direction direction) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  TranslationTable table;
  table.direction = direction;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = strip_cr(line);
    if (sv.empty()) continue;
    const auto fields = split_str(sv, '\t');
    if (fields.size() != 3) throw ParseError(path, lineno, "expected 3 tab-separated columns");
    char* end = nullptr;
    const double p = std::strtod(fields[2].c_str(), &end);
    if (end == fields[2].c_str() || *end != '\0') throw ParseError(path, lineno, "bad probability");
    table.set_prob(table.intern_row(fields[0]), table.intern_col(fields[1]), p);
  }
  table.finalize();
  return table;
}

// ---------------------------------------------------------------------------
// EM training

namespace {

struct IntPair {
  std::vector<int> rows, cols;
};

// Alignment prior over row positions for a given column position: p0 for the
// null word, (1 - p0) * delta / Z for real positions, delta as in fast_align.
struct AlignmentPrior {
  double lambda, p0;

  double real(std::size_t i, std::size_t j, std::size_t m, std::size_t n, double z) const {
    return (1.0 - p0) * delta(i, j, m, n) / z;
  }
  double delta(std::size_t i, std::size_t j, std::size_t m, std::size_t n) const {
    if (lambda == 0.0) return 1.0;
    const double x = static_cast<double>(i + 1) / static_cast<double>(m) -
                     static_cast<double>(j + 1) / static_cast<double>(n);
    return std::exp(-lambda * std::abs(x));
  }
  double z(std::size_t j, std::size_t m, std::size_t n) const {
    if (lambda == 0.0) return static_cast<double>(m);
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += delta(i, j, m, n);
    return s;
  }
};

struct PairContribution {
  // (row_id, col_id, gamma) expected counts; the null word is row 0.
  std::vector<std::tuple<int, int, double>> counts;
  double log_likelihood = 0.0;
};

class DirectionTrainer {
 public:
  DirectionTrainer(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                   bool reversed, const AlignerConfig& cfg)
      : cfg_(cfg) {
    table_.direction =
        reversed ? TranslationTable::Direction::reverse : TranslationTable::Direction::forward;
    table_.diagonal_tension = cfg.diagonal_tension;
    table_.null_prob = cfg.null_prob;
    null_row_ = table_.intern_row(TranslationTable::kNullToken);
    for (const auto& [a, b] : pairs) {
      const TokenSequence& src = reversed ? b : a;
      const TokenSequence& tgt = reversed ? a : b;
      if (src.empty() || tgt.empty()) {
        ++stats_.skipped_pairs;
        continue;
      }
      IntPair ip;
      ip.rows.reserve(src.size());
      ip.cols.reserve(tgt.size());
      for (const auto& t : src.tokens) ip.rows.push_back(table_.intern_row(t));
      for (const auto& t : tgt.tokens) ip.cols.push_back(table_.intern_col(t));
      total_col_tokens_ += ip.cols.size();
      corpus_.push_back(std::move(ip));
    }
    stats_.training_pairs = corpus_.size();
    if (corpus_.empty()) throw Error("train_aligner: no usable pairs (all sides empty?)");
  }

  void run() {
    const double uniform = 1.0 / static_cast<double>(table_.col_tokens().size());
    // t(col|row) as dense-keyed sparse maps rebuilt every M-step.
    probs_.assign(table_.row_tokens().size(), {});
    const AlignmentPrior prior{cfg_.diagonal_tension, cfg_.null_prob};

    for (int iter = 0; iter < cfg_.em_iterations; ++iter) {
      std::vector<std::unordered_map<int, double>> counts(table_.row_tokens().size());
      double ll = 0.0;
      const bool first = iter == 0;
      parallel_map_ordered_fold<PairContribution>(
          corpus_.size(),
          [&](std::size_t pi) { return expect(corpus_[pi], prior, uniform, first); },
          [&](std::size_t, PairContribution&& c) {
            ll += c.log_likelihood;
            for (const auto& [row1, col, g] : c.counts) counts[row1][col] += g;
          });
      stats_.log_likelihood.push_back(ll);
      // M-step: renormalize expected counts per row.
      for (std::size_t r = 0; r < counts.size(); ++r) {
        auto& row = probs_[r];
        row.clear();
        double sum = 0.0;
        for (const auto& [col, c] : counts[r]) sum += c;
        if (sum <= 0.0) continue;
        row.reserve(counts[r].size());
        for (const auto& [col, c] : counts[r]) row.emplace_back(col, c / sum);
        std::sort(row.begin(), row.end());
      }
    }
    prune_and_store();
    stats_.final_perplexity =
        std::exp(-stats_.log_likelihood.back() / static_cast<double>(total_col_tokens_));
    stats_.table_entries = table_.size();
  }

  TranslationTable&& take_table() { return std::move(table_); }
  TrainingStats&& take_stats() { return std::move(stats_); }

 private:
  double t_prob(int row, int col, double uniform, bool first) const {
    if (first) return uniform;
    const auto& entries = probs_[static_cast<std::size_t>(row)];
    const auto it = std::lower_bound(entries.begin(), entries.end(), col,
                                     [](const std::pair<int, double>& e, int c) { return e.first < c; });
    if (it == entries.end() || it->first != col) return 0.0;
    return it->second;
  }

  PairContribution expect(const IntPair& ip, const AlignmentPrior& prior, double uniform,
                          bool first) const {
    PairContribution out;
    const std::size_t m = ip.rows.size(), n = ip.cols.size();
    out.counts.reserve((m + 1) * n);
    for (std::size_t j = 0; j < n; ++j) {
      const double z = prior.z(j, m, n);
      const int col = ip.cols[j];
      double denom = 0.0;
      double p_null = 0.0;
      if (prior.p0 > 0.0) {
        p_null = prior.p0 * t_prob(null_row_, col, uniform, first);
        denom += p_null;
      }
      // two passes: accumulate denominator, then emit normalized counts
      for (std::size_t i = 0; i < m; ++i) {
        denom += prior.real(i, j, m, n, z) * t_prob(ip.rows[i], col, uniform, first);
      }
      if (denom <= 0.0) continue;  // unseen column token mid-EM; no evidence
      out.log_likelihood += std::log(denom);
      if (p_null > 0.0) out.counts.emplace_back(null_row_, col, p_null / denom);
      for (std::size_t i = 0; i < m; ++i) {
        const double p = prior.real(i, j, m, n, z) * t_prob(ip.rows[i], col, uniform, first);
        if (p > 0.0) out.counts.emplace_back(ip.rows[i], col, p / denom);
      }
    }
    return out;
  }

  void prune_and_store() {
    for (std::size_t r = 0; r < probs_.size(); ++r) {
      auto& row = probs_[r];
      if (row.empty()) continue;
      double kept_sum = 0.0;
      std::vector<std::pair<int, double>> kept;
      kept.reserve(row.size());
      double best_p = 0.0;
      int best_col = -1;
      for (const auto& [col, p] : row) {
        if (p > best_p) {
          best_p = p;
          best_col = col;
        }
        if (p >= cfg_.prob_floor) {
          kept.emplace_back(col, p);
          kept_sum += p;
        }
      }
      if (kept.empty()) {  // floor above every entry; keep the argmax
        kept.emplace_back(best_col, best_p);
        kept_sum = best_p;
      }
      for (auto& [col, p] : kept) table_.set_prob(static_cast<int>(r), col, p / kept_sum);
    }
    table_.finalize();
  }

  const AlignerConfig& cfg_;
  TranslationTable table_;
  TrainingStats stats_;
  std::vector<IntPair> corpus_;
  std::vector<std::vector<std::pair<int, double>>> probs_;
  std::size_t total_col_tokens_ = 0;
  int null_row_ = 0;
};

}  // namespace

AlignerResult train_aligner(const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
                            const AlignerConfig& config) {
  config.validate();
  if (pairs.empty()) throw Error("train_aligner: empty pair list");
  AlignerResult result;
  {
    DirectionTrainer fwd(pairs, /*reversed=*/false, config);
    fwd.run();
    result.forward = fwd.take_table();
    result.forward_stats = fwd.take_stats();
  }
  {
    DirectionTrainer rev(pairs, /*reversed=*/true, config);
    rev.run();
    result.reverse = rev.take_table();
    result.reverse_stats = rev.take_stats();
  }
  return result;
}

std::vector<std::pair<int, int>> align_pair(const TranslationTable& forward,
                                            const TokenSequence& src, const TokenSequence& tgt) {
  std::vector<std::pair<int, int>> links;
  const std::size_t m = src.size(), n = tgt.size();
  if (m == 0 || n == 0) return links;
  const AlignmentPrior prior{forward.diagonal_tension, forward.null_prob};
  const int null_row = forward.find_row(TranslationTable::kNullToken);
  links.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int col = forward.find_col(tgt.tokens[j]);
    const double z = prior.z(j, m, n);
    double best = prior.p0 * forward.lookup_ids(null_row, col);
    int best_i = 0;  // null
    for (std::size_t i = 0; i < m; ++i) {
      const double p =
          prior.real(i, j, m, n, z) * forward.lookup_ids(forward.find_row(src.tokens[i]), col);
      if (p > best) {
        best = p;
        best_i = static_cast<int>(i) + 1;
      }
    }
    links.emplace_back(best_i, static_cast<int>(j) + 1);
  }
  return links;
}

double lookup(const TranslationTable& table, std::string_view row_token,
              std::string_view col_token) {
  return table.lookup(row_token, col_token);
}

}  // namespace vtm
