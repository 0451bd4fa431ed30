#include "vtm/mining.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

namespace vtm {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kScoreClamp = 1e-12;
}  // namespace

void MiningConfig::validate() const {
  if (sim_threshold <= 0.0 || sim_threshold >= 1.0)
    throw ConfigError("MiningConfig: sim_threshold must be in (0,1)");
  if (join_limit < 1) throw ConfigError("MiningConfig: join_limit must be >= 1");
  if (dp_min_pair_score > 1.0) throw ConfigError("MiningConfig: dp_min_pair_score must be <= 1");
  if (quality_threshold < 0.0) throw ConfigError("MiningConfig: quality_threshold must be >= 0");
  if (iterations < 1) throw ConfigError("MiningConfig: iterations must be >= 1");
}

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::greedy: return "greedy";
    case Provenance::dp: return "dp";
    case Provenance::provided: return "provided";
  }
  return "unknown";
}

Provenance provenance_from_name(std::string_view name) {
  if (name == "greedy") return Provenance::greedy;
  if (name == "dp") return Provenance::dp;
  if (name == "provided") return Provenance::provided;
  throw ParseError("unknown provenance: " + std::string(name));
}

std::vector<GreedyMatch> greedy_extract(const DocumentPair& doc, const PairScorer& scorer,
                                        double threshold) {
  std::vector<GreedyMatch> matches;
  const int a = static_cast<int>(doc.src_segments.size());
  const int b = static_cast<int>(doc.tgt_segments.size());
  int i = 1, j = 1;
  while (i <= a && j <= b) {
    const double s = scorer(doc.src_segments[i - 1], doc.tgt_segments[j - 1]);
    if (s >= threshold) {
      matches.push_back({i, j, s});
      ++i;
      ++j;
      continue;
    }
    const double skip_src = i + 1 <= a ? scorer(doc.src_segments[i], doc.tgt_segments[j - 1]) : kNegInf;
    const double skip_tgt = j + 1 <= b ? scorer(doc.src_segments[i - 1], doc.tgt_segments[j]) : kNegInf;
    if (skip_src == kNegInf && skip_tgt == kNegInf) break;  // both sides on their last segment
    if (skip_src >= skip_tgt) {
      ++i;
    } else {
      ++j;
    }
  }
  return matches;
}

std::optional<Segmentation> dp_segment(const DocumentPair& doc, const PairScorer& scorer,
                                       const MiningConfig& config) {
  config.validate();
  const int a = static_cast<int>(doc.src_segments.size());
  const int b = static_cast<int>(doc.tgt_segments.size());
  if (a < 1 || b < 1) return std::nullopt;
  const int L = config.join_limit;

  // Joined text of segments [begin+1 .. begin+len] (0-based begin).
  auto joined = [](const std::vector<std::string>& segs, int begin, int len) {
    std::string out = segs[static_cast<std::size_t>(begin)];
    for (int k = 1; k < len; ++k) {
      out += ' ';
      out += segs[static_cast<std::size_t>(begin + k)];
    }
    return out;
  };
  auto group_sim = [&](int i, int di, int j, int dj) {
    return scorer(joined(doc.src_segments, i, di), joined(doc.tgt_segments, j, dj));
  };

  // Suffix DP: best[i][j] covers segments i+1..a and j+1..b. Scores are
  // accumulated right-associated (group + suffix), which the enumeration
  // oracle in the tests mirrors so tie handling is exact. The scorer is
  // deterministic, so reconstruction re-evaluates it instead of caching the
  // a*b*L^2 group values.
  const std::size_t W = static_cast<std::size_t>(b) + 1;
  std::vector<double> best(static_cast<std::size_t>(a + 1) * W, kNegInf);
  std::vector<int> groups(static_cast<std::size_t>(a + 1) * W, 0);
  auto at = [&](int i, int j) { return static_cast<std::size_t>(i) * W + static_cast<std::size_t>(j); };
  best[at(a, b)] = 0.0;

  for (int i = a; i >= 0; --i) {
    for (int j = b; j >= 0; --j) {
      if (i == a && j == b) continue;
      double bst = kNegInf;
      int bst_groups = 0;
      for (int di = 1; di <= std::min(L, a - i); ++di) {
        for (int dj = 1; dj <= std::min(L, b - j); ++dj) {
          const double suffix = best[at(i + di, j + dj)];
          if (suffix == kNegInf) continue;
          const double sim = group_sim(i, di, j, dj);
          const double cand = (config.log_c + std::log(std::max(sim, kScoreClamp))) + suffix;
          const int cand_groups = 1 + groups[at(i + di, j + dj)];
          if (cand > bst || (cand == bst && cand_groups < bst_groups)) {
            bst = cand;
            bst_groups = cand_groups;
          }
        }
      }
      best[at(i, j)] = bst;
      groups[at(i, j)] = bst_groups;
    }
  }
  if (best[at(0, 0)] == kNegInf) return std::nullopt;

  // Forward reconstruction: the first (di, dj) in ascending order that keeps
  // both the score and the group count optimal yields the lexicographically
  // earliest boundary sequence.
  Segmentation seg;
  seg.score = best[at(0, 0)];
  int i = 0, j = 0;
  while (i < a || j < b) {
    bool stepped = false;
    for (int di = 1; di <= std::min(L, a - i) && !stepped; ++di) {
      for (int dj = 1; dj <= std::min(L, b - j) && !stepped; ++dj) {
        const double suffix = best[at(i + di, j + dj)];
        if (suffix == kNegInf) continue;
        const double sim = group_sim(i, di, j, dj);
        const double cand = (config.log_c + std::log(std::max(sim, kScoreClamp))) + suffix;
        if (cand == best[at(i, j)] && 1 + groups[at(i + di, j + dj)] == groups[at(i, j)]) {
          seg.groups.push_back({i + 1, i + di, j + 1, j + dj, sim});
          i += di;
          j += dj;
          stepped = true;
        }
      }
    }
    if (!stepped) throw Error("dp_segment: reconstruction failed");  // unreachable
  }
  return seg;
}

std::vector<MinedPair> dedup(std::vector<MinedPair> pairs) {
  std::unordered_set<std::string> seen;
  std::vector<MinedPair> out;
  out.reserve(pairs.size());
  for (auto& p : pairs) {
    if (seen.insert(dedup_key(p.src, p.tgt)).second) out.push_back(std::move(p));
  }
  return out;
}

namespace {

std::vector<MinedPair> mine_one_document(const DocumentPair& doc, const PairScorer& scorer,
                                         const MiningConfig& config, int iteration) {
  std::vector<MinedPair> out;
  for (const GreedyMatch& m : greedy_extract(doc, scorer, config.sim_threshold)) {
    out.push_back({normalize_ws(doc.src_segments[m.src_index - 1]),
                   normalize_ws(doc.tgt_segments[m.tgt_index - 1]), m.similarity,
                   Provenance::greedy, iteration});
  }
  if (const auto seg = dp_segment(doc, scorer, config)) {
    const double min_sim = config.effective_dp_min();
    for (const SegmentGroup& g : seg->groups) {
      if (g.similarity < min_sim) continue;
      std::vector<std::string> src(doc.src_segments.begin() + (g.src_begin - 1),
                                   doc.src_segments.begin() + g.src_end);
      std::vector<std::string> tgt(doc.tgt_segments.begin() + (g.tgt_begin - 1),
                                   doc.tgt_segments.begin() + g.tgt_end);
      out.push_back({normalize_ws(join_str(src, " ")), normalize_ws(join_str(tgt, " ")),
                     g.similarity, Provenance::dp, iteration});
    }
  }
  return out;
}

}  // namespace

MinedCorpus mine_documents(const std::vector<DocumentPair>& docs, const PairScorer& scorer,
                           const MiningConfig& config, int iteration) {
  config.validate();
  MinedCorpus corpus;
  std::vector<MinedPair> all;
  parallel_map_ordered_fold<std::vector<MinedPair>>(
      docs.size(),
      [&](std::size_t di) -> std::vector<MinedPair> {
        const DocumentPair& doc = docs[di];
        if (doc.src_segments.empty() || doc.tgt_segments.empty()) return {};
        // each task copies the scorer so per-instance caches stay thread-local
        const PairScorer local_scorer = scorer;
        return mine_one_document(doc, local_scorer, config, iteration);
      },
      [&](std::size_t di, std::vector<MinedPair>&& mined) {
        const DocumentPair& doc = docs[di];
        if (doc.src_segments.empty() || doc.tgt_segments.empty()) {
          ++corpus.skipped_docs;
          return;
        }
        for (auto& p : mined) all.push_back(std::move(p));
      });
  corpus.pairs = dedup(std::move(all));
  return corpus;
}

IterativeMineResult iterative_mine(
    const std::vector<std::pair<std::string, std::string>>& seed_pairs,
    const std::vector<DocumentPair>& docs, const MiningConfig& config,
    const AlignerConfig& aligner_config, const Tokenizer& tokenize_src,
    const Tokenizer& tokenize_tgt) {
  config.validate();
  aligner_config.validate();
  if (seed_pairs.empty()) throw Error("iterative_mine: empty seed corpus");

  IterativeMineResult result;
  std::vector<std::pair<std::string, std::string>> pool = seed_pairs;
  std::unordered_set<std::string> corpus_keys;

  for (int iter = 1; iter <= config.iterations; ++iter) {
    std::vector<std::pair<TokenSequence, TokenSequence>> tokenized;
    tokenized.reserve(pool.size());
    std::vector<TokenSequence> src_side, tgt_side;
    src_side.reserve(pool.size());
    tgt_side.reserve(pool.size());
    parallel_map_ordered_fold<std::pair<TokenSequence, TokenSequence>>(
        pool.size(),
        [&](std::size_t pi) {
          return std::make_pair(tokenize_src(pool[pi].first), tokenize_tgt(pool[pi].second));
        },
        [&](std::size_t, std::pair<TokenSequence, TokenSequence>&& ts) {
          src_side.push_back(ts.first);
          tgt_side.push_back(ts.second);
          tokenized.push_back(std::move(ts));
        });

    AlignerResult aligned = train_aligner(tokenized, aligner_config);
    IdfWeights idf_src = compute_idf(src_side);
    IdfWeights idf_tgt = compute_idf(tgt_side);

    const YisiScorer scorer{&aligned.forward, &aligned.reverse, &idf_src, &idf_tgt,
                            tokenize_src, tokenize_tgt};
    MinedCorpus mined = mine_documents(docs, PairScorer(scorer), config, iter);

    IterationReport report;
    report.iteration = iter;
    report.forward_stats = aligned.forward_stats;
    report.reverse_stats = aligned.reverse_stats;
    report.mined_total = mined.pairs.size();
    result.corpus.skipped_docs = mined.skipped_docs;

    for (auto& p : mined.pairs) {
      if (!corpus_keys.insert(dedup_key(p.src, p.tgt)).second) continue;
      ++report.mined_new;
      if (p.similarity >= config.quality_threshold) {
        ++report.accepted_new;
        pool.emplace_back(p.src, p.tgt);
      }
      result.corpus.pairs.push_back(std::move(p));
    }
    report.pool_size = pool.size();
    result.reports.push_back(report);

    if (iter == config.iterations) {
      result.forward = std::move(aligned.forward);
      result.reverse = std::move(aligned.reverse);
      result.idf_src = std::move(idf_src);
      result.idf_tgt = std::move(idf_tgt);
    }
  }
  return result;
}

}  // namespace vtm
