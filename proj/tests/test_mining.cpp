#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "support/oracles.hpp"
#include "vtm/mining.hpp"
#include "vtm/synth_corpus.hpp"

using namespace vtm;
using namespace vtm::testsupport;

namespace {

void check_structural_invariants(const Segmentation& seg, int a, int b, int join_limit) {
  int prev_src = 0, prev_tgt = 0;
  for (const auto& g : seg.groups) {
    CHECK(g.src_begin == prev_src + 1);
    CHECK(g.tgt_begin == prev_tgt + 1);
    CHECK(g.src_end >= g.src_begin);
    CHECK(g.tgt_end >= g.tgt_begin);
    CHECK(g.src_end - g.src_begin + 1 <= join_limit);
    CHECK(g.tgt_end - g.tgt_begin + 1 <= join_limit);
    prev_src = g.src_end;
    prev_tgt = g.tgt_end;
  }
  CHECK(prev_src == a);
  CHECK(prev_tgt == b);
}


}  // namespace

TEST_SUITE_BEGIN("mining");

TEST_CASE("greedy walks the diagonal") {
  const DocumentPair doc = simple_doc(3, 3);
  MapScorer scorer;
  scorer.fallback = 0.1;
  for (int i = 1; i <= 3; ++i) {
    scorer.scores[{"s" + std::to_string(i), "t" + std::to_string(i)}] = 0.9;
  }
  const auto matches = greedy_extract(doc, scorer, 0.5);
  REQUIRE(matches.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(matches[i].src_index == i + 1);
    CHECK(matches[i].tgt_index == i + 1);
    CHECK(matches[i].similarity == 0.9);
  }
}

TEST_CASE("greedy finds nothing below threshold") {
  const DocumentPair doc = simple_doc(3, 3);
  MapScorer scorer;
  scorer.fallback = 0.2;
  CHECK(greedy_extract(doc, scorer, 0.5).empty());
}

TEST_CASE("greedy skips a junk leading source segment") {
  // src: junk, s1..s3; tgt: t1..t3; diagonal offset by one
  DocumentPair doc;
  doc.src_segments = {"junk", "s1", "s2", "s3"};
  doc.tgt_segments = {"t1", "t2", "t3"};
  MapScorer scorer;
  scorer.fallback = 0.0;
  scorer.scores[{"s1", "t1"}] = 0.9;
  scorer.scores[{"s2", "t2"}] = 0.9;
  scorer.scores[{"s3", "t3"}] = 0.9;
  const auto matches = greedy_extract(doc, scorer, 0.5);
  REQUIRE(matches.size() == 3);
  CHECK(matches[0].src_index == 2);
  CHECK(matches[0].tgt_index == 1);
  CHECK(matches[2].src_index == 4);
  CHECK(matches[2].tgt_index == 3);
}

TEST_CASE("greedy matches strictly increase on both sides") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const int a = 1 + static_cast<int>(rng_below(rng, 6));
    const int b = 1 + static_cast<int>(rng_below(rng, 6));
    const DocumentPair doc = simple_doc(a, b);
    const std::uint64_t salt = rng();
    const PairScorer scorer = [salt](std::string_view s, std::string_view t) {
      std::mt19937_64 h(fnv1a(std::string(s) + "\t" + std::string(t)) ^ salt);
      return rng_unit(h);
    };
    const auto matches = greedy_extract(doc, scorer, 0.5);
    for (std::size_t k = 1; k < matches.size(); ++k) {
      CHECK(matches[k].src_index > matches[k - 1].src_index);
      CHECK(matches[k].tgt_index > matches[k - 1].tgt_index);
    }
  }
}

TEST_CASE("dp prefers the clean diagonal") {
  const DocumentPair doc = simple_doc(2, 2);
  MapScorer scorer;
  scorer.fallback = 0.1;
  scorer.scores[{"s1", "t1"}] = 0.9;
  scorer.scores[{"s2", "t2"}] = 0.9;
  MiningConfig cfg;
  const auto seg = dp_segment(doc, scorer, cfg);
  REQUIRE(seg.has_value());
  REQUIRE(seg->groups.size() == 2);
  CHECK(seg->groups[0].src_begin == 1);
  CHECK(seg->groups[0].src_end == 1);
  CHECK(seg->groups[0].tgt_end == 1);
  CHECK(seg->groups[1].src_begin == 2);
  CHECK(seg->groups[1].similarity == 0.9);
}

TEST_CASE("dp joins source segments when the joined text scores high") {
  DocumentPair doc;
  doc.src_segments = {"s1", "s2"};
  doc.tgt_segments = {"t1"};
  MapScorer scorer;
  scorer.fallback = 0.05;
  scorer.scores[{"s1 s2", "t1"}] = 0.9;
  MiningConfig cfg;
  const auto seg = dp_segment(doc, scorer, cfg);
  REQUIRE(seg.has_value());
  REQUIRE(seg->groups.size() == 1);
  CHECK(seg->groups[0].src_begin == 1);
  CHECK(seg->groups[0].src_end == 2);
  CHECK(seg->groups[0].tgt_begin == 1);
  CHECK(seg->groups[0].tgt_end == 1);
  CHECK(seg->groups[0].similarity == 0.9);
}

TEST_CASE("dp on a 1x1 document") {
  const DocumentPair doc = simple_doc(1, 1);
  MapScorer scorer;
  scorer.fallback = 0.0;  // even a zero score must be grouped
  MiningConfig cfg;
  const auto seg = dp_segment(doc, scorer, cfg);
  REQUIRE(seg.has_value());
  REQUIRE(seg->groups.size() == 1);
  CHECK(seg->groups[0].src_begin == 1);
  CHECK(seg->groups[0].tgt_end == 1);
}

TEST_CASE("dp returns nothing for infeasible shapes") {
  MiningConfig cfg;  // join limit 3
  MapScorer scorer;
  scorer.fallback = 0.5;
  CHECK(!dp_segment(simple_doc(7, 2), scorer, cfg).has_value());
  CHECK(!dp_segment(simple_doc(1, 4), scorer, cfg).has_value());
  CHECK(dp_segment(simple_doc(6, 2), scorer, cfg).has_value());
}

TEST_CASE("dp equals exhaustive enumeration") {
  std::mt19937_64 rng(47);
  MiningConfig cfg;
  int feasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int a = 1 + static_cast<int>(rng_below(rng, 7));
    const int b = 1 + static_cast<int>(rng_below(rng, static_cast<std::uint64_t>(8 - a)));
    const DocumentPair doc = simple_doc(a, b);
    const std::uint64_t salt = rng();
    const PairScorer scorer = [salt](std::string_view s, std::string_view t) {
      std::mt19937_64 h(fnv1a(std::string(s) + "\t" + std::string(t)) ^ salt);
      return rng_unit(h);
    };
    const auto got = dp_segment(doc, scorer, cfg);
    const auto want = oracle_segment(doc, scorer, cfg);
    REQUIRE(got.has_value() == want.has_value());
    if (got) {
      CHECK(got->score == want->score);
      CHECK(same_groups(*got, *want));
      check_structural_invariants(*got, a, b, cfg.join_limit);
      ++feasible;
    }
  }
  CHECK(feasible > 50);
}

TEST_CASE("dp merges everything when log_c is zero and scores are uniform") {
  // with log C = 0 each group contributes log(s) < 0, so fewer groups win
  const DocumentPair doc = simple_doc(2, 2);
  MapScorer scorer;
  scorer.fallback = 0.5;
  MiningConfig cfg;
  cfg.log_c = 0.0;
  const auto seg = dp_segment(doc, scorer, cfg);
  REQUIRE(seg.has_value());
  CHECK(seg->groups.size() == 1);  // single 2x2 group beats two 1x1 groups
  const auto want = oracle_segment(doc, scorer, cfg);
  CHECK(same_groups(*seg, *want));
}

TEST_CASE("dp tie-break picks the lexicographically earliest boundaries") {
  // a = b = 4 under join limit 3: no 1-group cover exists, and with a
  // uniform scorer every 2-group segmentation scores identically (the terms
  // are the same doubles in the same association), a 9-way exact tie
  const DocumentPair doc = simple_doc(4, 4);
  MapScorer scorer;
  scorer.fallback = 0.5;
  MiningConfig cfg;
  cfg.log_c = 0.0;
  const auto seg = dp_segment(doc, scorer, cfg);
  REQUIRE(seg.has_value());
  REQUIRE(seg->groups.size() == 2);
  CHECK(seg->groups[0].src_end == 1);  // earliest boundary: (1,1), then (4,4)
  CHECK(seg->groups[0].tgt_end == 1);
  CHECK(seg->groups[1].src_end == 4);
  const auto want = oracle_segment(doc, scorer, cfg);
  CHECK(same_groups(*seg, *want));
}

TEST_CASE("dedup keeps first occurrences") {
  std::vector<MinedPair> pairs = {{"a", "b", 0.9, Provenance::greedy, 1},
                                  {"a", "b", 0.8, Provenance::dp, 1},
                                  {"c", "d", 0.7, Provenance::greedy, 1}};
  const auto out = dedup(pairs);
  REQUIRE(out.size() == 2);
  CHECK(out[0].similarity == 0.9);
  CHECK(out[1].src == "c");
  CHECK(dedup({}).empty());
}

TEST_CASE("dedup folds whitespace and case") {
  std::vector<MinedPair> pairs = {{"A  b", "x", 0.9, Provenance::greedy, 1},
                                  {"a b", "x", 0.8, Provenance::dp, 1}};
  CHECK(dedup(pairs).size() == 1);
}

TEST_CASE("dedup is idempotent") {
  std::mt19937_64 rng(51);
  std::vector<MinedPair> pairs;
  for (int i = 0; i < 60; ++i) {
    pairs.push_back({"s" + std::to_string(rng_below(rng, 10)), "t" + std::to_string(rng_below(rng, 10)),
                     0.5, Provenance::greedy, 1});
  }
  const auto once = dedup(pairs);
  const auto twice = dedup(once);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i) {
    CHECK(once[i].src == twice[i].src);
    CHECK(once[i].tgt == twice[i].tgt);
  }
}

TEST_CASE("mine_documents on an empty stream") {
  MapScorer scorer;
  MiningConfig cfg;
  const MinedCorpus corpus = mine_documents({}, scorer, cfg);
  CHECK(corpus.pairs.empty());
  CHECK(corpus.skipped_docs == 0);
}

TEST_CASE("mine_documents skips documents with an empty side") {
  DocumentPair empty_side;
  empty_side.doc_id = "e";
  empty_side.src_segments = {"s"};
  MapScorer scorer;
  MiningConfig cfg;
  const MinedCorpus corpus = mine_documents({empty_side}, scorer, cfg);
  CHECK(corpus.pairs.empty());
  CHECK(corpus.skipped_docs == 1);
}

TEST_CASE("duplicate documents contribute once") {
  const DocumentPair doc = simple_doc(2, 2);
  MapScorer scorer;
  scorer.fallback = 0.1;
  scorer.scores[{"s1", "t1"}] = 0.9;
  scorer.scores[{"s2", "t2"}] = 0.9;
  MiningConfig cfg;
  const MinedCorpus once = mine_documents({doc}, scorer, cfg);
  const MinedCorpus twice = mine_documents({doc, doc}, scorer, cfg);
  CHECK(once.pairs.size() == twice.pairs.size());
}

TEST_CASE("mine_documents recovers planted pairs from synthetic documents") {
  SynthOptions opt;
  opt.vocab_size = 300;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(53);
  const auto train = synth.make_pairs(1200, rng);
  const auto held_out = synth.make_pairs(500, rng);

  std::vector<std::pair<TokenSequence, TokenSequence>> tokenized;
  std::vector<TokenSequence> src_side, tgt_side;
  const auto lexicon = std::make_shared<KhmerLexicon>(build_khmer_lexicon([&] {
    std::vector<std::string> sents;
    for (const auto& [s, t] : train) sents.push_back(s);
    return sents;
  }()));
  const Tokenizer tok_src = make_tokenizer("km", lexicon);
  const Tokenizer tok_tgt = make_tokenizer("en", nullptr, true);
  for (const auto& [s, t] : train) {
    auto a = tok_src(s);
    auto b = tok_tgt(t);
    src_side.push_back(a);
    tgt_side.push_back(b);
    tokenized.emplace_back(std::move(a), std::move(b));
  }
  AlignerConfig acfg;
  acfg.em_iterations = 4;
  const AlignerResult aligned = train_aligner(tokenized, acfg);
  const IdfWeights idf_src = compute_idf(src_side);
  const IdfWeights idf_tgt = compute_idf(tgt_side);
  const YisiScorer scorer{&aligned.forward, &aligned.reverse, &idf_src, &idf_tgt, tok_src, tok_tgt};

  const auto built = synth.make_documents(held_out, 10, 0.1, rng);
  MiningConfig cfg;
  cfg.sim_threshold = 0.5;
  const MinedCorpus corpus = mine_documents(built.docs, scorer, cfg);

  std::set<std::string> planted;
  for (const auto& [s, t] : built.planted) planted.insert(dedup_key(s, t));
  std::set<std::string> mined;
  for (const auto& p : corpus.pairs) mined.insert(dedup_key(p.src, p.tgt));
  std::size_t recovered = 0;
  for (const auto& key : planted) recovered += mined.count(key);
  const double recall = static_cast<double>(recovered) / static_cast<double>(planted.size());
  std::size_t true_mined = 0;
  for (const auto& key : mined) true_mined += planted.count(key);
  const double precision = static_cast<double>(true_mined) / static_cast<double>(mined.size());
  CHECK(recall >= 0.95);
  CHECK(precision >= 0.90);
}

TEST_CASE("document order only permutes the mined output") {
  SynthOptions opt;
  opt.vocab_size = 200;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(97);
  const auto train = synth.make_pairs(600, rng);
  const auto planted = synth.make_pairs(150, rng);

  std::vector<std::string> km_side;
  for (const auto& [s, t] : train) km_side.push_back(s);
  const auto lexicon = std::make_shared<KhmerLexicon>(build_khmer_lexicon(km_side));
  const Tokenizer tok_src = make_tokenizer("km", lexicon);
  const Tokenizer tok_tgt = make_tokenizer("en", nullptr, true);
  std::vector<std::pair<TokenSequence, TokenSequence>> tokenized;
  std::vector<TokenSequence> src_side, tgt_side;
  for (const auto& [s, t] : train) {
    auto a = tok_src(s);
    auto b = tok_tgt(t);
    src_side.push_back(a);
    tgt_side.push_back(b);
    tokenized.emplace_back(std::move(a), std::move(b));
  }
  AlignerConfig acfg;
  acfg.em_iterations = 3;
  const AlignerResult aligned = train_aligner(tokenized, acfg);
  const IdfWeights idf_src = compute_idf(src_side), idf_tgt = compute_idf(tgt_side);
  const YisiScorer scorer{&aligned.forward, &aligned.reverse, &idf_src, &idf_tgt, tok_src, tok_tgt};

  auto built = synth.make_documents(planted, 10, 0.1, rng);
  MiningConfig cfg;
  const MinedCorpus in_order = mine_documents(built.docs, PairScorer(scorer), cfg);
  std::reverse(built.docs.begin(), built.docs.end());
  const MinedCorpus reversed = mine_documents(built.docs, PairScorer(scorer), cfg);

  // first-seen dedup keeps different witnesses, but the key/similarity sets match
  std::map<std::string, double> a, b;
  for (const auto& p : in_order.pairs) a.emplace(dedup_key(p.src, p.tgt), p.similarity);
  for (const auto& p : reversed.pairs) b.emplace(dedup_key(p.src, p.tgt), p.similarity);
  CHECK(a == b);
}

TEST_CASE("iterative_mine with one iteration equals mine once") {
  SynthOptions opt;
  opt.vocab_size = 150;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(59);
  const auto seed = synth.make_pairs(400, rng);
  const auto planted = synth.make_pairs(100, rng);
  const auto built = synth.make_documents(planted, 10, 0.0, rng);

  const Tokenizer tok_src = make_tokenizer("km", std::make_shared<KhmerLexicon>(build_khmer_lexicon([&] {
                                             std::vector<std::string> s;
                                             for (const auto& p : seed) s.push_back(p.first);
                                             return s;
                                           }())));
  const Tokenizer tok_tgt = make_tokenizer("en", nullptr, true);

  MiningConfig cfg;
  cfg.iterations = 1;
  AlignerConfig acfg;
  acfg.em_iterations = 3;
  const IterativeMineResult iter1 = iterative_mine(seed, built.docs, cfg, acfg, tok_src, tok_tgt);
  REQUIRE(iter1.reports.size() == 1);

  // manual train-then-mine with the same inputs
  std::vector<std::pair<TokenSequence, TokenSequence>> tokenized;
  std::vector<TokenSequence> src_side, tgt_side;
  for (const auto& [s, t] : seed) {
    auto a = tok_src(s);
    auto b = tok_tgt(t);
    src_side.push_back(a);
    tgt_side.push_back(b);
    tokenized.emplace_back(std::move(a), std::move(b));
  }
  const AlignerResult aligned = train_aligner(tokenized, acfg);
  const IdfWeights idf_src = compute_idf(src_side), idf_tgt = compute_idf(tgt_side);
  const YisiScorer scorer{&aligned.forward, &aligned.reverse, &idf_src, &idf_tgt, tok_src, tok_tgt};
  const MinedCorpus direct = mine_documents(built.docs, scorer, cfg, 1);

  REQUIRE(iter1.corpus.pairs.size() == direct.pairs.size());
  for (std::size_t i = 0; i < direct.pairs.size(); ++i) {
    CHECK(iter1.corpus.pairs[i].src == direct.pairs[i].src);
    CHECK(iter1.corpus.pairs[i].similarity == direct.pairs[i].similarity);
  }
}

TEST_CASE("iterative_mine is a fixed point when nothing is accepted") {
  SynthOptions opt;
  opt.vocab_size = 100;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(61);
  const auto seed = synth.make_pairs(300, rng);
  const auto built = synth.make_documents(synth.make_pairs(80, rng), 10, 0.0, rng);
  const Tokenizer tok_src = make_tokenizer("km", std::make_shared<KhmerLexicon>(build_khmer_lexicon([&] {
                                             std::vector<std::string> s;
                                             for (const auto& p : seed) s.push_back(p.first);
                                             return s;
                                           }())));
  const Tokenizer tok_tgt = make_tokenizer("en", nullptr, true);

  MiningConfig cfg;
  cfg.iterations = 3;
  cfg.quality_threshold = 1.5;  // nothing qualifies
  AlignerConfig acfg;
  acfg.em_iterations = 2;
  const IterativeMineResult res = iterative_mine(seed, built.docs, cfg, acfg, tok_src, tok_tgt);
  REQUIRE(res.reports.size() == 3);
  for (const auto& report : res.reports) {
    CHECK(report.accepted_new == 0);
    CHECK(report.pool_size == seed.size());
    // identical pool => identical training trajectory
    CHECK(report.forward_stats.log_likelihood == res.reports[0].forward_stats.log_likelihood);
  }
}

TEST_CASE("iteration two reaches vocabulary the seed lacks") {
  SynthOptions opt;
  opt.language_pair = "km-en";
  opt.vocab_size = 260;
  opt.translation_drop = 0.0;
  opt.translation_insert = 0.0;
  opt.secondary_translation = 0.0;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(67);

  // seed: ids [0, 200); "new" vocabulary: ids [200, 260)
  const std::vector<SynthCorpus::VocabRange> seed_mix = {{0, 200, 1.0}};
  const std::vector<SynthCorpus::VocabRange> bridge_mix = {{0, 200, 0.8}, {200, 260, 0.2}};
  const std::vector<SynthCorpus::VocabRange> hard_mix = {{200, 260, 0.85}, {0, 200, 0.15}};

  std::vector<std::pair<std::string, std::string>> seed;
  for (int i = 0; i < 500; ++i) seed.push_back(synth.make_pair(rng, seed_mix));
  std::vector<std::pair<std::string, std::string>> bridge, hard;
  for (int i = 0; i < 300; ++i) bridge.push_back(synth.make_pair(rng, bridge_mix));
  for (int i = 0; i < 100; ++i) hard.push_back(synth.make_pair(rng, hard_mix));

  auto docs = synth.make_documents(bridge, 10, 0.0, rng);
  const auto hard_docs = synth.make_documents(hard, 10, 0.0, rng);
  for (const auto& d : hard_docs.docs) docs.docs.push_back(d);

  const Tokenizer tok_src = make_tokenizer("km", std::make_shared<KhmerLexicon>(build_khmer_lexicon([&] {
                                             std::vector<std::string> s;
                                             for (const auto& p : seed) s.push_back(p.first);
                                             for (const auto& p : bridge) s.push_back(p.first);
                                             for (const auto& p : hard) s.push_back(p.first);
                                             return s;
                                           }())));
  const Tokenizer tok_tgt = make_tokenizer("en", nullptr, true);

  MiningConfig cfg;
  cfg.iterations = 2;
  cfg.quality_threshold = 0.6;
  AlignerConfig acfg;
  acfg.em_iterations = 3;
  const IterativeMineResult res = iterative_mine(seed, docs.docs, cfg, acfg, tok_src, tok_tgt);

  std::set<std::string> hard_keys;
  for (const auto& [s, t] : hard) hard_keys.insert(dedup_key(s, t));
  std::size_t recovered_iter1 = 0, recovered_iter2 = 0;
  for (const auto& p : res.corpus.pairs) {
    if (!hard_keys.count(dedup_key(p.src, p.tgt))) continue;
    if (p.iteration <= 1) ++recovered_iter1;
    ++recovered_iter2;  // cumulative
  }
  CHECK(recovered_iter2 > recovered_iter1);
}

TEST_SUITE_END();
