#include "vtm/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace vtm {

namespace fs = std::filesystem;
using json = nlohmann::json;

RerankSettings rerank_preset(const std::string& language_pair) {
  if (language_pair == "km-en") return {0.2, 2, 0.2, true, true};
  if (language_pair == "ps-en") return {0.0, 1, 0.1, true, true};
  throw ConfigError("unknown language pair: " + language_pair);
}

std::string PipelineConfig::src_lang() const { return split_str(language_pair, '-').front(); }
std::string PipelineConfig::tgt_lang() const { return split_str(language_pair, '-').back(); }

void PipelineConfig::validate() const {
  if (language_pair != "km-en" && language_pair != "ps-en")
    throw ConfigError("language_pair must be km-en or ps-en");
  aligner.validate();
  mining.validate();
  negatives.validate();
  if (rerank.alpha < 0 || rerank.alpha > 1 || rerank.beta < 0 || rerank.beta > 1)
    throw ConfigError("rerank discounts must be in [0,1]");
  if (rerank.ngram_n < 1) throw ConfigError("rerank ngram_n must be >= 1");
  if (seed_corpus_path.empty() || !fs::exists(seed_corpus_path))
    throw ConfigError("seed corpus not found: " + seed_corpus_path);
  if (documents_path.empty() || !fs::exists(documents_path))
    throw ConfigError("documents file not found: " + documents_path);
  for (const auto& p : external_score_paths) {
    if (!fs::exists(p)) throw ConfigError("external score file not found: " + p);
  }
  if (output_dir.empty()) throw ConfigError("output_dir must be set");
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  PipelineConfig cfg;
  try {
    const json j = json::parse(in);
    cfg.language_pair = j.value("language_pair", cfg.language_pair);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      cfg.seed_corpus_path = p.value("seed_corpus", "");
      cfg.documents_path = p.value("documents", "");
      cfg.output_dir = p.value("output_dir", "");
      cfg.external_score_paths = p.value("external_scores", std::vector<std::string>{});
    }
    if (j.contains("aligner")) {
      const auto& a = j.at("aligner");
      cfg.aligner.em_iterations = a.value("em_iterations", cfg.aligner.em_iterations);
      cfg.aligner.diagonal_tension = a.value("diagonal_tension", cfg.aligner.diagonal_tension);
      cfg.aligner.null_prob = a.value("null_prob", cfg.aligner.null_prob);
      cfg.aligner.prob_floor = a.value("prob_floor", cfg.aligner.prob_floor);
    }
    if (j.contains("mining")) {
      const auto& m = j.at("mining");
      cfg.mining.sim_threshold = m.value("sim_threshold", cfg.mining.sim_threshold);
      cfg.mining.join_limit = m.value("join_limit", cfg.mining.join_limit);
      cfg.mining.log_c = m.value("log_c", cfg.mining.log_c);
      cfg.mining.dp_min_pair_score = m.value("dp_min_pair_score", cfg.mining.dp_min_pair_score);
      cfg.mining.quality_threshold = m.value("quality_threshold", cfg.mining.quality_threshold);
      cfg.mining.iterations = m.value("iterations", cfg.mining.iterations);
    }
    if (j.contains("scorer")) {
      const auto& s = j.at("scorer");
      cfg.scorer.learning_rate = s.value("learning_rate", cfg.scorer.learning_rate);
      cfg.scorer.epochs = s.value("epochs", cfg.scorer.epochs);
      cfg.scorer.l2 = s.value("l2", cfg.scorer.l2);
      cfg.max_scorer_positives = s.value("max_positives", cfg.max_scorer_positives);
      if (s.contains("negatives")) {
        const auto& g = s.at("negatives");
        cfg.negatives.shuffle_misalign = g.value("shuffle_misalign", cfg.negatives.shuffle_misalign);
        cfg.negatives.truncate_to_3 = g.value("truncate_to_3", cfg.negatives.truncate_to_3);
        cfg.negatives.shuffle_order = g.value("shuffle_order", cfg.negatives.shuffle_order);
        cfg.negatives.swap_or_copy = g.value("swap_or_copy", cfg.negatives.swap_or_copy);
      }
    }
    if (j.contains("rerank")) {
      const auto& r = j.at("rerank");
      if (r.contains("preset")) {
        cfg.rerank = rerank_preset(r.at("preset").get<std::string>());
        cfg.rerank_from_preset = true;
      } else {
        cfg.rerank_from_preset = false;
      }
      cfg.rerank.alpha = r.value("alpha", cfg.rerank.alpha);
      cfg.rerank.ngram_n = r.value("ngram_n", cfg.rerank.ngram_n);
      cfg.rerank.beta = r.value("beta", cfg.rerank.beta);
      cfg.rerank.check_src = r.value("check_src", cfg.rerank.check_src);
      cfg.rerank.check_tgt = r.value("check_tgt", cfg.rerank.check_tgt);
    } else {
      cfg.rerank = rerank_preset(cfg.language_pair);
    }
    if (j.contains("subsample")) {
      const auto& s = j.at("subsample");
      cfg.target_en_words = s.value("target_en_words", cfg.target_en_words);
      cfg.subsample_inclusive = s.value("mode", std::string("inclusive")) != "exclusive";
      cfg.count_tokenized_words = s.value("word_count", std::string("raw")) == "tokenized";
    }
    cfg.lowercase_english = j.value("lowercase_english", cfg.lowercase_english);
  } catch (const json::exception& e) {
    throw ParseError(path, 0, std::string("bad config JSON: ") + e.what());
  }
  return cfg;
}

std::string PipelineConfig::to_json() const {
  json j = {
      {"language_pair", language_pair},
      {"seed", seed},
      {"paths",
       {{"seed_corpus", seed_corpus_path},
        {"documents", documents_path},
        {"output_dir", output_dir},
        {"external_scores", external_score_paths}}},
      {"aligner",
       {{"em_iterations", aligner.em_iterations},
        {"diagonal_tension", aligner.diagonal_tension},
        {"null_prob", aligner.null_prob},
        {"prob_floor", aligner.prob_floor}}},
      {"mining",
       {{"sim_threshold", mining.sim_threshold},
        {"join_limit", mining.join_limit},
        {"log_c", mining.log_c},
        {"dp_min_pair_score", mining.dp_min_pair_score},
        {"quality_threshold", mining.quality_threshold},
        {"iterations", mining.iterations}}},
      {"scorer",
       {{"learning_rate", scorer.learning_rate},
        {"epochs", scorer.epochs},
        {"l2", scorer.l2},
        {"max_positives", max_scorer_positives},
        {"negatives",
         {{"shuffle_misalign", negatives.shuffle_misalign},
          {"truncate_to_3", negatives.truncate_to_3},
          {"shuffle_order", negatives.shuffle_order},
          {"swap_or_copy", negatives.swap_or_copy}}}}},
      {"rerank",
       {{"alpha", rerank.alpha},
        {"ngram_n", rerank.ngram_n},
        {"beta", rerank.beta},
        {"check_src", rerank.check_src},
        {"check_tgt", rerank.check_tgt}}},
      {"subsample",
       {{"target_en_words", target_en_words},
        {"mode", subsample_inclusive ? "inclusive" : "exclusive"},
        {"word_count", count_tokenized_words ? "tokenized" : "raw"}}},
      {"lowercase_english", lowercase_english}};
  return j.dump(2);
}

namespace {

struct StageTimer {
  std::vector<std::pair<std::string, double>>& log;

  template <typename Fn>
  auto run(const std::string& name, Fn fn) -> decltype(fn()) {
    const auto start = std::chrono::steady_clock::now();
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        log.emplace_back(name, elapsed_ms(start));
        return;
      } else {
        auto result = fn();
        log.emplace_back(name, elapsed_ms(start));
        return result;
      }
    } catch (const PipelineError&) {
      throw;
    } catch (const std::exception& e) {
      throw PipelineError(name, e.what());
    }
  }

  static double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  auto artifact = [&](const std::string& name) { return (out_dir / name).string(); };

  PipelineResult result;
  result.output_dir = config.output_dir;
  StageTimer timer{result.stage_wall_ms};

  const std::string src_lang = config.src_lang();
  const std::string tgt_lang = config.tgt_lang();

  // --- stage: tokenize (seed ingestion, lexicon, language-id, tokenizers)
  std::vector<PairRecord> seed;
  std::shared_ptr<const KhmerLexicon> lexicon;
  LangIdModel langid;
  Tokenizer tok_src, tok_tgt;
  timer.run("tokenize", [&] {
    seed = read_pairs(config.seed_corpus_path);
    if (seed.empty()) throw Error("seed corpus is empty");
    if (src_lang == "km") {
      std::vector<std::string> km_side;
      km_side.reserve(seed.size());
      for (const auto& p : seed) km_side.push_back(p.src);
      auto lex = std::make_shared<KhmerLexicon>(build_khmer_lexicon(km_side));
      lex->save_jsonl(artifact("khmer_lexicon.jsonl"));
      lexicon = std::move(lex);
    }
    std::vector<std::string> src_samples, tgt_samples;
    src_samples.reserve(seed.size());
    tgt_samples.reserve(seed.size());
    for (const auto& p : seed) {
      src_samples.push_back(p.src);
      tgt_samples.push_back(p.tgt);
    }
    langid = train_langid({{src_lang, src_samples}, {tgt_lang, tgt_samples}});
    langid.save_jsonl(artifact("langid.jsonl"));
    tok_src = make_tokenizer(src_lang, lexicon, /*lowercase=*/false);
    tok_tgt = make_tokenizer(tgt_lang, nullptr,
                             /*lowercase=*/config.lowercase_english && tgt_lang == "en");
  });

  // --- stage: mine (iterative alignment training + mining)
  IterativeMineResult mined;
  timer.run("mine", [&] {
    const DocumentReadResult docs =
        read_document_pairs_jsonl(config.documents_path, src_lang, tgt_lang);
    if (docs.docs.empty()) throw Error("no readable document pairs");
    std::vector<std::pair<std::string, std::string>> seed_raw;
    seed_raw.reserve(seed.size());
    for (const auto& p : seed) seed_raw.emplace_back(p.src, p.tgt);
    mined = iterative_mine(seed_raw, docs.docs, config.mining, config.aligner, tok_src, tok_tgt);
    mined.forward.save_tsv(artifact("table.fwd.tsv"));
    mined.reverse.save_tsv(artifact("table.rev.tsv"));
    mined.idf_src.save_tsv(artifact("idf.src.tsv"));
    mined.idf_tgt.save_tsv(artifact("idf.tgt.tsv"));
    write_mined_tsv(artifact("mined.tsv"), mined.corpus.pairs);
    json iters = json::array();
    for (const auto& r : mined.reports) {
      iters.push_back({{"iteration", r.iteration},
                       {"mined_total", r.mined_total},
                       {"mined_new", r.mined_new},
                       {"accepted_new", r.accepted_new},
                       {"pool_size", r.pool_size},
                       {"forward_log_likelihood", r.forward_stats.log_likelihood},
                       {"reverse_log_likelihood", r.reverse_stats.log_likelihood},
                       {"forward_table_entries", r.forward_stats.table_entries},
                       {"reverse_table_entries", r.reverse_stats.table_entries}});
    }
    std::ofstream out(artifact("iteration_stats.json"), std::ios::binary);
    out << iters.dump(2) << '\n';
  });

  // --- stage: merge
  std::vector<CorpusEntry> merged;
  timer.run("merge", [&] {
    merged = merge_corpora(seed, {&mined.corpus});
    std::ofstream out(artifact("merged.tsv"), std::ios::binary);
    if (!out) throw Error("cannot write merged.tsv");
    for (const auto& e : merged) {
      out << e.src << '\t' << e.tgt << '\t' << format_score(e.similarity) << '\t'
          << provenance_name(e.provenance) << '\t' << e.iteration << '\n';
    }
  });
  result.merged_pairs = merged.size();

  // --- stage: train_scorer
  FeatureContext feature_ctx;
  feature_ctx.forward = &mined.forward;
  feature_ctx.reverse = &mined.reverse;
  feature_ctx.idf_src = &mined.idf_src;
  feature_ctx.idf_tgt = &mined.idf_tgt;
  feature_ctx.langid = &langid;
  feature_ctx.src_lang = src_lang;
  feature_ctx.tgt_lang = tgt_lang;
  feature_ctx.tokenize_src = tok_src;
  feature_ctx.tokenize_tgt = tok_tgt;
  ScorerModel model;
  timer.run("train_scorer", [&] {
    std::vector<std::pair<std::string, std::string>> positives;
    positives.reserve(std::min(seed.size(), config.max_scorer_positives));
    for (const auto& p : seed) {
      if (positives.size() >= config.max_scorer_positives) break;
      positives.emplace_back(p.src, p.tgt);
    }
    NegativeSamplingConfig neg_cfg = config.negatives;
    neg_cfg.seed = config.seed;
    const std::vector<LabeledPair> negatives = generate_negatives(positives, neg_cfg);

    auto featurize = [&](const std::vector<std::pair<std::string, std::string>>& pairs) {
      std::vector<FeatureVector> fvs(pairs.size());
      parallel_map_ordered_fold<FeatureVector>(
          pairs.size(),
          [&](std::size_t i) { return extract_features(pairs[i].first, pairs[i].second, feature_ctx); },
          [&](std::size_t i, FeatureVector&& fv) { fvs[i] = fv; });
      return fvs;
    };
    std::vector<std::pair<std::string, std::string>> neg_pairs;
    neg_pairs.reserve(negatives.size());
    for (const auto& n : negatives) neg_pairs.emplace_back(n.src, n.tgt);

    TrainOptions opts = config.scorer;
    opts.seed = config.seed + 1;
    model = train_scorer(featurize(positives), featurize(neg_pairs), opts);
    model.save_json(artifact("scorer.json"));
  });

  // --- stage: score
  std::vector<double> raw_scores;
  timer.run("score", [&] {
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(merged.size());
    for (const auto& e : merged) pairs.emplace_back(e.src, e.tgt);
    raw_scores = score_pairs(model, pairs, feature_ctx);
    write_score_file(artifact("scores.raw.txt"), raw_scores);
  });

  // --- stage: normalize
  std::vector<double> norm_scores;
  timer.run("normalize", [&] {
    norm_scores = rank_normalize(raw_scores);
    write_score_file(artifact("scores.norm.txt"), norm_scores);
  });

  // --- stage: ensemble (only when external score files are configured)
  if (!config.external_score_paths.empty()) {
    timer.run("ensemble", [&] {
      std::vector<std::vector<double>> lists{norm_scores};
      for (const auto& path : config.external_score_paths) {
        lists.push_back(rank_normalize(load_external_scores(path, merged.size())));
      }
      norm_scores = ensemble(lists);
      write_score_file(artifact("scores.ensembled.txt"), norm_scores);
    });
  }

  // --- stage: rerank
  std::vector<ScoredPair> scored(merged.size());
  timer.run("rerank", [&] {
    for (std::size_t i = 0; i < merged.size(); ++i) {
      scored[i].src = merged[i].src;
      scored[i].tgt = merged[i].tgt;
      scored[i].raw_score = raw_scores[i];
      scored[i].norm_score = norm_scores[i];
      scored[i].final_score = norm_scores[i];
    }
    rerank_langid(scored, langid, src_lang, tgt_lang, config.rerank.alpha,
                  config.rerank.check_src, config.rerank.check_tgt);
    rerank_ngram_coverage(scored, config.rerank.ngram_n, config.rerank.beta, tok_src);
    write_scored(artifact("reranked.tsv"), scored);
  });

  // --- stage: subsample
  timer.run("subsample", [&] {
    std::vector<ScoredPair> selected;
    if (config.count_tokenized_words) {
      // order as in subsample(), but counting tokenizer output
      std::vector<ScoredPair> sorted = scored;
      std::stable_sort(sorted.begin(), sorted.end(), [](const ScoredPair& a, const ScoredPair& b) {
        return a.final_score > b.final_score;
      });
      std::uint64_t words = 0;
      for (const auto& p : sorted) {
        if (words >= config.target_en_words) break;
        const std::uint64_t w = tok_tgt(p.tgt).size();
        if (!config.subsample_inclusive && words + w > config.target_en_words) break;
        selected.push_back(p);
        words += w;
      }
    } else {
      selected = subsample(scored, config.target_en_words, config.subsample_inclusive,
                           /*en_is_target=*/true);
    }
    result.subsampled_pairs = selected.size();
    result.final_tsv_path = artifact("subsampled.tsv");
    write_scored(result.final_tsv_path, selected);

    std::vector<PairRecord> as_pairs;
    std::vector<double> finals;
    as_pairs.reserve(scored.size());
    for (const auto& p : scored) {
      as_pairs.push_back({p.src, p.tgt});
      finals.push_back(p.final_score);
    }
    std::ofstream stats_out(artifact("stats.json"), std::ios::binary);
    stats_out << compute_stats(as_pairs, &finals).to_json() << '\n';
  });

  // --- run manifest
  {
    json stages = json::array();
    for (const auto& [name, ms] : result.stage_wall_ms) {
      stages.push_back({{"name", name}, {"wall_ms", ms}});
    }
    const std::string config_json = config.to_json();
    json manifest = {{"format", "run-manifest"},
                     {"version", 1},
                     {"tool", "volctrans-miner"},
                     {"tool_version", "0.1.0"},
                     {"config_hash", to_hex(fnv1a(config_json))},
                     {"seed", config.seed},
                     {"language_pair", config.language_pair},
                     {"stages", stages},
                     {"config", json::parse(config_json)}};
    result.manifest_path = artifact("manifest.json");
    std::ofstream out(result.manifest_path, std::ios::binary);
    out << manifest.dump(2) << '\n';
  }
  return result;
}

}  // namespace vtm
