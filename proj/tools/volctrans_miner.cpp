// volctrans-miner: parallel-corpus mining and filtering toolkit.
//
// Subcommands: textprep | align | sim | mine | score | subsample | pipeline | stats
// Exit code 0 on success; nonzero with a stage-tagged message otherwise.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "json.hpp"
#include "vtm/corpus_io.hpp"
#include "vtm/pipeline.hpp"
#include "vtm/synth_corpus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vtm;

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::istream* in = &std::cin;
  std::ifstream file;
  if (!path.empty() && path != "-") {
    file.open(path, std::ios::binary);
    if (!file) throw Error("cannot read " + path);
    in = &file;
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(*in, line)) lines.emplace_back(strip_cr(line));
  return lines;
}

std::ostream& output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw Error("cannot write " + path);
  return file;
}

std::shared_ptr<const KhmerLexicon> load_lexicon_if(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<KhmerLexicon>(KhmerLexicon::load_jsonl(path));
}

Tokenizer tokenizer_for(const std::string& lang, const std::string& lexicon_path, bool lowercase) {
  return make_tokenizer(lang, load_lexicon_if(lexicon_path), lowercase);
}

struct ScoreRunArgs {
  std::string pairs, fwd, rev, idf_src, idf_tgt, langid, lexicon;
  std::string src_lang = "km", tgt_lang = "en";
  bool lowercase_en = true;
};

// Loads every model the feature extractor needs. The returned context points
// into `store`, which must outlive it.
struct FeatureStore {
  TranslationTable fwd, rev;
  IdfWeights idf_src, idf_tgt;
  LangIdModel langid;
  FeatureContext ctx;

  explicit FeatureStore(const ScoreRunArgs& args) {
    fwd = TranslationTable::load_tsv(args.fwd, TranslationTable::Direction::forward);
    rev = TranslationTable::load_tsv(args.rev, TranslationTable::Direction::reverse);
    idf_src = IdfWeights::load_tsv(args.idf_src);
    idf_tgt = IdfWeights::load_tsv(args.idf_tgt);
    langid = LangIdModel::load_jsonl(args.langid);
    ctx.forward = &fwd;
    ctx.reverse = &rev;
    ctx.idf_src = &idf_src;
    ctx.idf_tgt = &idf_tgt;
    ctx.langid = &langid;
    ctx.src_lang = args.src_lang;
    ctx.tgt_lang = args.tgt_lang;
    ctx.tokenize_src = tokenizer_for(args.src_lang, args.lexicon, false);
    ctx.tokenize_tgt = tokenizer_for(args.tgt_lang, "", args.lowercase_en && args.tgt_lang == "en");
  }
};

void add_textprep(CLI::App& app) {
  auto* textprep = app.add_subcommand("textprep", "Tokenization, sentence splitting, language ID");
  textprep->require_subcommand(1);

  {
    auto* cmd = textprep->add_subcommand("tokenize", "Tokenize one sentence per input line");
    auto lang = std::make_shared<std::string>("en");
    auto lexicon = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto lowercase = std::make_shared<bool>(false);
    cmd->add_option("--lang", *lang, "Language code (en|km|ps)")->required();
    cmd->add_option("--lexicon", *lexicon, "Khmer lexicon JSONL (required for km)");
    cmd->add_option("--input", *input, "Input file (default: stdin)");
    cmd->add_option("--output", *out_path, "Output file (default: stdout)");
    cmd->add_flag("--lowercase", *lowercase, "ASCII-lowercase the tokens");
    cmd->callback([=]() {
      const Tokenizer tok = tokenizer_for(*lang, *lexicon, *lowercase);
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const auto& line : read_lines(*input)) out << tok(line).joined() << '\n';
    });
  }
  {
    auto* cmd = textprep->add_subcommand("split", "Split document text into initial segments");
    auto lang = std::make_shared<std::string>("en");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--lang", *lang, "Language code")->required();
    cmd->add_option("--input", *input, "Input file (default: stdin)");
    cmd->add_option("--output", *out_path, "Output file (default: stdout)");
    cmd->callback([=]() {
      std::string text;
      for (const auto& line : read_lines(*input)) {
        text += line;
        text += '\n';
      }
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const auto& seg : split_sentences(text, *lang)) out << seg << '\n';
    });
  }
  {
    auto* cmd = textprep->add_subcommand("langid-train", "Train the character n-gram classifier");
    auto samples = std::make_shared<std::vector<std::string>>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--samples", *samples, "lang=FILE with one sentence per line (repeatable)")
        ->required()
        ->expected(-2);
    cmd->add_option("--out", *out_path, "Model output path")->required();
    cmd->callback([=]() {
      std::vector<std::pair<std::string, std::vector<std::string>>> data;
      for (const auto& spec : *samples) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos) throw ConfigError("--samples expects lang=FILE: " + spec);
        data.emplace_back(spec.substr(0, eq), read_lines(spec.substr(eq + 1)));
      }
      train_langid(data).save_jsonl(*out_path);
      std::cerr << "trained langid on " << data.size() << " languages\n";
    });
  }
  {
    auto* cmd = textprep->add_subcommand("langid-classify", "Classify one sentence per line");
    auto model_path = std::make_shared<std::string>();
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--model", *model_path, "Model path")->required();
    cmd->add_option("--input", *input, "Input file (default: stdin)");
    cmd->add_option("--output", *out_path, "Output file (default: stdout)");
    cmd->callback([=]() {
      const LangIdModel model = LangIdModel::load_jsonl(*model_path);
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const auto& line : read_lines(*input)) {
        const auto [lang, conf] = identify_language(model, line);
        out << lang << '\t' << format_score(conf) << '\n';
      }
    });
  }
  {
    auto* cmd = textprep->add_subcommand("lexicon", "Build the Khmer lexicon from ZWSP text");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto penalty = std::make_shared<double>(0.0);
    cmd->add_option("--input", *input, "Khmer sentences, one per line (default: stdin)");
    cmd->add_option("--out", *out_path, "Lexicon output path")->required();
    cmd->add_option("--oov-log-penalty", *penalty, "Extra per-character OOV log penalty");
    cmd->callback([=]() {
      const KhmerLexicon lex = build_khmer_lexicon(read_lines(*input), *penalty);
      lex.save_jsonl(*out_path);
      std::cerr << "lexicon: " << lex.entries.size() << " entries from " << lex.total_count
                << " words\n";
    });
  }
}

void add_align(CLI::App& app) {
  auto* align_cmd = app.add_subcommand("align", "Word-alignment table training");
  align_cmd->require_subcommand(1);
  auto* cmd = align_cmd->add_subcommand("train", "Train forward and reverse tables by EM");
  auto src = std::make_shared<std::string>();
  auto tgt = std::make_shared<std::string>();
  auto src_lang = std::make_shared<std::string>("km");
  auto tgt_lang = std::make_shared<std::string>("en");
  auto lexicon = std::make_shared<std::string>();
  auto out_fwd = std::make_shared<std::string>();
  auto out_rev = std::make_shared<std::string>();
  auto cfg = std::make_shared<AlignerConfig>();
  auto lowercase = std::make_shared<bool>(true);
  cmd->add_option("--src", *src, "Source sentences, one per line")->required();
  cmd->add_option("--tgt", *tgt, "Target sentences, one per line")->required();
  cmd->add_option("--src-lang", *src_lang, "Source language code");
  cmd->add_option("--tgt-lang", *tgt_lang, "Target language code");
  cmd->add_option("--lexicon", *lexicon, "Khmer lexicon (built from --src if omitted)");
  cmd->add_option("--iters", cfg->em_iterations, "EM iterations");
  cmd->add_option("--lambda", cfg->diagonal_tension, "Diagonal tension (0 = plain Model 1)");
  cmd->add_option("--p0", cfg->null_prob, "Null-alignment probability");
  cmd->add_option("--prob-floor", cfg->prob_floor, "Pruning floor");
  cmd->add_flag("--no-lowercase-en,!--lowercase-en", *lowercase, "Lowercase English tokens");
  cmd->add_option("--out-fwd", *out_fwd, "Forward table output")->required();
  cmd->add_option("--out-rev", *out_rev, "Reverse table output")->required();
  cmd->callback([=]() {
    const auto src_lines = read_lines(*src);
    const auto tgt_lines = read_lines(*tgt);
    if (src_lines.size() != tgt_lines.size())
      throw Error("line count mismatch: " + std::to_string(src_lines.size()) + " vs " +
                  std::to_string(tgt_lines.size()));
    std::shared_ptr<const KhmerLexicon> lex = load_lexicon_if(*lexicon);
    if (!lex && *src_lang == "km") {
      lex = std::make_shared<KhmerLexicon>(build_khmer_lexicon(src_lines));
    }
    const Tokenizer tok_src = make_tokenizer(*src_lang, lex, false);
    const Tokenizer tok_tgt = make_tokenizer(*tgt_lang, nullptr, *lowercase && *tgt_lang == "en");
    std::vector<std::pair<TokenSequence, TokenSequence>> pairs;
    pairs.reserve(src_lines.size());
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
      pairs.emplace_back(tok_src(src_lines[i]), tok_tgt(tgt_lines[i]));
    }
    const AlignerResult res = train_aligner(pairs, *cfg);
    res.forward.save_tsv(*out_fwd);
    res.reverse.save_tsv(*out_rev);
    std::cerr << "forward: " << res.forward_stats.table_entries
              << " entries, perplexity " << res.forward_stats.final_perplexity << '\n'
              << "reverse: " << res.reverse_stats.table_entries
              << " entries, perplexity " << res.reverse_stats.final_perplexity << '\n';
  });
}

void add_sim(CLI::App& app) {
  auto* sim_cmd = app.add_subcommand("sim", "Sentence-pair lexical similarity");
  sim_cmd->require_subcommand(1);
  {
    auto* cmd = sim_cmd->add_subcommand("idf", "Compute IDF weights from sentences");
    auto input = std::make_shared<std::string>();
    auto lang = std::make_shared<std::string>("en");
    auto lexicon = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto lowercase = std::make_shared<bool>(false);
    cmd->add_option("--input", *input, "Sentences, one per line (default: stdin)");
    cmd->add_option("--lang", *lang, "Language code");
    cmd->add_option("--lexicon", *lexicon, "Khmer lexicon");
    cmd->add_flag("--lowercase", *lowercase, "Lowercase tokens first");
    cmd->add_option("--out", *out_path, "IDF output path")->required();
    cmd->callback([=]() {
      const Tokenizer tok = tokenizer_for(*lang, *lexicon, *lowercase);
      std::vector<TokenSequence> corpus;
      for (const auto& line : read_lines(*input)) corpus.push_back(tok(line));
      compute_idf(corpus).save_tsv(*out_path);
    });
  }
  {
    auto* cmd = sim_cmd->add_subcommand("score", "Score a pair TSV, one score per line");
    auto args = std::make_shared<ScoreRunArgs>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--pairs", args->pairs, "Pair TSV (src<TAB>tgt)")->required();
    cmd->add_option("--fwd", args->fwd, "Forward table")->required();
    cmd->add_option("--rev", args->rev, "Reverse table")->required();
    cmd->add_option("--idf-src", args->idf_src, "Source IDF")->required();
    cmd->add_option("--idf-tgt", args->idf_tgt, "Target IDF")->required();
    cmd->add_option("--lexicon", args->lexicon, "Khmer lexicon");
    cmd->add_option("--src-lang", args->src_lang, "Source language code");
    cmd->add_option("--tgt-lang", args->tgt_lang, "Target language code");
    cmd->add_option("--output", *out_path, "Score file (default: stdout)");
    cmd->callback([=]() {
      const TranslationTable fwd =
          TranslationTable::load_tsv(args->fwd, TranslationTable::Direction::forward);
      const TranslationTable rev =
          TranslationTable::load_tsv(args->rev, TranslationTable::Direction::reverse);
      const IdfWeights idf_src = IdfWeights::load_tsv(args->idf_src);
      const IdfWeights idf_tgt = IdfWeights::load_tsv(args->idf_tgt);
      const YisiScorer scorer{&fwd, &rev, &idf_src, &idf_tgt,
                              tokenizer_for(args->src_lang, args->lexicon, false),
                              tokenizer_for(args->tgt_lang, "", args->lowercase_en && args->tgt_lang == "en")};
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const auto& p : read_pairs(args->pairs)) {
        out << format_score(scorer(p.src, p.tgt)) << '\n';
      }
    });
  }
}

void add_mine(CLI::App& app) {
  auto* mine_cmd = app.add_subcommand("mine", "Parallel-sentence mining from document pairs");
  mine_cmd->require_subcommand(1);
  auto* cmd = mine_cmd->add_subcommand("run", "Iterative mining over a document JSONL");
  auto docs = std::make_shared<std::string>();
  auto seed = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto src_lang = std::make_shared<std::string>("km");
  auto tgt_lang = std::make_shared<std::string>("en");
  auto lexicon = std::make_shared<std::string>();
  auto mcfg = std::make_shared<MiningConfig>();
  auto acfg = std::make_shared<AlignerConfig>();
  cmd->add_option("--docs", *docs, "Document pairs JSONL")->required();
  cmd->add_option("--seed", *seed, "Seed parallel corpus TSV")->required();
  cmd->add_option("--out", *out_dir, "Output directory")->required();
  cmd->add_option("--src-lang", *src_lang, "Source language code");
  cmd->add_option("--tgt-lang", *tgt_lang, "Target language code");
  cmd->add_option("--lexicon", *lexicon, "Khmer lexicon (built from the seed if omitted)");
  cmd->add_option("--iterations", mcfg->iterations, "Mining iterations");
  cmd->add_option("--threshold", mcfg->sim_threshold, "Greedy similarity threshold");
  cmd->add_option("--join-limit", mcfg->join_limit, "Max segments joined per group side");
  cmd->add_option("--log-c", mcfg->log_c, "Per-group log prior in the DP objective");
  cmd->add_option("--dp-min-score", mcfg->dp_min_pair_score, "Emit threshold for DP groups");
  cmd->add_option("--quality-threshold", mcfg->quality_threshold,
                  "Acceptance threshold into the training pool");
  cmd->add_option("--em-iters", acfg->em_iterations, "EM iterations per mining round");
  cmd->add_option("--lambda", acfg->diagonal_tension, "Diagonal tension");
  cmd->callback([=]() {
    fs::create_directories(*out_dir);
    const auto seed_pairs = read_pairs(*seed);
    std::vector<std::pair<std::string, std::string>> seed_raw;
    for (const auto& p : seed_pairs) seed_raw.emplace_back(p.src, p.tgt);
    std::shared_ptr<const KhmerLexicon> lex = load_lexicon_if(*lexicon);
    if (!lex && *src_lang == "km") {
      std::vector<std::string> side;
      for (const auto& p : seed_pairs) side.push_back(p.src);
      lex = std::make_shared<KhmerLexicon>(build_khmer_lexicon(side));
    }
    const Tokenizer tok_src = make_tokenizer(*src_lang, lex, false);
    const Tokenizer tok_tgt = make_tokenizer(*tgt_lang, nullptr, *tgt_lang == "en");
    const auto doc_result = read_document_pairs_jsonl(*docs, *src_lang, *tgt_lang);
    if (doc_result.docs.empty()) throw Error("no readable document pairs in " + *docs);
    const IterativeMineResult res =
        iterative_mine(seed_raw, doc_result.docs, *mcfg, *acfg, tok_src, tok_tgt);
    write_mined_tsv((fs::path(*out_dir) / "mined.tsv").string(), res.corpus.pairs);
    res.forward.save_tsv((fs::path(*out_dir) / "table.fwd.tsv").string());
    res.reverse.save_tsv((fs::path(*out_dir) / "table.rev.tsv").string());
    res.idf_src.save_tsv((fs::path(*out_dir) / "idf.src.tsv").string());
    res.idf_tgt.save_tsv((fs::path(*out_dir) / "idf.tgt.tsv").string());
    for (const auto& r : res.reports) {
      std::cerr << "iteration " << r.iteration << ": mined " << r.mined_total << ", new "
                << r.mined_new << ", accepted " << r.accepted_new << ", pool " << r.pool_size
                << '\n';
    }
  });
}

void add_score(CLI::App& app) {
  auto* score_cmd = app.add_subcommand("score", "Classifier scoring, normalization, reranking");
  score_cmd->require_subcommand(1);
  {
    auto* cmd = score_cmd->add_subcommand("train", "Train the pair classifier");
    auto args = std::make_shared<ScoreRunArgs>();
    auto seed = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto opts = std::make_shared<TrainOptions>();
    auto neg = std::make_shared<NegativeSamplingConfig>();
    auto max_pos = std::make_shared<std::size_t>(20000);
    cmd->add_option("--seed-pairs", *seed, "Positive pairs TSV")->required();
    cmd->add_option("--fwd", args->fwd)->required();
    cmd->add_option("--rev", args->rev)->required();
    cmd->add_option("--idf-src", args->idf_src)->required();
    cmd->add_option("--idf-tgt", args->idf_tgt)->required();
    cmd->add_option("--langid", args->langid)->required();
    cmd->add_option("--lexicon", args->lexicon);
    cmd->add_option("--src-lang", args->src_lang);
    cmd->add_option("--tgt-lang", args->tgt_lang);
    cmd->add_option("--epochs", opts->epochs);
    cmd->add_option("--learning-rate", opts->learning_rate);
    cmd->add_option("--train-seed", opts->seed, "RNG seed");
    cmd->add_option("--max-positives", *max_pos);
    cmd->add_option("--out", *out_path, "Model output")->required();
    cmd->callback([=]() {
      const FeatureStore store(*args);
      auto pairs = read_pairs(*seed);
      if (pairs.size() > *max_pos) pairs.resize(*max_pos);
      std::vector<std::pair<std::string, std::string>> positives;
      for (const auto& p : pairs) positives.emplace_back(p.src, p.tgt);
      neg->seed = opts->seed;
      const auto negatives = generate_negatives(positives, *neg);
      std::vector<FeatureVector> pos_fv, neg_fv;
      for (const auto& [s, t] : positives) pos_fv.push_back(extract_features(s, t, store.ctx));
      for (const auto& n : negatives) neg_fv.push_back(extract_features(n.src, n.tgt, store.ctx));
      const ScorerModel model = train_scorer(pos_fv, neg_fv, *opts);
      model.save_json(*out_path);
      std::cerr << "held-out accuracy " << model.meta.holdout_accuracy << ", AUC "
                << model.meta.holdout_auc << '\n';
    });
  }
  {
    auto* cmd = score_cmd->add_subcommand("run", "Score pairs with a trained model");
    auto args = std::make_shared<ScoreRunArgs>();
    auto model_path = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--pairs", args->pairs, "Pair TSV")->required();
    cmd->add_option("--model", *model_path, "Classifier model JSON")->required();
    cmd->add_option("--fwd", args->fwd)->required();
    cmd->add_option("--rev", args->rev)->required();
    cmd->add_option("--idf-src", args->idf_src)->required();
    cmd->add_option("--idf-tgt", args->idf_tgt)->required();
    cmd->add_option("--langid", args->langid)->required();
    cmd->add_option("--lexicon", args->lexicon);
    cmd->add_option("--src-lang", args->src_lang);
    cmd->add_option("--tgt-lang", args->tgt_lang);
    cmd->add_option("--output", *out_path, "Raw score file (default: stdout)");
    cmd->callback([=]() {
      const FeatureStore store(*args);
      const ScorerModel model = ScorerModel::load_json(*model_path);
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& p : read_pairs(args->pairs)) pairs.emplace_back(p.src, p.tgt);
      const auto scores = score_pairs(model, pairs, store.ctx);
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const double s : scores) out << format_score(s) << '\n';
    });
  }
  {
    auto* cmd = score_cmd->add_subcommand("normalize", "Rank-normalize a score file");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--scores", *input, "Raw score file")->required();
    cmd->add_option("--output", *out_path, "Normalized score file (default: stdout)");
    cmd->callback([=]() {
      const auto norm = rank_normalize(read_score_file(*input));
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const double s : norm) out << format_score(s) << '\n';
    });
  }
  {
    auto* cmd = score_cmd->add_subcommand(
        "rerank", "Apply language-ID and n-gram coverage discounts to a scored TSV");
    auto input = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    auto langid_path = std::make_shared<std::string>();
    auto lexicon = std::make_shared<std::string>();
    auto src_lang = std::make_shared<std::string>("km");
    auto tgt_lang = std::make_shared<std::string>("en");
    auto alpha = std::make_shared<double>(0.2);
    auto n = std::make_shared<int>(2);
    auto beta = std::make_shared<double>(0.2);
    auto check_src = std::make_shared<bool>(true);
    auto check_tgt = std::make_shared<bool>(true);
    cmd->add_option("--in", *input, "Scored TSV (src<TAB>tgt<TAB>score)")->required();
    cmd->add_option("--langid", *langid_path, "Language-ID model")->required();
    cmd->add_option("--lexicon", *lexicon, "Khmer lexicon for source n-grams");
    cmd->add_option("--src-lang", *src_lang);
    cmd->add_option("--tgt-lang", *tgt_lang);
    cmd->add_option("--alpha", *alpha, "Language-ID discount");
    cmd->add_option("--n", *n, "N-gram order");
    cmd->add_option("--beta", *beta, "Coverage discount");
    cmd->add_flag("!--no-check-src", *check_src, "Skip the source-side language check");
    cmd->add_flag("!--no-check-tgt", *check_tgt, "Skip the target-side language check");
    cmd->add_option("--out", *out_path, "Output TSV")->required();
    cmd->callback([=]() {
      auto scored = read_scored(*input);
      const LangIdModel langid = LangIdModel::load_jsonl(*langid_path);
      const std::size_t lid = rerank_langid(scored, langid, *src_lang, *tgt_lang, *alpha,
                                            *check_src, *check_tgt);
      Tokenizer tok;
      if (*src_lang == "km" && !lexicon->empty()) tok = tokenizer_for(*src_lang, *lexicon, false);
      const std::size_t cov = rerank_ngram_coverage(scored, *n, *beta, tok);
      write_scored(*out_path, scored);
      std::cerr << "discounted " << lid << " by language ID, " << cov << " by coverage\n";
    });
  }
  {
    auto* cmd = score_cmd->add_subcommand("ensemble", "Average aligned normalized score files");
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("scores", *inputs, "Two or more score files")->required()->expected(-2);
    cmd->add_option("--output", *out_path, "Output score file (default: stdout)");
    cmd->callback([=]() {
      std::vector<std::vector<double>> lists;
      for (const auto& path : *inputs) lists.push_back(read_score_file(path));
      const auto avg = ensemble(lists);
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const double s : avg) out << format_score(s) << '\n';
    });
  }
  {
    auto* cmd = score_cmd->add_subcommand(
        "load-external", "Validate an externally computed score file against a pair TSV");
    auto scores = std::make_shared<std::string>();
    auto pairs = std::make_shared<std::string>();
    auto out_path = std::make_shared<std::string>();
    cmd->add_option("--scores", *scores, "External score file, one real per line")->required();
    cmd->add_option("--pairs", *pairs, "Pair TSV the scores align with")->required();
    cmd->add_option("--output", *out_path, "Canonical re-emission (default: stdout)");
    cmd->callback([=]() {
      const std::size_t count = read_pairs(*pairs).size();
      const auto loaded = load_external_scores(*scores, count);
      std::ofstream file;
      std::ostream& out = output(*out_path, file);
      for (const double s : loaded) out << format_score(s) << '\n';
    });
  }
}

void add_subsample(CLI::App& app) {
  auto* cmd = app.add_subcommand("subsample", "Budgeted selection of top-scored pairs");
  auto input = std::make_shared<std::string>();
  auto out_path = std::make_shared<std::string>();
  auto target = std::make_shared<std::uint64_t>(5000000);
  auto exclusive = std::make_shared<bool>(false);
  auto en_side = std::make_shared<std::string>("tgt");
  cmd->add_option("--in", *input, "Scored TSV (src<TAB>tgt<TAB>score)")->required();
  cmd->add_option("--target-en-words", *target, "English word budget");
  cmd->add_flag("--exclusive", *exclusive, "Drop the budget-crossing pair instead of keeping it");
  cmd->add_option("--en-side", *en_side, "Which side is English (src|tgt)")
      ->check(CLI::IsMember({"src", "tgt"}));
  cmd->add_option("--out", *out_path, "Output TSV")->required();
  cmd->callback([=]() {
    const auto scored = read_scored(*input);
    const auto selected = subsample(scored, *target, !*exclusive, *en_side == "tgt");
    write_scored(*out_path, selected);
    std::cerr << "kept " << selected.size() << " of " << scored.size() << " pairs\n";
  });
}

void add_pipeline(CLI::App& app) {
  auto* cmd = app.add_subcommand("pipeline", "Run the full mining and filtering pipeline");
  auto config_path = std::make_shared<std::string>();
  auto out_dir = std::make_shared<std::string>();
  auto seed = std::make_shared<std::int64_t>(-1);
  cmd->add_option("--config", *config_path, "Pipeline config JSON")->required();
  cmd->add_option("--output-dir", *out_dir, "Override paths.output_dir");
  cmd->add_option("--seed", *seed, "Override the global seed");
  cmd->callback([=]() {
    PipelineConfig cfg = PipelineConfig::from_json_file(*config_path);
    if (!out_dir->empty()) cfg.output_dir = *out_dir;
    if (*seed >= 0) cfg.seed = static_cast<std::uint64_t>(*seed);
    const PipelineResult result = run_pipeline(cfg);
    for (const auto& [name, ms] : result.stage_wall_ms) {
      std::cerr << name << ": " << static_cast<long>(ms) << " ms\n";
    }
    std::cerr << "final corpus: " << result.final_tsv_path << " (" << result.subsampled_pairs
              << " pairs of " << result.merged_pairs << ")\n";
  });
}

void add_stats(CLI::App& app) {
  auto* cmd = app.add_subcommand("stats", "Corpus statistics as JSON");
  auto pairs_path = std::make_shared<std::string>();
  auto scores_path = std::make_shared<std::string>();
  auto en_side = std::make_shared<std::string>("tgt");
  cmd->add_option("--pairs", *pairs_path, "Pair TSV")->required();
  cmd->add_option("--scores", *scores_path, "Aligned score file (optional)");
  cmd->add_option("--en-side", *en_side, "Which side is English (src|tgt)")
      ->check(CLI::IsMember({"src", "tgt"}));
  cmd->callback([=]() {
    const auto pairs = read_pairs(*pairs_path);
    if (scores_path->empty()) {
      std::cout << compute_stats(pairs, nullptr, *en_side == "tgt").to_json() << '\n';
    } else {
      const auto scores = read_score_file(*scores_path);
      if (scores.size() != pairs.size())
        throw Error("score count does not match pair count");
      std::cout << compute_stats(pairs, &scores, *en_side == "tgt").to_json() << '\n';
    }
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"volctrans-miner: parallel corpus mining and filtering"};
  app.require_subcommand(1);
  add_textprep(app);
  add_align(app);
  add_sim(app);
  add_mine(app);
  add_score(app);
  add_subsample(app);
  add_pipeline(app);
  add_stats(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const PipelineError& e) {
    std::cerr << "error [" << e.stage << "]: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
