#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "vtm/corpus_io.hpp"
#include "vtm/pipeline.hpp"
#include "vtm/scoring.hpp"
#include "vtm/synth_corpus.hpp"

namespace py = pybind11;
using namespace vtm;

namespace {

// Owns every model the feature extractor references, so Python callers
// cannot invalidate the pointers behind a FeatureContext.
struct ScoringContext {
  TranslationTable forward, reverse;
  IdfWeights idf_src, idf_tgt;
  LangIdModel langid;
  std::string src_lang, tgt_lang;
  Tokenizer tokenize_src, tokenize_tgt;
  std::size_t max_tokens = 128;

  FeatureContext view() const {
    FeatureContext ctx;
    ctx.forward = &forward;
    ctx.reverse = &reverse;
    ctx.idf_src = &idf_src;
    ctx.idf_tgt = &idf_tgt;
    ctx.langid = &langid;
    ctx.src_lang = src_lang;
    ctx.tgt_lang = tgt_lang;
    ctx.tokenize_src = tokenize_src;
    ctx.tokenize_tgt = tokenize_tgt;
    ctx.max_tokens = max_tokens;
    return ctx;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Parallel-corpus mining and filtering toolkit";

  // base first: pybind consults translators in reverse registration order
  py::register_exception<Error>(m, "ToolkitError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  // --- text_prep
  py::class_<TokenSequence>(m, "TokenSequence")
      .def(py::init<>())
      .def_readwrite("tokens", &TokenSequence::tokens)
      .def_readwrite("lang", &TokenSequence::lang)
      .def("joined", &TokenSequence::joined)
      .def("__len__", &TokenSequence::size);

  py::class_<KhmerLexicon, std::shared_ptr<KhmerLexicon>>(m, "KhmerLexicon")
      .def_readonly("oov_log_prob", &KhmerLexicon::oov_log_prob)
      .def_readonly("total_count", &KhmerLexicon::total_count)
      .def("__len__", [](const KhmerLexicon& l) { return l.entries.size(); })
      .def("log_prob", &KhmerLexicon::log_prob)
      .def("save", &KhmerLexicon::save_jsonl)
      .def_static("load", &KhmerLexicon::load_jsonl);

  m.def(
      "build_khmer_lexicon",
      [](const std::vector<std::string>& sentences, double oov_log_penalty) {
        return std::make_shared<KhmerLexicon>(build_khmer_lexicon(sentences, oov_log_penalty));
      },
      py::arg("sentences"), py::arg("oov_log_penalty") = 0.0);

  m.def(
      "tokenize",
      [](const std::string& text, const std::string& lang,
         const std::shared_ptr<KhmerLexicon>& lexicon) {
        return tokenize(text, lang, lexicon.get());
      },
      py::arg("text"), py::arg("lang"), py::arg("lexicon") = nullptr);

  m.def(
      "make_tokenizer",
      [](const std::string& lang, const std::shared_ptr<KhmerLexicon>& lexicon, bool lowercase) {
        return make_tokenizer(lang, lexicon, lowercase);
      },
      py::arg("lang"), py::arg("lexicon") = nullptr, py::arg("lowercase") = false);

  m.def("split_sentences", &split_sentences, py::arg("doc_text"), py::arg("lang"));

  py::class_<LangIdModel>(m, "LangIdModel")
      .def_readonly("languages", &LangIdModel::languages)
      .def("save", &LangIdModel::save_jsonl)
      .def_static("load", &LangIdModel::load_jsonl);

  m.def("train_langid", &train_langid, py::arg("samples"));
  m.def("identify_language", &identify_language, py::arg("model"), py::arg("text"));
  m.def("language_posteriors", &language_posteriors, py::arg("model"), py::arg("text"));

  // --- word_align
  py::class_<AlignerConfig>(m, "AlignerConfig")
      .def(py::init<>())
      .def_readwrite("em_iterations", &AlignerConfig::em_iterations)
      .def_readwrite("diagonal_tension", &AlignerConfig::diagonal_tension)
      .def_readwrite("null_prob", &AlignerConfig::null_prob)
      .def_readwrite("prob_floor", &AlignerConfig::prob_floor);

  py::class_<TrainingStats>(m, "TrainingStats")
      .def_readonly("log_likelihood", &TrainingStats::log_likelihood)
      .def_readonly("final_perplexity", &TrainingStats::final_perplexity)
      .def_readonly("table_entries", &TrainingStats::table_entries)
      .def_readonly("training_pairs", &TrainingStats::training_pairs)
      .def_readonly("skipped_pairs", &TrainingStats::skipped_pairs);

  py::class_<TranslationTable>(m, "TranslationTable")
      .def("lookup",
           [](const TranslationTable& t, const std::string& row, const std::string& col) {
             return t.lookup(row, col);
           })
      .def("row_max",
           [](const TranslationTable& t, const std::string& row) { return t.row_max(row); })
      .def("__len__", &TranslationTable::size)
      .def("save", &TranslationTable::save_tsv)
      .def_static(
          "load",
          [](const std::string& path, const std::string& direction) {
            return TranslationTable::load_tsv(path, direction == "reverse"
                                                        ? TranslationTable::Direction::reverse
                                                        : TranslationTable::Direction::forward);
          },
          py::arg("path"), py::arg("direction") = "forward");

  py::class_<AlignerResult>(m, "AlignerResult")
      .def_readonly("forward", &AlignerResult::forward)
      .def_readonly("reverse", &AlignerResult::reverse)
      .def_readonly("forward_stats", &AlignerResult::forward_stats)
      .def_readonly("reverse_stats", &AlignerResult::reverse_stats);

  m.def(
      "train_aligner",
      [](const std::vector<std::pair<TokenSequence, TokenSequence>>& pairs,
         const AlignerConfig& cfg) { return train_aligner(pairs, cfg); },
      py::arg("pairs"), py::arg("config") = AlignerConfig{});

  m.def("align_pair", &align_pair, py::arg("forward"), py::arg("src"), py::arg("tgt"));

  // --- similarity
  py::class_<IdfWeights>(m, "IdfWeights")
      .def_readonly("doc_count", &IdfWeights::doc_count)
      .def_readonly("default_weight", &IdfWeights::default_weight)
      .def("weight", &IdfWeights::weight)
      .def("save", &IdfWeights::save_tsv)
      .def_static("load", &IdfWeights::load_tsv);

  m.def("compute_idf", &compute_idf, py::arg("corpus"));
  m.def("lexical_sim", &lexical_sim, py::arg("forward"), py::arg("reverse"), py::arg("e"),
        py::arg("f"));
  m.def("yisi2_score", &yisi2_score, py::arg("forward"), py::arg("reverse"), py::arg("idf_e"),
        py::arg("idf_f"), py::arg("e"), py::arg("f"));

  // --- mining
  py::class_<DocumentPair>(m, "DocumentPair")
      .def(py::init<>())
      .def_readwrite("doc_id", &DocumentPair::doc_id)
      .def_readwrite("src_segments", &DocumentPair::src_segments)
      .def_readwrite("tgt_segments", &DocumentPair::tgt_segments);

  py::class_<MiningConfig>(m, "MiningConfig")
      .def(py::init<>())
      .def_readwrite("sim_threshold", &MiningConfig::sim_threshold)
      .def_readwrite("join_limit", &MiningConfig::join_limit)
      .def_readwrite("log_c", &MiningConfig::log_c)
      .def_readwrite("dp_min_pair_score", &MiningConfig::dp_min_pair_score)
      .def_readwrite("quality_threshold", &MiningConfig::quality_threshold)
      .def_readwrite("iterations", &MiningConfig::iterations);

  py::class_<SegmentGroup>(m, "SegmentGroup")
      .def_readonly("src_begin", &SegmentGroup::src_begin)
      .def_readonly("src_end", &SegmentGroup::src_end)
      .def_readonly("tgt_begin", &SegmentGroup::tgt_begin)
      .def_readonly("tgt_end", &SegmentGroup::tgt_end)
      .def_readonly("similarity", &SegmentGroup::similarity);

  py::class_<Segmentation>(m, "Segmentation")
      .def_readonly("groups", &Segmentation::groups)
      .def_readonly("score", &Segmentation::score);

  py::class_<GreedyMatch>(m, "GreedyMatch")
      .def_readonly("src_index", &GreedyMatch::src_index)
      .def_readonly("tgt_index", &GreedyMatch::tgt_index)
      .def_readonly("similarity", &GreedyMatch::similarity);

  py::enum_<Provenance>(m, "Provenance")
      .value("greedy", Provenance::greedy)
      .value("dp", Provenance::dp)
      .value("provided", Provenance::provided);

  py::class_<MinedPair>(m, "MinedPair")
      .def_readonly("src", &MinedPair::src)
      .def_readonly("tgt", &MinedPair::tgt)
      .def_readonly("similarity", &MinedPair::similarity)
      .def_readonly("provenance", &MinedPair::provenance)
      .def_readonly("iteration", &MinedPair::iteration);

  py::class_<MinedCorpus>(m, "MinedCorpus")
      .def_readonly("pairs", &MinedCorpus::pairs)
      .def_readonly("skipped_docs", &MinedCorpus::skipped_docs);

  py::class_<IterationReport>(m, "IterationReport")
      .def_readonly("iteration", &IterationReport::iteration)
      .def_readonly("forward_stats", &IterationReport::forward_stats)
      .def_readonly("reverse_stats", &IterationReport::reverse_stats)
      .def_readonly("mined_total", &IterationReport::mined_total)
      .def_readonly("mined_new", &IterationReport::mined_new)
      .def_readonly("accepted_new", &IterationReport::accepted_new)
      .def_readonly("pool_size", &IterationReport::pool_size);

  py::class_<IterativeMineResult>(m, "IterativeMineResult")
      .def_readonly("corpus", &IterativeMineResult::corpus)
      .def_readonly("reports", &IterativeMineResult::reports)
      .def_readonly("forward", &IterativeMineResult::forward)
      .def_readonly("reverse", &IterativeMineResult::reverse)
      .def_readonly("idf_src", &IterativeMineResult::idf_src)
      .def_readonly("idf_tgt", &IterativeMineResult::idf_tgt);

  m.def("greedy_extract", &greedy_extract, py::arg("doc"), py::arg("scorer"),
        py::arg("threshold"));
  m.def("dp_segment", &dp_segment, py::arg("doc"), py::arg("scorer"), py::arg("config"));
  m.def(
      "dedup",
      [](std::vector<MinedPair> pairs) { return dedup(std::move(pairs)); },
      py::arg("pairs"));
  m.def("mine_documents", &mine_documents, py::arg("docs"), py::arg("scorer"), py::arg("config"),
        py::arg("iteration") = 1);
  m.def("iterative_mine", &iterative_mine, py::arg("seed_pairs"), py::arg("docs"),
        py::arg("config"), py::arg("aligner_config"), py::arg("tokenize_src"),
        py::arg("tokenize_tgt"));

  // --- scoring
  py::enum_<NegativeMode>(m, "NegativeMode")
      .value("shuffle_misalign", NegativeMode::shuffle_misalign)
      .value("truncate_to_3", NegativeMode::truncate_to_3)
      .value("shuffle_order", NegativeMode::shuffle_order)
      .value("swap_or_copy", NegativeMode::swap_or_copy);

  py::class_<LabeledPair>(m, "LabeledPair")
      .def_readonly("src", &LabeledPair::src)
      .def_readonly("tgt", &LabeledPair::tgt)
      .def_readonly("mode", &LabeledPair::mode);

  py::class_<NegativeSamplingConfig>(m, "NegativeSamplingConfig")
      .def(py::init<>())
      .def_readwrite("shuffle_misalign", &NegativeSamplingConfig::shuffle_misalign)
      .def_readwrite("truncate_to_3", &NegativeSamplingConfig::truncate_to_3)
      .def_readwrite("shuffle_order", &NegativeSamplingConfig::shuffle_order)
      .def_readwrite("swap_or_copy", &NegativeSamplingConfig::swap_or_copy)
      .def_readwrite("seed", &NegativeSamplingConfig::seed);

  m.def("generate_negatives", &generate_negatives, py::arg("positives"), py::arg("config"));

  py::class_<ScoringContext>(m, "ScoringContext")
      .def(py::init([](const TranslationTable& fwd, const TranslationTable& rev,
                       const IdfWeights& idf_src, const IdfWeights& idf_tgt,
                       const LangIdModel& langid, const std::string& src_lang,
                       const std::string& tgt_lang, const Tokenizer& tokenize_src,
                       const Tokenizer& tokenize_tgt, std::size_t max_tokens) {
             auto ctx = std::make_unique<ScoringContext>();
             ctx->forward = fwd;
             ctx->reverse = rev;
             ctx->idf_src = idf_src;
             ctx->idf_tgt = idf_tgt;
             ctx->langid = langid;
             ctx->src_lang = src_lang;
             ctx->tgt_lang = tgt_lang;
             ctx->tokenize_src = tokenize_src;
             ctx->tokenize_tgt = tokenize_tgt;
             ctx->max_tokens = max_tokens;
             return ctx;
           }),
           py::arg("forward"), py::arg("reverse"), py::arg("idf_src"), py::arg("idf_tgt"),
           py::arg("langid"), py::arg("src_lang"), py::arg("tgt_lang"), py::arg("tokenize_src"),
           py::arg("tokenize_tgt"), py::arg("max_tokens") = 128);

  py::class_<FeatureVector>(m, "FeatureVector")
      .def_readonly("valid", &FeatureVector::valid)
      .def_property_readonly("values", [](const FeatureVector& fv) {
        return std::vector<double>(fv.values.begin(), fv.values.end());
      });

  m.def("feature_names", [] {
    return std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
  });
  m.def(
      "extract_features",
      [](const std::string& src, const std::string& tgt, const ScoringContext& ctx) {
        return extract_features(src, tgt, ctx.view());
      },
      py::arg("src"), py::arg("tgt"), py::arg("context"));

  py::class_<TrainOptions>(m, "TrainOptions")
      .def(py::init<>())
      .def_readwrite("learning_rate", &TrainOptions::learning_rate)
      .def_readwrite("epochs", &TrainOptions::epochs)
      .def_readwrite("seed", &TrainOptions::seed)
      .def_readwrite("l2", &TrainOptions::l2)
      .def_readwrite("holdout_fraction", &TrainOptions::holdout_fraction);

  py::class_<ScorerModel::Metadata>(m, "ScorerMetadata")
      .def_readonly("epochs", &ScorerModel::Metadata::epochs)
      .def_readonly("learning_rate", &ScorerModel::Metadata::learning_rate)
      .def_readonly("seed", &ScorerModel::Metadata::seed)
      .def_readonly("holdout_accuracy", &ScorerModel::Metadata::holdout_accuracy)
      .def_readonly("holdout_auc", &ScorerModel::Metadata::holdout_auc)
      .def_readonly("train_examples", &ScorerModel::Metadata::train_examples)
      .def_readonly("holdout_examples", &ScorerModel::Metadata::holdout_examples);

  py::class_<ScorerModel>(m, "ScorerModel")
      .def_readonly("feature_names", &ScorerModel::feature_names)
      .def_readonly("weights", &ScorerModel::weights)
      .def_readonly("bias", &ScorerModel::bias)
      .def_readonly("meta", &ScorerModel::meta)
      .def("predict", &ScorerModel::predict)
      .def("save", &ScorerModel::save_json)
      .def_static("load", &ScorerModel::load_json);

  m.def("train_scorer", &train_scorer, py::arg("positives"), py::arg("negatives"),
        py::arg("options") = TrainOptions{});
  m.def("auc_score", &auc_score, py::arg("scores"), py::arg("labels"));
  m.def(
      "score_pairs",
      [](const ScorerModel& model, const std::vector<std::pair<std::string, std::string>>& pairs,
         const ScoringContext& ctx) { return score_pairs(model, pairs, ctx.view()); },
      py::arg("model"), py::arg("pairs"), py::arg("context"));

  m.def("rank_normalize", &rank_normalize, py::arg("raw_scores"));

  py::class_<ScoredPair>(m, "ScoredPair")
      .def(py::init([](const std::string& src, const std::string& tgt, double raw, double norm,
                       double final_score) {
             return ScoredPair{src, tgt, raw, norm, final_score};
           }),
           py::arg("src"), py::arg("tgt"), py::arg("raw_score") = 0.0, py::arg("norm_score") = 0.0,
           py::arg("final_score") = 0.0)
      .def_readwrite("src", &ScoredPair::src)
      .def_readwrite("tgt", &ScoredPair::tgt)
      .def_readwrite("raw_score", &ScoredPair::raw_score)
      .def_readwrite("norm_score", &ScoredPair::norm_score)
      .def_readwrite("final_score", &ScoredPair::final_score);

  m.def(
      "rerank_langid",
      [](std::vector<ScoredPair> scored, const LangIdModel& model, const std::string& src_lang,
         const std::string& tgt_lang, double alpha, bool check_src, bool check_tgt) {
        rerank_langid(scored, model, src_lang, tgt_lang, alpha, check_src, check_tgt);
        return scored;
      },
      py::arg("scored"), py::arg("model"), py::arg("expected_src_lang"),
      py::arg("expected_tgt_lang"), py::arg("alpha"), py::arg("check_src") = true,
      py::arg("check_tgt") = true);

  m.def(
      "rerank_ngram_coverage",
      [](std::vector<ScoredPair> scored, int n, double beta, const Tokenizer& tokenize_src) {
        rerank_ngram_coverage(scored, n, beta, tokenize_src);
        return scored;
      },
      py::arg("scored"), py::arg("n"), py::arg("beta"), py::arg("tokenize_src") = nullptr);

  m.def("ensemble", &ensemble, py::arg("score_lists"));
  m.def("load_external_scores", &load_external_scores, py::arg("path"),
        py::arg("expected_count"));

  // --- corpus_io and pipeline
  py::class_<PairRecord>(m, "PairRecord")
      .def(py::init([](const std::string& src, const std::string& tgt) {
             return PairRecord{src, tgt};
           }),
           py::arg("src"), py::arg("tgt"))
      .def_readwrite("src", &PairRecord::src)
      .def_readwrite("tgt", &PairRecord::tgt);

  m.def("read_pairs", &read_pairs, py::arg("path"));
  m.def("write_pairs", &write_pairs, py::arg("path"), py::arg("pairs"));
  m.def("read_scored", &read_scored, py::arg("path"));
  m.def("write_scored", &write_scored, py::arg("path"), py::arg("scored"));
  m.def("read_score_file", &read_score_file, py::arg("path"));
  m.def("write_score_file", &write_score_file, py::arg("path"), py::arg("scores"));
  m.def(
      "read_document_pairs",
      [](const std::string& path, const std::string& src_lang, const std::string& tgt_lang) {
        const auto result = read_document_pairs_jsonl(path, src_lang, tgt_lang);
        return py::make_tuple(result.docs, result.skipped_lines);
      },
      py::arg("path"), py::arg("src_lang"), py::arg("tgt_lang"));
  m.def("write_document_pairs", &write_document_pairs_jsonl, py::arg("path"),
        py::arg("raw_docs"), py::arg("doc_ids"));
  m.def(
      "merge_corpora",
      [](const std::vector<PairRecord>& provided, const std::vector<MinedCorpus*>& mined) {
        std::vector<const MinedCorpus*> ptrs(mined.begin(), mined.end());
        return merge_corpora(provided, ptrs);
      },
      py::arg("provided"), py::arg("mined"));

  py::class_<CorpusEntry>(m, "CorpusEntry")
      .def_readonly("src", &CorpusEntry::src)
      .def_readonly("tgt", &CorpusEntry::tgt)
      .def_readonly("similarity", &CorpusEntry::similarity)
      .def_readonly("provenance", &CorpusEntry::provenance)
      .def_readonly("iteration", &CorpusEntry::iteration);

  m.def("subsample", &subsample, py::arg("scored"), py::arg("target_en_words"),
        py::arg("inclusive") = true, py::arg("en_is_target") = true);

  py::class_<CorpusStats>(m, "CorpusStats")
      .def_readonly("pair_count", &CorpusStats::pair_count)
      .def_readonly("en_words", &CorpusStats::en_words)
      .def_readonly("src_words", &CorpusStats::src_words)
      .def_readonly("duplicate_rate", &CorpusStats::duplicate_rate)
      .def_readonly("has_scores", &CorpusStats::has_scores)
      .def_property_readonly("score_histogram",
                             [](const CorpusStats& s) {
                               return std::vector<std::uint64_t>(s.score_histogram.begin(),
                                                                 s.score_histogram.end());
                             })
      .def("to_json", &CorpusStats::to_json);

  m.def(
      "compute_stats",
      [](const std::vector<PairRecord>& pairs, const std::vector<double>& scores,
         bool en_is_target) {
        return scores.empty() ? compute_stats(pairs, nullptr, en_is_target)
                              : compute_stats(pairs, &scores, en_is_target);
      },
      py::arg("pairs"), py::arg("scores") = std::vector<double>{}, py::arg("en_is_target") = true);

  py::class_<PipelineResult>(m, "PipelineResult")
      .def_readonly("output_dir", &PipelineResult::output_dir)
      .def_readonly("stage_wall_ms", &PipelineResult::stage_wall_ms)
      .def_readonly("merged_pairs", &PipelineResult::merged_pairs)
      .def_readonly("subsampled_pairs", &PipelineResult::subsampled_pairs)
      .def_readonly("final_tsv_path", &PipelineResult::final_tsv_path)
      .def_readonly("manifest_path", &PipelineResult::manifest_path);

  m.def(
      "run_pipeline",
      [](const std::string& config_path, const std::string& output_dir_override) {
        PipelineConfig cfg = PipelineConfig::from_json_file(config_path);
        if (!output_dir_override.empty()) cfg.output_dir = output_dir_override;
        return run_pipeline(cfg);
      },
      py::arg("config_path"), py::arg("output_dir") = "");
}
