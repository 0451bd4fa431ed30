// Regenerates the bundled demo corpora under data/demo/: deterministic
// synthetic km-en and ps-en seed corpora, document pairs, and pipeline
// configs sized to finish in seconds.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vtm/corpus_io.hpp"
#include "vtm/synth_corpus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vtm;

namespace {

void emit_pair(const std::string& pair, const fs::path& dir, int seed_pairs, int doc_pairs) {
  SynthOptions opt;
  opt.language_pair = pair;
  opt.vocab_size = 400;
  opt.seed = pair == "km-en" ? 20200501 : 20200502;
  const SynthCorpus synth(opt);
  std::mt19937_64 rng(opt.seed + 1);

  const auto seed = synth.make_pairs(static_cast<std::size_t>(seed_pairs), rng);
  std::vector<PairRecord> records;
  for (const auto& [s, t] : seed) records.push_back({s, t});
  write_pairs((dir / ("seed." + pair + ".tsv")).string(), records);

  const auto built = synth.make_documents(
      synth.make_pairs(static_cast<std::size_t>(doc_pairs), rng), 10, 0.1, rng);
  std::vector<std::pair<std::string, std::string>> raw_docs;
  std::vector<std::string> ids;
  for (const auto& doc : built.docs) {
    raw_docs.emplace_back(join_str(doc.src_segments, " "), join_str(doc.tgt_segments, " "));
    ids.push_back(doc.doc_id);
  }
  write_document_pairs_jsonl((dir / ("docs." + pair + ".jsonl")).string(), raw_docs, ids);

  json config = {
      {"language_pair", pair},
      {"seed", 20200501},
      {"paths",
       {{"seed_corpus", "data/demo/seed." + pair + ".tsv"},
        {"documents", "data/demo/docs." + pair + ".jsonl"},
        {"output_dir", "out/" + pair}}},
      {"aligner", {{"em_iterations", 5}, {"diagonal_tension", 4.0}}},
      {"mining",
       {{"sim_threshold", 0.5}, {"quality_threshold", 0.7}, {"iterations", 3}}},
      {"scorer", {{"epochs", 20}, {"learning_rate", 0.1}}},
      {"rerank", {{"preset", pair}}},
      {"subsample", {{"target_en_words", 20000}}}};
  std::ofstream out((dir / ("config." + pair + ".json")).string(), std::ios::binary);
  out << config.dump(2) << '\n';
  std::cout << pair << ": " << seed_pairs << " seed pairs, " << built.docs.size()
            << " documents\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate the bundled demo data"};
  std::string out_dir = "data/demo";
  int seed_pairs = 2000;
  int doc_pairs = 2000;
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed-pairs", seed_pairs, "Seed corpus size per language pair");
  app.add_option("--doc-pairs", doc_pairs, "Planted sentence pairs across the documents");
  CLI11_PARSE(app, argc, argv);

  try {
    fs::create_directories(out_dir);
    emit_pair("km-en", out_dir, seed_pairs, doc_pairs);
    emit_pair("ps-en", out_dir, seed_pairs, doc_pairs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
