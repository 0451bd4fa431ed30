#include "vtm/synth_corpus.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "vtm/text_prep.hpp"

namespace vtm {

namespace {

std::string make_word(std::mt19937_64& rng, const std::string& lang) {
  std::string w;
  if (lang == "en") {
    const int len = 3 + static_cast<int>(rng_below(rng, 6));
    for (int i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng_below(rng, 26)));
  } else if (lang == "km") {
    // Khmer consonants and independent vowels, U+1780..U+17A2
    const int len = 2 + static_cast<int>(rng_below(rng, 4));
    for (int i = 0; i < len; ++i) {
      append_utf8(w, static_cast<char32_t>(0x1780 + rng_below(rng, 0x23)));
    }
  } else {  // ps: Arabic letters U+0621..U+063A and U+0641..U+064A
    const int len = 3 + static_cast<int>(rng_below(rng, 5));
    for (int i = 0; i < len; ++i) {
      const std::uint64_t r = rng_below(rng, 0x1A + 0x0A);
      const char32_t cp = r < 0x1A ? static_cast<char32_t>(0x0621 + r)
                                   : static_cast<char32_t>(0x0641 + (r - 0x1A));
      append_utf8(w, cp);
    }
  }
  return w;
}

std::vector<std::string> make_vocab(std::mt19937_64& rng, const std::string& lang, int size) {
  std::set<std::string> seen;
  std::vector<std::string> vocab;
  vocab.reserve(static_cast<std::size_t>(size));
  while (static_cast<int>(vocab.size()) < size) {
    std::string w = make_word(rng, lang);
    if (seen.insert(w).second) vocab.push_back(std::move(w));
  }
  return vocab;
}

}  // namespace

SynthCorpus::SynthCorpus(SynthOptions options) : options_(std::move(options)) {
  const auto parts = split_str(options_.language_pair, '-');
  if (parts.size() != 2) throw ConfigError("SynthCorpus: bad language pair");
  src_lang_ = parts[0];
  tgt_lang_ = parts[1];
  std::mt19937_64 rng(options_.seed);
  src_vocab_ = make_vocab(rng, src_lang_, options_.vocab_size);
  tgt_vocab_ = make_vocab(rng, tgt_lang_, options_.vocab_size);
  src_noise_ = make_vocab(rng, src_lang_, options_.noise_vocab_size);
  tgt_noise_ = make_vocab(rng, tgt_lang_, options_.noise_vocab_size);
  secondary_.resize(static_cast<std::size_t>(options_.vocab_size));
  for (int i = 0; i < options_.vocab_size; ++i) {
    secondary_[static_cast<std::size_t>(i)] =
        static_cast<int>(rng_below(rng, static_cast<std::uint64_t>(options_.vocab_size)));
  }
}

std::string SynthCorpus::render_src_sentence(const std::vector<int>& ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (const int id : ids) words.push_back(src_vocab_[static_cast<std::size_t>(id)]);
  if (src_lang_ == "km") {
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) append_utf8(text, kZwsp);
      text += words[i];
    }
    append_utf8(text, 0x17D4);  // khan
    return text;
  }
  return join_str(words, " ") + ".";
}

std::string SynthCorpus::render_tgt_sentence(const std::vector<int>& ids) const {
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (const int id : ids) words.push_back(tgt_vocab_[static_cast<std::size_t>(id)]);
  return join_str(words, " ") + ".";
}

std::vector<int> SynthCorpus::sample_ids(std::mt19937_64& rng, const std::vector<VocabRange>& mix,
                                         int min_tokens, int max_tokens) const {
  const int len =
      min_tokens + static_cast<int>(rng_below(
                       rng, static_cast<std::uint64_t>(max_tokens - min_tokens + 1)));
  double total_weight = 0.0;
  for (const auto& r : mix) total_weight += r.weight;
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(len));
  for (int k = 0; k < len; ++k) {
    double pick = rng_unit(rng) * total_weight;
    const VocabRange* range = &mix.back();
    for (const auto& r : mix) {
      if (pick < r.weight) {
        range = &r;
        break;
      }
      pick -= r.weight;
    }
    // mild Zipf-like skew toward the low end of the range
    const double u = rng_unit(rng);
    const int span = range->hi - range->lo;
    ids.push_back(range->lo + std::min(span - 1, static_cast<int>(u * u * span)));
  }
  return ids;
}

std::pair<std::string, std::string> SynthCorpus::make_pair(std::mt19937_64& rng) const {
  return make_pair(rng, {{0, options_.vocab_size, 1.0}});
}

std::pair<std::string, std::string> SynthCorpus::make_pair(
    std::mt19937_64& rng, const std::vector<VocabRange>& mix) const {
  const std::vector<int> src_ids = sample_ids(rng, mix, options_.min_tokens, options_.max_tokens);
  std::vector<int> tgt_ids;
  tgt_ids.reserve(src_ids.size() + 2);
  for (const int id : src_ids) {
    if (rng_unit(rng) < options_.translation_drop && src_ids.size() > 1) continue;
    const bool alt = rng_unit(rng) < options_.secondary_translation;
    tgt_ids.push_back(alt ? secondary_[static_cast<std::size_t>(id)] : id);
    if (rng_unit(rng) < options_.translation_insert) {
      tgt_ids.push_back(static_cast<int>(
          rng_below(rng, static_cast<std::uint64_t>(options_.vocab_size))));
    }
  }
  if (tgt_ids.empty()) tgt_ids.push_back(src_ids.front());
  return {render_src_sentence(src_ids), render_tgt_sentence(tgt_ids)};
}

std::vector<std::pair<std::string, std::string>> SynthCorpus::make_pairs(
    std::size_t n, std::mt19937_64& rng) const {
  std::vector<std::pair<std::string, std::string>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(make_pair(rng));
  return out;
}

std::string SynthCorpus::make_noise_sentence(std::mt19937_64& rng, bool src_side, int min_tokens,
                                             int max_tokens) const {
  const auto& vocab = src_side ? src_noise_ : tgt_noise_;
  const int len =
      min_tokens + static_cast<int>(rng_below(
                       rng, static_cast<std::uint64_t>(max_tokens - min_tokens + 1)));
  std::vector<int> ids;
  ids.reserve(static_cast<std::size_t>(len));
  for (int k = 0; k < len; ++k) {
    ids.push_back(static_cast<int>(rng_below(rng, vocab.size())));
  }
  std::vector<std::string> words;
  words.reserve(ids.size());
  for (const int id : ids) words.push_back(vocab[static_cast<std::size_t>(id)]);
  if (src_side && src_lang_ == "km") {
    std::string text;
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (i) append_utf8(text, kZwsp);
      text += words[i];
    }
    append_utf8(text, 0x17D4);
    return text;
  }
  return join_str(words, " ") + ".";
}

SynthCorpus::DocBuildResult SynthCorpus::make_documents(
    const std::vector<std::pair<std::string, std::string>>& pairs, std::size_t sentences_per_doc,
    double noise_rate, std::mt19937_64& rng) const {
  DocBuildResult result;
  result.planted = pairs;
  std::size_t doc_index = 0;
  for (std::size_t begin = 0; begin < pairs.size(); begin += sentences_per_doc) {
    const std::size_t end = std::min(pairs.size(), begin + sentences_per_doc);
    std::vector<std::string> src_sents, tgt_sents;
    for (std::size_t i = begin; i < end; ++i) {
      if (rng_unit(rng) < noise_rate) src_sents.push_back(make_noise_sentence(rng, true));
      if (rng_unit(rng) < noise_rate) tgt_sents.push_back(make_noise_sentence(rng, false));
      src_sents.push_back(pairs[i].first);
      tgt_sents.push_back(pairs[i].second);
    }
    DocumentPair doc;
    doc.doc_id = "doc-" + std::to_string(doc_index++);
    const std::string src_text = join_str(src_sents, " ");
    const std::string tgt_text = join_str(tgt_sents, " ");
    doc.src_segments = split_sentences(src_text, src_lang_);
    doc.tgt_segments = split_sentences(tgt_text, tgt_lang_);
    result.docs.push_back(std::move(doc));
  }
  return result;
}

}  // namespace vtm
