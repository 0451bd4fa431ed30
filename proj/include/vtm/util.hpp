#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vtm {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad or missing configuration (invalid option values, missing models).
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input data; carries "file:line" context where available.
struct ParseError : Error {
  using Error::Error;
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what) {}
};

// ---------------------------------------------------------------------------
// UTF-8

inline constexpr char32_t kZwsp = 0x200B;        // zero-width space
inline constexpr char32_t kReplacement = 0xFFFD;

// Decodes UTF-8, substituting U+FFFD for invalid byte sequences.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

// Whitespace for normalization purposes. U+200B is deliberately excluded:
// it acts as a separator only inside the Khmer tokenizer.
bool is_space_cp(char32_t cp);
bool is_digit_cp(char32_t cp);
// Punctuation and symbol codepoints that the tokenizer detaches.
bool is_punct_cp(char32_t cp);

// ---------------------------------------------------------------------------
// String helpers

// Collapses whitespace runs to a single space and trims the ends.
std::string normalize_ws(std::string_view s);
// ASCII-only lowercasing; multibyte sequences pass through untouched.
std::string ascii_lower(std::string_view s);
// Key used for deduplication: whitespace-normalized, case-folded text.
std::string dedup_key(std::string_view src, std::string_view tgt);

std::vector<std::string> split_str(std::string_view s, char sep);
std::string join_str(const std::vector<std::string>& parts, std::string_view sep);

// Strips one trailing '\r' (CRLF input is accepted everywhere).
std::string_view strip_cr(std::string_view line);

// Fixed-format float for TSV/score files; stable across runs.
std::string format_score(double v);

// FNV-1a over bytes, used for config hashes in run manifests.
std::uint64_t fnv1a(std::string_view s);
std::string to_hex(std::uint64_t v);

// ---------------------------------------------------------------------------
// Deterministic randomness
//
// std::mt19937_64 output is pinned by the standard; the distributions are
// not, so the helpers below implement their own mapping.

std::uint64_t rng_below(std::mt19937_64& rng, std::uint64_t n);  // uniform [0, n)
double rng_unit(std::mt19937_64& rng);                           // uniform [0, 1)

template <typename T>
void shuffle_det(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Sattolo's algorithm: a uniform random cyclic permutation. Every element
// moves, so the result is always a derangement (n >= 2).
std::vector<std::size_t> random_cyclic_permutation(std::size_t n, std::mt19937_64& rng);

// ---------------------------------------------------------------------------
// Parallelism

// Worker count from VOLCTRANS_WORKERS, defaulting to the hardware count.
int worker_count();

// Runs fn(i) for i in [0, n) on several threads, then folds the results in
// index order. The fold order is fixed, so floating-point accumulations are
// reproducible regardless of the worker count.
template <typename Result, typename MapFn, typename FoldFn>
void parallel_map_ordered_fold(std::size_t n, MapFn map_fn, FoldFn fold_fn,
                               std::size_t batch_size = 1024);

namespace detail {
void run_indexed_parallel(std::size_t begin, std::size_t end,
                          const std::function<void(std::size_t)>& task);
}

template <typename Result, typename MapFn, typename FoldFn>
void parallel_map_ordered_fold(std::size_t n, MapFn map_fn, FoldFn fold_fn,
                               std::size_t batch_size) {
  std::vector<Result> slots;
  for (std::size_t begin = 0; begin < n; begin += batch_size) {
    const std::size_t end = std::min(n, begin + batch_size);
    slots.assign(end - begin, Result{});
    detail::run_indexed_parallel(begin, end, [&](std::size_t i) { slots[i - begin] = map_fn(i); });
    for (std::size_t i = begin; i < end; ++i) fold_fn(i, std::move(slots[i - begin]));
  }
}

}  // namespace vtm
