#include <cstdlib>

#include "doctest.h"
#include "vtm/util.hpp"

using namespace vtm;

TEST_SUITE_BEGIN("util");

TEST_CASE("normalize_ws collapses runs and trims") {
  CHECK(normalize_ws("  a\t b\n\nc  ") == "a b c");
  CHECK(normalize_ws("") == "");
  CHECK(normalize_ws(" \t\n ") == "");
  CHECK(normalize_ws("one") == "one");
}

TEST_CASE("normalize_ws keeps zero-width space") {
  std::string s = "a";
  append_utf8(s, kZwsp);
  s += "b";
  CHECK(normalize_ws(s) == s);
}

TEST_CASE("dedup_key folds case and inner spaces") {
  CHECK(dedup_key("Hello  World", "X") == dedup_key("hello world", "x"));
  CHECK(dedup_key("a", "b") != dedup_key("b", "a"));
}

TEST_CASE("utf8 round trip") {
  const std::string s = "abc \xE1\x9E\x80\xE1\x9E\x81 \xD9\x85\xD8\xB1";  // Khmer + Arabic
  CHECK(encode_utf8(decode_utf8(s)) == s);
  const std::u32string cps = decode_utf8(s);
  CHECK(cps.size() == 9);
}

TEST_CASE("utf8 invalid bytes become replacement chars") {
  const std::u32string cps = decode_utf8("a\xFFz");
  REQUIRE(cps.size() == 3);
  CHECK(cps[1] == kReplacement);
  // truncated sequence
  CHECK(decode_utf8("\xE1\x9E").size() == 2);
}

TEST_CASE("split and join") {
  CHECK(split_str("a\tb\tc", '\t') == std::vector<std::string>{"a", "b", "c"});
  CHECK(split_str("", '\t') == std::vector<std::string>{""});
  CHECK(join_str({"a", "b"}, " ") == "a b");
}

TEST_CASE("strip_cr") {
  CHECK(strip_cr("x\r") == "x");
  CHECK(strip_cr("x") == "x");
}

TEST_CASE("rng helpers are deterministic and bounded") {
  std::mt19937_64 r1(7), r2(7);
  for (int i = 0; i < 100; ++i) {
    const auto a = rng_below(r1, 17);
    CHECK(a == rng_below(r2, 17));
    CHECK(a < 17);
    const double u = rng_unit(r1);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    rng_unit(r2);
  }
}

TEST_CASE("cyclic permutation is a derangement") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng_below(rng, 12);
    const auto perm = random_cyclic_permutation(n, rng);
    std::vector<bool> hit(n, false);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(perm[i] != i);
      hit[perm[i]] = true;
    }
    CHECK(std::count(hit.begin(), hit.end(), true) == static_cast<long>(n));
  }
}

TEST_CASE("parallel fold is reproducible across worker counts") {
  auto run = [](const char* workers) {
    setenv("VOLCTRANS_WORKERS", workers, 1);
    double sum = 0.0;
    parallel_map_ordered_fold<double>(
        1000, [](std::size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); },
        [&](std::size_t, double&& v) { sum += v; }, 64);
    unsetenv("VOLCTRANS_WORKERS");
    return sum;
  };
  const double s1 = run("1");
  const double s4 = run("4");
  CHECK(s1 == s4);  // bitwise: fold order is fixed
}

TEST_SUITE_END();
