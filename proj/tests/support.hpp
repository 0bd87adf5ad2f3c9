#pragma once

#include <random>
#include <string>

#include "doctest.h"
#include "mlab/core.hpp"

namespace doctest {
template <>
struct StringMaker<mlab::Capital> {
  static String convert(const mlab::Capital& c) { return c.to_string().c_str(); }
};
template <>
struct StringMaker<mlab::Word> {
  static String convert(const mlab::Word& w) { return ("'" + w.to_string() + "'").c_str(); }
};
}  // namespace doctest

namespace mlab::testing {

/// Seeded generator for property tests; failures print the seed.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_); }
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng_);
  }
  int bit() { return static_cast<int>(below(2)); }

  Word word(std::size_t n) {
    Word w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(bit());
    return w;
  }

  Capital rational(long max_num = 1000, unsigned long max_den = 1000) {
    long num = static_cast<long>(between(0, 2 * max_num)) - max_num;
    return Capital(num, between(1, max_den));
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

}  // namespace mlab::testing
