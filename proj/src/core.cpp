#include "mlab/core.hpp"

#include <bit>
#include <cstdlib>
#include <sstream>

namespace mlab {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t parse_u64(const std::string& s) {
  if (s.empty()) throw ParseError("expected a natural number");
  std::uint64_t v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') throw ParseError("expected a natural number, got '" + s + "'");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace

StepBudget default_budget() {
  if (const char* env = std::getenv("MLAB_BUDGET"); env != nullptr && *env != '\0') {
    return StepBudget{parse_u64(env)};
  }
  return StepBudget{1'000'000};
}

Word sequence_prefix(const SequenceSource& source, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = static_cast<std::uint8_t>(source.bit(i));
  return Word(std::move(bits));
}

SequenceSource parse_source(const std::string& id) {
  if (id == "all-zeros") return {[](Position) { return 0; }, id};
  if (id == "all-ones") return {[](Position) { return 1; }, id};
  if (id == "alternating") return {[](Position i) { return static_cast<int>(i & 1); }, id};
  if (id == "thue-morse") {
    return {[](Position i) { return std::popcount(i) & 1; }, id};
  }
  auto colon = id.find(':');
  if (colon != std::string::npos) {
    std::string kind = id.substr(0, colon);
    std::string arg = id.substr(colon + 1);
    if (kind == "period") {
      Word w = Word::parse(arg);
      if (w.empty()) throw ParseError("period source needs a nonempty word");
      return {[w](Position i) { return w[i % w.size()]; }, id};
    }
    if (kind == "word") {
      Word w = Word::parse(arg);
      return {[w](Position i) { return i < w.size() ? w[i] : 0; }, id};
    }
    if (kind == "random") {
      std::uint64_t seed = parse_u64(arg);
      return {[seed](Position i) { return static_cast<int>(splitmix64(seed * 0x100000001b3ull ^ i) >> 63); }, id};
    }
  }
  throw ParseError("unknown source: " + id);
}

Checkpoints validate_checkpoints(std::vector<std::uint64_t> values) {
  if (values.empty()) throw Error("checkpoint list must be nonempty");
  if (values[0] != 0) throw NotIncreasing(0);
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] <= values[i - 1]) throw NotIncreasing(i);
  }
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    if (values[k + 1] < 2 * values[k]) throw DoublingViolation(k);
  }
  Checkpoints cp;
  cp.values_ = std::move(values);
  return cp;
}

std::vector<std::uint64_t> parse_natural_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) throw ParseError("empty item in list '" + text + "'");
    out.push_back(parse_u64(item.substr(b, e - b + 1)));
  }
  return out;
}

std::uint64_t floor_log2(std::uint64_t x) {
  if (x == 0) throw Error("floor_log2(0)");
  return 63 - static_cast<std::uint64_t>(std::countl_zero(x));
}

std::uint64_t ceil_log2(std::uint64_t x) {
  if (x <= 1) return 0;
  return floor_log2(x - 1) + 1;
}

}  // namespace mlab
