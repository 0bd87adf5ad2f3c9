#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlab/capital.hpp"
#include "mlab/word.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Raised for an error tied to a specific word.
class WordError : public Error {
 public:
  WordError(const std::string& what, Word at) : Error(what + " at '" + at.to_string() + "'"), at_(std::move(at)) {}
  const Word& at() const noexcept { return at_; }

 private:
  Word at_;
};

class DoublingViolation : public Error {
 public:
  explicit DoublingViolation(std::size_t k)
      : Error("checkpoint doubling condition fails at index " + std::to_string(k)), k_(k) {}
  /// The index k with n_{k+1} < 2 n_k.
  std::size_t index() const noexcept { return k_; }

 private:
  std::size_t k_;
};

class NotIncreasing : public Error {
 public:
  explicit NotIncreasing(std::size_t k)
      : Error("checkpoints must start at 0 and strictly increase (index " + std::to_string(k) + ")"), k_(k) {}
  std::size_t index() const noexcept { return k_; }

 private:
  std::size_t k_;
};

// ---------------------------------------------------------------------------
// Budgets

/// Upper bound on the number of steps a computation may take. A computation
/// that needs more steps than its budget is treated as not halting.
struct StepBudget {
  std::uint64_t steps = 0;

  friend auto operator<=>(const StepBudget&, const StepBudget&) = default;
};

inline constexpr StepBudget kUnlimitedBudget{std::uint64_t{1} << 62};

/// Counts down a StepBudget.
class Meter {
 public:
  explicit Meter(StepBudget b) : left_(b.steps) {}
  /// Returns false (and drains the meter) if fewer than n steps remain.
  bool charge(std::uint64_t n) noexcept {
    if (n > left_) {
      left_ = 0;
      exhausted_ = true;
      return false;
    }
    left_ -= n;
    return true;
  }
  bool exhausted() const noexcept { return exhausted_; }
  std::uint64_t left() const noexcept { return left_; }

 private:
  std::uint64_t left_;
  bool exhausted_ = false;
};

/// Default budget, overridable through the MLAB_BUDGET environment variable.
StepBudget default_budget();

// ---------------------------------------------------------------------------
// Sequence sources

/// A deterministic infinite binary sequence given by its bit oracle.
class SequenceSource {
 public:
  SequenceSource(std::function<int(Position)> generator, std::string description)
      : generator_(std::move(generator)), description_(std::move(description)) {}

  int bit(Position i) const { return generator_(i) & 1; }
  const std::string& description() const noexcept { return description_; }

 private:
  std::function<int(Position)> generator_;
  std::string description_;
};

/// The word A(0)A(1)...A(n-1).
Word sequence_prefix(const SequenceSource& source, std::size_t n);

/// Builds a source from its catalog id: all-zeros, all-ones, alternating,
/// thue-morse, period:<word>, word:<word> (then zeros), random:<seed>.
SequenceSource parse_source(const std::string& id);

// ---------------------------------------------------------------------------
// Checkpoints

/// Increasing naturals n_0 = 0 < n_1 < ... with n_{k+1} >= 2 n_k for k >= 1.
class Checkpoints {
 public:
  const std::vector<std::uint64_t>& values() const noexcept { return values_; }
  std::size_t interval_count() const noexcept { return values_.size() - 1; }
  std::uint64_t interval_begin(std::size_t k) const { return values_.at(k); }
  std::uint64_t interval_end(std::size_t k) const { return values_.at(k + 1); }
  std::uint64_t interval_length(std::size_t k) const { return interval_end(k) - interval_begin(k); }
  std::uint64_t horizon() const { return values_.back(); }

 private:
  friend Checkpoints validate_checkpoints(std::vector<std::uint64_t> values);
  std::vector<std::uint64_t> values_;
};

Checkpoints validate_checkpoints(std::vector<std::uint64_t> values);

/// Parses "0,8,32" into naturals.
std::vector<std::uint64_t> parse_natural_list(const std::string& text);

std::uint64_t floor_log2(std::uint64_t x);
std::uint64_t ceil_log2(std::uint64_t x);

}  // namespace mlab
