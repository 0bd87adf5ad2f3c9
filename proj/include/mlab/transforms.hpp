#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlab/strategy.hpp"

namespace mlab {

class HorizonTooLarge : public Error {
 public:
  using Error::Error;
};

class NoBound : public Error {
 public:
  using Error::Error;
};

/// Neither event of the totalization race happened within the budget.
class RaceTimeout : public WordError {
 public:
  explicit RaceTimeout(Word at) : WordError("totalization race timed out", std::move(at)) {}
};

// ---------------------------------------------------------------------------
// Averaging

inline constexpr std::size_t kDefaultUnknownCap = 20;

/// Smallest M >= n such that every bet on a position < n happens during a
/// run on words of length M.
std::uint64_t averaging_horizon(const ScanRule& rule, std::uint64_t n);

/// Mean of the finite-run value over all length-M extensions of w, computed
/// over the visited unknown bits only. Throws HorizonTooLarge past `cap`
/// unknown bits.
std::optional<Capital> average_value(const Strategy& b, const Word& w, std::uint64_t M, StepBudget budget,
                                     std::size_t cap = kDefaultUnknownCap);

/// w -> average_value(b, w, averaging_horizon(rule, |w|)).
Martingale average_martingale(const Strategy& b, std::size_t cap = kDefaultUnknownCap);

/// Av of the strategy with the saving version of its martingale.
Martingale monotonize(const Strategy& b, std::size_t cap = kDefaultUnknownCap);

// ---------------------------------------------------------------------------
// Effectively closed classes

/// Partial assignment position -> bit, standing for the set of sequences
/// that agree with it.
using Constraint = std::map<Position, int>;

Constraint cylinder_constraint(const Word& w);

/// A class C given by a staged enumeration of its complement U.
class ClosedClassEnum {
 public:
  virtual ~ClosedClassEnum() = default;
  /// Whether every sequence satisfying c lies in U as enumerated by stage t.
  virtual bool covers(const Constraint& c, std::uint64_t stage) const = 0;
  /// Cylinders enumerated by stage t, when the class can list them.
  virtual std::optional<std::vector<Word>> cylinders_by(std::uint64_t /*stage*/) const { return std::nullopt; }
  virtual std::string describe() const = 0;
};

using ClassPtr = std::shared_ptr<const ClosedClassEnum>;

/// Union-of-cylinders test shared by the class implementations: does the
/// union of `cylinders` contain every sequence satisfying c?
bool cylinders_cover(const Constraint& c, const std::vector<Word>& cylinders);

/// Explicit staged enumeration: stage t adds the words in stages()[t].
class StagedCylinders final : public ClosedClassEnum {
 public:
  explicit StagedCylinders(std::vector<std::vector<Word>> stages) : stages_(std::move(stages)) {}

  /// Lines "stage <t>: <word>, <word>, ..."; "-" stands for the empty word.
  static StagedCylinders parse(const std::string& text);
  std::string serialize() const;

  bool covers(const Constraint& c, std::uint64_t stage) const override;
  std::optional<std::vector<Word>> cylinders_by(std::uint64_t stage) const override;
  std::string describe() const override { return "staged(" + std::to_string(stages_.size()) + ")"; }

  const std::vector<std::vector<Word>>& stages() const noexcept { return stages_; }

 private:
  std::vector<std::vector<Word>> stages_;
};

ClassPtr empty_class_complement();
ClassPtr make_staged(std::vector<std::vector<Word>> stages);

/// The class of visited-bit histories of sequences in cls under the
/// permutation rule: X belongs iff X = A(pi(0))A(pi(1))... for some A in
/// cls. A constraint X(j) = b becomes A(pi(j)) = b.
ClassPtr conjugate_class(const ScanRule& permutation, ClassPtr cls);

// ---------------------------------------------------------------------------
// Totalization

struct InactiveMarking {
  /// Words at which the race was won by coverage; all their proper
  /// extensions are inactive.
  std::set<Word> frozen_at;

  bool is_inactive(const Word& w) const;
};

/// The race at one word: either both children got defined first, or the
/// cylinder got covered first.
enum class RaceResult { Defined, Covered };

/// Lazily totalized martingale. Each race interleaves one evaluation step of
/// d with one enumeration stage of U per tick, up to `ticks` ticks. Values
/// that cannot be decided throw RaceTimeout.
class Totalizer {
 public:
  Totalizer(Martingale d, ClassPtr cls, StepBudget ticks);

  RaceResult race(const Word& u) const;
  Capital value(const Word& w) const;
  /// d'(w|0), ..., d'(w).
  std::vector<Capital> chain(const Word& w) const;
  /// The first prefix of w (shorter than w) whose race was won by coverage.
  std::optional<Word> frozen_prefix(const Word& w) const;
  Martingale martingale() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

struct Totalization {
  Martingale martingale;
  InactiveMarking marking;
};

/// Runs the races eagerly on every word of length < depth.
Totalization totalize_martingale(const Martingale& d, ClassPtr cls, std::size_t depth, StepBudget budget);

/// (totalized d against the conjugated class, same rule).
Strategy totalize_strategy(const Strategy& b, ClassPtr cls, std::size_t depth, StepBudget budget);

}  // namespace mlab
