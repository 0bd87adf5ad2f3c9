#pragma once

#include <cstdint>
#include <vector>

#include "mlab/complexity.hpp"
#include "mlab/strategy.hpp"

namespace mlab {

class IntervalTooSmall : public Error {
 public:
  explicit IntervalTooSmall(std::size_t k)
      : Error("interval " + std::to_string(k) + " is shorter than 4"), k_(k) {}
  std::size_t interval() const noexcept { return k_; }

 private:
  std::size_t k_;
};

struct SubInterval {
  Position begin = 0;
  Position end = 0;
  std::uint64_t length() const { return end - begin; }
};

struct PlanInterval {
  Position begin = 0;
  Position end = 0;
  std::uint64_t s = 1;
  std::vector<SubInterval> subs;
  Capital stake;
  std::uint64_t threshold = 0;
};

struct SplittingPlan {
  std::vector<std::uint64_t> checkpoints;
  std::vector<PlanInterval> intervals;
  std::uint64_t horizon() const { return checkpoints.back(); }
};

/// Added to floor(log|I| - 2 log log|I|): the constant cost of the
/// description system (a REPEAT of one bit takes 3 bits).
inline constexpr std::uint64_t kThresholdSlack = 1;

/// s_k = max(1, floor(|I_k| / floor(log2 |I_k|)^2)), equal sub-intervals with
/// the remainder in the last, stake_k = 1 / ((k+1)^2 s_k). Throws
/// IntervalTooSmall.
SplittingPlan build_plan(const Checkpoints& cp, std::uint64_t slack = kThresholdSlack);

/// stake_k * 2^(shortest sub-interval of I_k).
Capital expected_gain(const SplittingPlan& plan, std::size_t k);

/// floor(log2 L - 2 log2 log2 L), clamped at 0; L >= 4.
std::uint64_t base_threshold(std::uint64_t L);

/// One doubling sub-game: bet the stake on J matching target bit by bit.
struct SubGame {
  std::size_t k = 0;
  std::size_t e = 0;
  SubInterval j;
  /// The candidate restricted to J.
  Word target;
  Capital stake;
};

struct SplittingStrategy {
  Strategy strategy;
  /// In opening order; their J's are visited in this order.
  std::vector<SubGame> games;
  /// Queued positions, in visit order.
  std::vector<Position> order;
  /// Candidates per interval that found no free sub-interval.
  std::vector<std::size_t> overflow;
  /// Some enumeration ran out of budget; fewer games were opened.
  bool truncated = false;
};

/// Opens sub-game (k, e) when the e-th word of S_k = {w of length |I_k| with
/// a program of at most threshold_k bits, condition |I_k|} is enumerated,
/// dovetailing over (k, e) in Cantor order. Capital starts at 2.
SplittingStrategy build_splitting_strategy(const SplittingPlan& plan, const DescriptionSystem& ds,
                                           StepBudget budget);

struct GainRow {
  std::size_t k = 0;
  Position checkpoint = 0;
  std::size_t games = 0;
  /// Sum over the interval's sub-games of (final reserve - stake).
  Capital gain;
  Capital expected;
};

/// Per-interval gains realized by a run (games not fully visited count
/// with their current reserve).
std::vector<GainRow> gain_table(const SplittingPlan& plan, const SplittingStrategy& s, const RunTrace& trace);

/// Sum of the stakes of the opened games.
Capital capital_at_risk(const SplittingStrategy& s);

}  // namespace mlab
