#pragma once

#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mlab/martingale.hpp"

namespace mlab {

class UnsupportedRule : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Scan rules

/// Move index -> visited position.
using MoveMap = std::function<Position(std::uint64_t)>;

struct MonotonicRule {};

struct PermutationRule {
  MoveMap forward;
  /// Position -> move index; nullopt if the position is never visited
  /// (which makes the rule an invalid permutation).
  std::function<std::optional<std::uint64_t>(Position)> inverse;
};

struct InjectionRule {
  MoveMap map;
  /// n -> J such that every move visiting a position < n has index < J.
  std::function<std::uint64_t(std::uint64_t)> bound_hint;
};

struct AdaptiveRule {
  std::function<std::optional<Position>(const Word&, StepBudget)> sigma;
};

class ScanRule {
 public:
  using Variant = std::variant<MonotonicRule, PermutationRule, InjectionRule, AdaptiveRule>;
  enum class Kind { Monotonic, Permutation, Injection, Adaptive };

  ScanRule(Variant v, std::string id) : v_(std::move(v)), id_(std::move(id)) {}

  static ScanRule monotonic() { return ScanRule(MonotonicRule{}, "monotonic"); }

  Kind kind() const noexcept { return static_cast<Kind>(v_.index()); }
  const Variant& variant() const noexcept { return v_; }
  const std::string& id() const noexcept { return id_; }

  /// True for rules whose scan order is fixed in advance (no adaptivity).
  bool is_oblivious() const noexcept { return kind() != Kind::Adaptive; }
  /// Position visited at move j. Throws UnsupportedRule for adaptive rules.
  Position at_move(std::uint64_t j) const;
  /// Exact bound J for positions < n, if the rule can give one.
  std::optional<std::uint64_t> move_bound(std::uint64_t n) const;

 private:
  Variant v_;
  std::string id_;
};

/// Rule from its catalog id. Permutations: identity, pair_swap,
/// reverse_blocks:<k>, perm:<list>, map:<list>. Injections: scale:<a>,
/// affine:<a>:<b>, explicit:<list>. Adaptive: mod:<m>, branch,
/// partial_after:<k>. Also "monotonic".
ScanRule parse_scan_rule(const std::string& id);

/// Visits `head` first, then continues with the identity. Not validated.
ScanRule permutation_from_list(std::vector<Position> head, std::string id);
/// Visits `head` first, then every position past the largest one in
/// increasing order. Bound hints are exact. Not validated.
ScanRule injection_from_list(std::vector<Position> head, std::string id);

std::optional<Position> next_position(const ScanRule& rule, const Word& history, StepBudget budget);

// ---------------------------------------------------------------------------
// Strategies and runs

struct Strategy {
  Martingale d;
  ScanRule rule;

  std::string describe() const { return d.describe() + "+" + rule.id(); }
};

/// "<martingale id>+<rule id>", e.g. "pattern:0+scale:3".
Strategy parse_strategy(const std::string& id);

enum class RunHalt { Completed, PositionOutsideWord, BudgetExhausted, RepeatedPosition };
std::string to_string(RunHalt h);

struct RunTrace {
  std::vector<Position> positions;
  Word history;
  /// capitals[k] = d(history|k); one more entry than moves unless the last
  /// evaluation ran out of budget.
  std::vector<Capital> capitals;
  RunHalt halt = RunHalt::Completed;
};

struct WordRun {
  std::optional<Capital> value;
  RunTrace trace;
};

/// The finite game on w: stops at the first requested position >= |w|.
WordRun run_on_word(const Strategy& b, const Word& w, StepBudget budget);
/// Just the value of the finite game.
std::optional<Capital> finite_run_value(const Strategy& b, const Word& w, StepBudget budget);

RunTrace run_on_sequence(const Strategy& b, const SequenceSource& s, std::size_t max_moves, StepBudget budget);

/// move,position,bit,capital_num,capital_den,halt. Row 0 is the initial
/// capital with empty position and bit.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

struct InjectivityReport {
  std::optional<std::pair<std::uint64_t, std::uint64_t>> repeat_at;
  /// Move index whose position the inverse map does not send back to it.
  std::optional<std::uint64_t> inverse_mismatch;
  /// Set when the rule could not produce a position (adaptive, out of budget).
  std::optional<std::uint64_t> stopped_at;
  bool ok() const noexcept { return !repeat_at && !inverse_mismatch && !stopped_at; }
};

/// Distinctness of the first `horizon` positions. Adaptive rules are
/// followed along `history` (horizon is capped at |history| + 1). For
/// permutations, also checks that the inverse map undoes the forward map.
InjectivityReport check_injectivity(const ScanRule& rule, std::uint64_t horizon, const Word& history = {},
                                    StepBudget budget = kUnlimitedBudget);

struct VisitedSet {
  /// position -> move index visiting it
  std::map<Position, std::uint64_t> moves;
  bool complete = true;
};

/// The positions below n that the rule ever visits, with their move indices.
VisitedSet visited_below(const ScanRule& rule, std::uint64_t n, StepBudget budget);

}  // namespace mlab
