#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mlab/core.hpp"

namespace mlab {

/// Result of a budgeted evaluation; nullopt means the budget ran out
/// (the evaluation is treated as diverging).
using EvalOutcome = std::optional<Capital>;

/// Values d(w|0), d(w|1), ..., d(w) along the prefixes of a word. Shorter
/// than |w| + 1 when an evaluation ran out of budget.
using ChainOutcome = std::vector<Capital>;

class MartingaleModel {
 public:
  virtual ~MartingaleModel() = default;

  virtual EvalOutcome evaluate(const Word& w, StepBudget budget) const = 0;
  /// Default walks the prefixes one by one; models override when they can
  /// produce the chain in one pass.
  virtual ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const;
  virtual bool declared_total() const { return true; }
  virtual std::string describe() const = 0;
};

/// Shared, immutable handle to a martingale (possibly partial).
class Martingale {
 public:
  explicit Martingale(std::shared_ptr<const MartingaleModel> model);

  template <class Model, class... Args>
  static Martingale make(Args&&... args) {
    return Martingale(std::make_shared<const Model>(std::forward<Args>(args)...));
  }

  EvalOutcome eval(const Word& w, StepBudget budget = kUnlimitedBudget) const {
    return model_->evaluate(w, budget);
  }
  ChainOutcome chain(const Word& w, StepBudget budget = kUnlimitedBudget) const {
    return model_->evaluate_chain(w, budget);
  }
  /// Evaluates with an unlimited budget; throws WordError if undefined.
  Capital value(const Word& w) const;
  Capital initial_capital() const { return value(Word{}); }

  bool declared_total() const { return model_->declared_total(); }
  std::string describe() const { return model_->describe(); }
  const MartingaleModel& model() const { return *model_; }

 private:
  std::shared_ptr<const MartingaleModel> model_;
};

// ---------------------------------------------------------------------------
// Catalog. All catalog martingales start with capital 1 unless stated.
// Evaluation of a word w costs |w| + 1 steps.

Martingale zero_martingale();
Martingale constant_martingale(Capital c);
/// Bets everything on `bit` at every move.
Martingale doubler(int bit);
/// Bets half its capital that the next bit follows `pattern` periodically.
Martingale pattern_bettor(Word pattern);
/// Bets a quarter of its capital on the majority bit seen so far (ties: 0).
Martingale majority_bettor();
/// Value of the longest tabulated prefix. Needs an entry for the empty word.
/// Not fair in general; used to spell out small examples.
Martingale table_martingale(std::map<Word, Capital> table);
/// `inner` restricted to words of length <= depth; diverges beyond.
Martingale partial_to_depth(std::size_t depth, Martingale inner);
/// `inner`, diverging on every proper extension of `root`.
Martingale undefined_after(Word root, Martingale inner);
/// Wraps an arbitrary word function. Used for finite-run values and tests.
Martingale function_martingale(std::function<EvalOutcome(const Word&, StepBudget)> fn, std::string name,
                               bool total = true);

/// Builds a martingale from its catalog id, e.g. "const:1", "double_on:0",
/// "pattern:01", "majority", "table:=1,0=2,1=0", "partial:3:double_on:0",
/// "undefined_after:1:pattern:0", "zero".
Martingale parse_martingale(const std::string& id);

// ---------------------------------------------------------------------------
// Fairness

struct FairnessIssue {
  enum class Kind { Unfair, OneChildDefined, ChildrenWithoutParent, Negative };
  Kind kind;
  Word at;
  std::string detail;
};

struct FairnessReport {
  std::vector<FairnessIssue> violations;
  /// Words whose children ran out of budget (reported, not a violation).
  std::vector<Word> exhausted;
  bool fair() const noexcept { return violations.empty(); }
};

/// Checks 2 d(w) = d(w0) + d(w1), nonnegativity, and the definedness rules
/// for every word with |w| < depth.
FairnessReport check_fairness(const Martingale& m, std::size_t depth, StepBudget budget);

// ---------------------------------------------------------------------------
// Transforms on capital

struct WeightedTerm {
  Capital coefficient;
  Martingale martingale;
};

/// sum_i coefficient_i * m_i. Each term gets budget / term count.
Martingale weighted_sum(std::vector<WeightedTerm> terms);

struct SavingState {
  Capital bank;
  Capital active;
  std::uint64_t scale_exponent = 0;
  Capital base;

  Capital total() const { return bank + active; }
};

/// The saving version of a martingale: whenever the active part reaches
/// twice the initial capital, half of it is banked for good and the stakes
/// of the base martingale are halved.
class SavingMartingale {
 public:
  explicit SavingMartingale(Martingale base);

  std::optional<SavingState> state(const Word& w, StepBudget budget = kUnlimitedBudget) const;
  /// States along every prefix of w (shorter on budget exhaustion).
  std::vector<SavingState> chain(const Word& w, StepBudget budget = kUnlimitedBudget) const;

  const Martingale& base() const noexcept { return base_; }
  /// bank + active as a martingale.
  const Martingale& martingale() const noexcept { return total_; }

 private:
  Martingale base_;
  Martingale total_;
};

SavingMartingale saving_transform(const Martingale& m);

/// Folds base values v_0..v_L into saving states.
std::vector<SavingState> saving_states_from_chain(const ChainOutcome& base_values);

}  // namespace mlab
