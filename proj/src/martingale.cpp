#include "mlab/martingale.hpp"

#include <sstream>
#include <unordered_map>

namespace mlab {

ChainOutcome MartingaleModel::evaluate_chain(const Word& w, StepBudget budget) const {
  ChainOutcome out;
  out.reserve(w.size() + 1);
  for (std::size_t i = 0; i <= w.size(); ++i) {
    auto v = evaluate(w.prefix(i), budget);
    if (!v) break;
    out.push_back(std::move(*v));
  }
  return out;
}

Martingale::Martingale(std::shared_ptr<const MartingaleModel> model) : model_(std::move(model)) {
  if (!model_) throw Error("null martingale model");
}

Capital Martingale::value(const Word& w) const {
  auto v = eval(w, kUnlimitedBudget);
  if (!v) throw WordError("martingale " + describe() + " undefined", w);
  return *v;
}

namespace {

/// Catalog martingales whose value is a product of per-move factors.
class MultiplicativeModel : public MartingaleModel {
 public:
  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    Meter meter(budget);
    if (!meter.charge(w.size() + 1)) return std::nullopt;
    Capital v = initial();
    State s{};
    for (std::size_t i = 0; i < w.size(); ++i) {
      v *= factor(s, i, w[i]);
      if (v.is_zero()) return v;
      advance(s, w[i]);
    }
    return v;
  }

  ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const override {
    Meter meter(budget);
    ChainOutcome out;
    if (!meter.charge(w.size() + 1)) return out;
    out.reserve(w.size() + 1);
    Capital v = initial();
    out.push_back(v);
    State s{};
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!v.is_zero()) v *= factor(s, i, w[i]);
      advance(s, w[i]);
      out.push_back(v);
    }
    return out;
  }

 protected:
  struct State {
    std::uint64_t ones = 0;
    std::uint64_t zeros = 0;
  };
  virtual Capital initial() const { return Capital(1); }
  virtual Capital factor(const State& s, std::size_t move, int bit) const = 0;
  static void advance(State& s, int bit) { (bit ? s.ones : s.zeros)++; }
};

class ConstantModel final : public MultiplicativeModel {
 public:
  explicit ConstantModel(Capital c) : c_(std::move(c)) {
    if (c_.sign() < 0) throw Error("constant martingale must be nonnegative");
  }
  std::string describe() const override { return "const:" + c_.to_string(); }

 protected:
  Capital initial() const override { return c_; }
  Capital factor(const State&, std::size_t, int) const override { return Capital(1); }

 private:
  Capital c_;
};

class DoublerModel final : public MultiplicativeModel {
 public:
  explicit DoublerModel(int bit) : bit_(bit & 1) {}
  std::string describe() const override { return "double_on:" + std::to_string(bit_); }

 protected:
  Capital factor(const State&, std::size_t, int bit) const override { return Capital(bit == bit_ ? 2 : 0); }

 private:
  int bit_;
};

class PatternModel final : public MultiplicativeModel {
 public:
  explicit PatternModel(Word pattern) : pattern_(std::move(pattern)) {
    if (pattern_.empty()) throw ParseError("pattern bettor needs a nonempty pattern");
  }
  std::string describe() const override { return "pattern:" + pattern_.to_string(); }

 protected:
  Capital factor(const State&, std::size_t move, int bit) const override {
    return bit == pattern_[move % pattern_.size()] ? Capital(3, 2) : Capital(1, 2);
  }

 private:
  Word pattern_;
};

class MajorityModel final : public MultiplicativeModel {
 public:
  std::string describe() const override { return "majority"; }

 protected:
  Capital factor(const State& s, std::size_t, int bit) const override {
    int majority = s.ones > s.zeros ? 1 : 0;
    return bit == majority ? Capital(5, 4) : Capital(3, 4);
  }
};

class TableModel final : public MartingaleModel {
 public:
  explicit TableModel(std::map<Word, Capital> table) : table_(std::move(table)) {
    if (!table_.contains(Word{})) throw ParseError("table martingale needs a value for the empty word");
  }

  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    Meter meter(budget);
    if (!meter.charge(w.size() + 1)) return std::nullopt;
    for (std::size_t n = w.size() + 1; n-- > 0;) {
      if (auto it = table_.find(w.prefix(n)); it != table_.end()) return it->second;
    }
    return std::nullopt;
  }

  std::string describe() const override {
    std::string s = "table:";
    bool first = true;
    for (const auto& [k, v] : table_) {
      if (!first) s += ",";
      first = false;
      s += k.to_string() + "=" + v.to_string();
    }
    return s;
  }

 private:
  std::map<Word, Capital> table_;
};

class PartialDepthModel final : public MartingaleModel {
 public:
  PartialDepthModel(std::size_t depth, Martingale inner) : depth_(depth), inner_(std::move(inner)) {}

  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    if (w.size() > depth_) return std::nullopt;  // never halts
    return inner_.eval(w, budget);
  }
  ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const override {
    auto c = inner_.chain(w.prefix(depth_), budget);
    return c;
  }
  bool declared_total() const override { return false; }
  std::string describe() const override { return "partial:" + std::to_string(depth_) + ":" + inner_.describe(); }

 private:
  std::size_t depth_;
  Martingale inner_;
};

class UndefinedAfterModel final : public MartingaleModel {
 public:
  UndefinedAfterModel(Word root, Martingale inner) : root_(std::move(root)), inner_(std::move(inner)) {}

  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    if (w.size() > root_.size() && root_.is_prefix_of(w)) return std::nullopt;
    return inner_.eval(w, budget);
  }
  ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const override {
    if (w.size() > root_.size() && root_.is_prefix_of(w)) return inner_.chain(root_, budget);
    return inner_.chain(w, budget);
  }
  bool declared_total() const override { return false; }
  std::string describe() const override {
    return "undefined_after:" + root_.to_string() + ":" + inner_.describe();
  }

 private:
  Word root_;
  Martingale inner_;
};

class FunctionModel final : public MartingaleModel {
 public:
  FunctionModel(std::function<EvalOutcome(const Word&, StepBudget)> fn, std::string name, bool total)
      : fn_(std::move(fn)), name_(std::move(name)), total_(total) {}
  EvalOutcome evaluate(const Word& w, StepBudget budget) const override { return fn_(w, budget); }
  bool declared_total() const override { return total_; }
  std::string describe() const override { return name_; }

 private:
  std::function<EvalOutcome(const Word&, StepBudget)> fn_;
  std::string name_;
  bool total_;
};

class WeightedSumModel final : public MartingaleModel {
 public:
  explicit WeightedSumModel(std::vector<WeightedTerm> terms) : terms_(std::move(terms)) {
    if (terms_.empty()) throw Error("weighted_sum needs at least one term");
    for (const auto& t : terms_) {
      if (t.coefficient.sign() <= 0) throw Error("weighted_sum coefficients must be positive");
    }
  }

  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    StepBudget each{budget.steps / terms_.size()};
    Capital sum;
    for (const auto& t : terms_) {
      auto v = t.martingale.eval(w, each);
      if (!v) return std::nullopt;
      sum += t.coefficient * *v;
    }
    return sum;
  }

  ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const override {
    StepBudget each{budget.steps / terms_.size()};
    ChainOutcome sum;
    std::size_t len = w.size() + 1;
    for (const auto& t : terms_) {
      auto c = t.martingale.chain(w, each);
      len = std::min(len, c.size());
      if (sum.empty()) sum.assign(len, Capital(0));
      for (std::size_t i = 0; i < len; ++i) sum[i] += t.coefficient * c[i];
    }
    sum.resize(len);
    return sum;
  }

  bool declared_total() const override {
    for (const auto& t : terms_) {
      if (!t.martingale.declared_total()) return false;
    }
    return true;
  }

  std::string describe() const override {
    std::string s = "sum(";
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (i) s += " + ";
      s += terms_[i].coefficient.to_string() + "*" + terms_[i].martingale.describe();
    }
    return s + ")";
  }

 private:
  std::vector<WeightedTerm> terms_;
};

class SavingTotalModel final : public MartingaleModel {
 public:
  explicit SavingTotalModel(Martingale base) : base_(std::move(base)) {}

  EvalOutcome evaluate(const Word& w, StepBudget budget) const override {
    auto states = saving_states_from_chain(base_.chain(w, budget));
    if (states.size() != w.size() + 1) return std::nullopt;
    return states.back().total();
  }
  ChainOutcome evaluate_chain(const Word& w, StepBudget budget) const override {
    auto states = saving_states_from_chain(base_.chain(w, budget));
    ChainOutcome out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s.total());
    return out;
  }
  bool declared_total() const override { return base_.declared_total(); }
  std::string describe() const override { return "saving(" + base_.describe() + ")"; }

 private:
  Martingale base_;
};

std::pair<std::string, std::string> split_first(const std::string& s) {
  auto c = s.find(':');
  if (c == std::string::npos) return {s, ""};
  return {s.substr(0, c), s.substr(c + 1)};
}

}  // namespace

Martingale zero_martingale() { return Martingale::make<ConstantModel>(Capital(0)); }
Martingale constant_martingale(Capital c) { return Martingale::make<ConstantModel>(std::move(c)); }
Martingale doubler(int bit) { return Martingale::make<DoublerModel>(bit); }
Martingale pattern_bettor(Word pattern) { return Martingale::make<PatternModel>(std::move(pattern)); }
Martingale majority_bettor() { return Martingale::make<MajorityModel>(); }
Martingale table_martingale(std::map<Word, Capital> table) {
  return Martingale::make<TableModel>(std::move(table));
}
Martingale partial_to_depth(std::size_t depth, Martingale inner) {
  return Martingale::make<PartialDepthModel>(depth, std::move(inner));
}
Martingale undefined_after(Word root, Martingale inner) {
  return Martingale::make<UndefinedAfterModel>(std::move(root), std::move(inner));
}
Martingale function_martingale(std::function<EvalOutcome(const Word&, StepBudget)> fn, std::string name,
                               bool total) {
  return Martingale::make<FunctionModel>(std::move(fn), std::move(name), total);
}

Martingale parse_martingale(const std::string& id) {
  auto [kind, rest] = split_first(id);
  if (kind == "zero") return zero_martingale();
  if (kind == "majority") return majority_bettor();
  if (kind == "const") return constant_martingale(Capital::parse(rest));
  if (kind == "double_on") {
    if (rest != "0" && rest != "1") throw ParseError("double_on needs bit 0 or 1: " + id);
    return doubler(rest[0] - '0');
  }
  if (kind == "pattern") return pattern_bettor(Word::parse(rest));
  if (kind == "table") {
    std::map<Word, Capital> table;
    std::stringstream ss(rest);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto eq = item.find('=');
      if (eq == std::string::npos) throw ParseError("table entry needs '=': " + item);
      table[Word::parse(item.substr(0, eq))] = Capital::parse(item.substr(eq + 1));
    }
    return table_martingale(std::move(table));
  }
  if (kind == "partial") {
    auto [depth, inner] = split_first(rest);
    if (depth.empty() || depth.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("partial needs a depth: " + id);
    }
    return partial_to_depth(std::stoull(depth), parse_martingale(inner));
  }
  if (kind == "undefined_after") {
    auto [root, inner] = split_first(rest);
    return undefined_after(Word::parse(root), parse_martingale(inner));
  }
  if (kind == "saving") return saving_transform(parse_martingale(rest)).martingale();
  throw ParseError("unknown martingale id: " + id);
}

FairnessReport check_fairness(const Martingale& m, std::size_t depth, StepBudget budget) {
  FairnessReport report;
  std::unordered_map<Word, EvalOutcome, WordHash> values;
  auto value_of = [&](const Word& w) -> const EvalOutcome& {
    auto it = values.find(w);
    if (it == values.end()) it = values.emplace(w, m.eval(w, budget)).first;
    return it->second;
  };
  auto note_negative = [&](const Word& w, const EvalOutcome& v) {
    if (v && v->sign() < 0) {
      report.violations.push_back({FairnessIssue::Kind::Negative, w, "value " + v->to_string()});
    }
  };
  for (std::size_t n = 0; n < depth; ++n) {
    for_each_word(n, [&](const Word& w) {
      const auto& parent = value_of(w);
      const auto& left = value_of(w.child(0));
      const auto& right = value_of(w.child(1));
      if (n == 0) note_negative(w, parent);
      note_negative(w.child(0), left);
      note_negative(w.child(1), right);
      if (!left && !right) {
        report.exhausted.push_back(w);
        return;
      }
      if (!left || !right) {
        report.violations.push_back({FairnessIssue::Kind::OneChildDefined, w, ""});
        return;
      }
      if (!parent) {
        report.violations.push_back({FairnessIssue::Kind::ChildrenWithoutParent, w, ""});
        return;
      }
      if (Capital(2) * *parent != *left + *right) {
        report.violations.push_back({FairnessIssue::Kind::Unfair, w,
                                     "2*" + parent->to_string() + " != " + left->to_string() + " + " +
                                         right->to_string()});
      }
    });
  }
  return report;
}

Martingale weighted_sum(std::vector<WeightedTerm> terms) {
  return Martingale::make<WeightedSumModel>(std::move(terms));
}

std::vector<SavingState> saving_states_from_chain(const ChainOutcome& base_values) {
  std::vector<SavingState> out;
  if (base_values.empty()) return out;
  out.reserve(base_values.size());
  const Capital& initial = base_values.front();
  const Capital threshold = Capital(2) * initial;
  Capital bank;
  Capital anchor_active = initial;
  Capital anchor_base = initial;
  Capital scale(1);
  std::uint64_t exponent = 0;
  for (const auto& v : base_values) {
    Capital active = anchor_active + (v - anchor_base) * scale;
    if (initial.sign() > 0 && active >= threshold) {
      while (active >= threshold) {
        active /= Capital(2);
        bank += active;
        scale /= Capital(2);
        ++exponent;
      }
      anchor_active = active;
      anchor_base = v;
    }
    out.push_back(SavingState{bank, active, exponent, v});
  }
  return out;
}

SavingMartingale::SavingMartingale(Martingale base)
    : base_(std::move(base)), total_(Martingale::make<SavingTotalModel>(base_)) {}

std::optional<SavingState> SavingMartingale::state(const Word& w, StepBudget budget) const {
  auto states = chain(w, budget);
  if (states.size() != w.size() + 1) return std::nullopt;
  return states.back();
}

std::vector<SavingState> SavingMartingale::chain(const Word& w, StepBudget budget) const {
  return saving_states_from_chain(base_.chain(w, budget));
}

SavingMartingale saving_transform(const Martingale& m) { return SavingMartingale(m); }

}  // namespace mlab
