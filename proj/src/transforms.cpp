#include "mlab/transforms.hpp"

#include <algorithm>
#include <deque>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace mlab {

std::uint64_t averaging_horizon(const ScanRule& rule, std::uint64_t n) {
  if (!rule.is_oblivious()) throw UnsupportedRule("averaging needs a fixed scan order, got " + rule.id());
  auto bound = rule.move_bound(n);
  if (!bound) throw NoBound("rule " + rule.id() + " gives no bound on the moves below " + std::to_string(n));
  std::uint64_t M = n;
  for (std::uint64_t j = 0; j < *bound; ++j) M = std::max(M, rule.at_move(j) + 1);
  return M;
}

std::optional<Capital> average_value(const Strategy& b, const Word& w, std::uint64_t M, StepBudget budget,
                                     std::size_t cap) {
  if (!b.rule.is_oblivious()) throw UnsupportedRule("averaging needs a fixed scan order, got " + b.rule.id());
  if (M < w.size()) throw Error("averaging horizon shorter than the word");
  // Moves of the finite game on a word of length M; -1 marks an unknown bit.
  std::vector<int> known;
  std::vector<std::size_t> unknown_slots;
  std::vector<bool> seen(M, false);
  for (std::uint64_t j = 0;; ++j) {
    Position p = b.rule.at_move(j);
    if (p >= M) break;
    if (seen[p]) return std::nullopt;
    seen[p] = true;
    if (p < w.size()) {
      known.push_back(w[p]);
    } else {
      unknown_slots.push_back(known.size());
      known.push_back(-1);
    }
  }
  const std::size_t u = unknown_slots.size();
  if (u > cap) {
    throw HorizonTooLarge(std::to_string(u) + " unknown visited bits exceed the cap of " + std::to_string(cap));
  }
  std::vector<std::uint8_t> bits(known.size());
  for (std::size_t i = 0; i < known.size(); ++i) bits[i] = static_cast<std::uint8_t>(known[i] < 0 ? 0 : known[i]);
  Capital sum;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << u); ++mask) {
    for (std::size_t i = 0; i < u; ++i) bits[unknown_slots[i]] = static_cast<std::uint8_t>((mask >> i) & 1);
    auto v = b.d.eval(Word(bits), budget);
    if (!v) return std::nullopt;
    sum += *v;
  }
  return sum / Capital::pow2(u);
}

Martingale average_martingale(const Strategy& b, std::size_t cap) {
  return function_martingale(
      [b, cap](const Word& w, StepBudget budget) {
        return average_value(b, w, averaging_horizon(b.rule, w.size()), budget, cap);
      },
      "Av(" + b.describe() + ")", b.d.declared_total());
}

Martingale monotonize(const Strategy& b, std::size_t cap) {
  return average_martingale(Strategy{saving_transform(b.d).martingale(), b.rule}, cap);
}

// ---------------------------------------------------------------------------
// Closed classes

Constraint cylinder_constraint(const Word& w) {
  Constraint c;
  for (std::size_t i = 0; i < w.size(); ++i) c.emplace(i, w[i]);
  return c;
}

namespace {

bool cover_rec(Constraint& c, const std::vector<const Word*>& live) {
  std::vector<const Word*> next;
  for (const Word* w : live) {
    bool consistent = true;
    bool implied = true;
    for (std::size_t i = 0; i < w->size() && consistent; ++i) {
      auto it = c.find(i);
      if (it == c.end()) implied = false;
      else if (it->second != (*w)[i]) consistent = false;
    }
    if (!consistent) continue;
    if (implied) return true;
    next.push_back(w);
  }
  if (next.empty()) return false;
  Position p = 0;
  while (c.contains(p)) ++p;  // the first cylinder fixes some free position below its length
  bool all = true;
  for (int bit = 0; bit < 2 && all; ++bit) {
    c[p] = bit;
    all = cover_rec(c, next);
  }
  c.erase(p);
  return all;
}

}  // namespace

bool cylinders_cover(const Constraint& c, const std::vector<Word>& cylinders) {
  std::vector<const Word*> live;
  live.reserve(cylinders.size());
  for (const auto& w : cylinders) live.push_back(&w);
  Constraint work = c;
  return cover_rec(work, live);
}

StagedCylinders StagedCylinders::parse(const std::string& text) {
  std::vector<std::vector<Word>> stages;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    line = line.substr(b);
    if (line.rfind("stage", 0) != 0) throw ParseError("expected 'stage <t>:' in class line: " + line);
    auto colon = line.find(':');
    if (colon == std::string::npos) throw ParseError("missing ':' in class line: " + line);
    std::string num = line.substr(5, colon - 5);
    num.erase(std::remove_if(num.begin(), num.end(), ::isspace), num.end());
    if (num.empty() || num.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("bad stage number in class line: " + line);
    }
    std::size_t t = std::stoull(num);
    if (t > 1'000'000) throw ParseError("stage number too large: " + num);
    if (stages.size() <= t) stages.resize(t + 1);
    std::istringstream items(line.substr(colon + 1));
    std::string item;
    while (std::getline(items, item, ',')) {
      item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
      if (item.empty()) continue;
      stages[t].push_back(item == "-" ? Word{} : Word::parse(item));
    }
  }
  return StagedCylinders(std::move(stages));
}

std::string StagedCylinders::serialize() const {
  std::string out;
  for (std::size_t t = 0; t < stages_.size(); ++t) {
    out += "stage " + std::to_string(t) + ":";
    for (std::size_t i = 0; i < stages_[t].size(); ++i) {
      out += i ? ", " : " ";
      out += stages_[t][i].empty() ? "-" : stages_[t][i].to_string();
    }
    out += "\n";
  }
  return out;
}

std::optional<std::vector<Word>> StagedCylinders::cylinders_by(std::uint64_t stage) const {
  std::vector<Word> out;
  for (std::size_t t = 0; t < stages_.size() && t <= stage; ++t) {
    out.insert(out.end(), stages_[t].begin(), stages_[t].end());
  }
  return out;
}

bool StagedCylinders::covers(const Constraint& c, std::uint64_t stage) const {
  return cylinders_cover(c, *cylinders_by(stage));
}

ClassPtr empty_class_complement() { return std::make_shared<const StagedCylinders>(std::vector<std::vector<Word>>{}); }

ClassPtr make_staged(std::vector<std::vector<Word>> stages) {
  return std::make_shared<const StagedCylinders>(std::move(stages));
}

namespace {

class ConjugateClass final : public ClosedClassEnum {
 public:
  ConjugateClass(ScanRule rule, ClassPtr inner) : rule_(std::move(rule)), inner_(std::move(inner)) {}

  bool covers(const Constraint& c, std::uint64_t stage) const override {
    Constraint image;
    for (const auto& [j, bit] : c) image.emplace(rule_.at_move(j), bit);
    return inner_->covers(image, stage);
  }

  std::optional<std::vector<Word>> cylinders_by(std::uint64_t stage) const override {
    auto inner = inner_->cylinders_by(stage);
    if (!inner) return std::nullopt;
    std::vector<Word> out;
    for (const auto& w : *inner) {
      // A(p) = w(p) for p < |w| reads X(inverse(p)) = w(p).
      std::map<std::uint64_t, int> fixed;
      std::uint64_t depth = 0;
      for (std::size_t p = 0; p < w.size(); ++p) {
        auto j = move_of(p);
        if (!j) return std::nullopt;
        fixed.emplace(*j, w[p]);
        depth = std::max(depth, *j + 1);
      }
      std::size_t free = depth - fixed.size();
      if (free > 16) return std::nullopt;
      for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free); ++mask) {
        std::vector<std::uint8_t> bits(depth);
        std::size_t f = 0;
        for (std::uint64_t j = 0; j < depth; ++j) {
          auto it = fixed.find(j);
          bits[j] = static_cast<std::uint8_t>(it != fixed.end() ? it->second : (mask >> f++) & 1);
        }
        out.emplace_back(std::move(bits));
      }
    }
    return out;
  }

  std::string describe() const override { return "conjugate(" + rule_.id() + ", " + inner_->describe() + ")"; }

 private:
  std::optional<std::uint64_t> move_of(Position p) const {
    if (rule_.kind() == ScanRule::Kind::Monotonic) return p;
    return std::get<PermutationRule>(rule_.variant()).inverse(p);
  }

  ScanRule rule_;
  ClassPtr inner_;
};

}  // namespace

ClassPtr conjugate_class(const ScanRule& permutation, ClassPtr cls) {
  if (permutation.kind() != ScanRule::Kind::Permutation && permutation.kind() != ScanRule::Kind::Monotonic) {
    throw UnsupportedRule("conjugation needs a permutation, got " + permutation.id());
  }
  return std::make_shared<const ConjugateClass>(permutation, std::move(cls));
}

// ---------------------------------------------------------------------------
// Totalization

bool InactiveMarking::is_inactive(const Word& w) const {
  for (std::size_t n = 0; n < w.size(); ++n) {
    if (frozen_at.contains(w.prefix(n))) return true;
  }
  return false;
}

struct Totalizer::State {
  State(Martingale dd, ClassPtr c, StepBudget t) : d(std::move(dd)), cls(std::move(c)), ticks(t) {}
  Martingale d;
  ClassPtr cls;
  StepBudget ticks;
  mutable std::mutex mu;
  std::unordered_map<Word, RaceResult, WordHash> races;
  // Recent value chains; a new word starts from the one sharing the longest
  // prefix with it.
  std::deque<std::pair<Word, std::vector<Capital>>> chains;
};

Totalizer::Totalizer(Martingale d, ClassPtr cls, StepBudget ticks)
    : state_(std::make_shared<State>(std::move(d), std::move(cls), ticks)) {
  if (ticks.steps == 0) throw Error("totalization needs at least one tick");
}

RaceResult Totalizer::race(const Word& u) const {
  {
    std::lock_guard lock(state_->mu);
    if (auto it = state_->races.find(u); it != state_->races.end()) return it->second;
  }
  const auto& d = state_->d;
  const Word u0 = u.child(0);
  const Word u1 = u.child(1);
  auto defined_at = [&](std::uint64_t t) { return d.eval(u0, {t}).has_value() && d.eval(u1, {t}).has_value(); };
  const std::uint64_t T = state_->ticks.steps;
  const Constraint cyl = cylinder_constraint(u);
  RaceResult result;
  if (defined_at(T)) {
    std::uint64_t lo = 1, hi = T;  // smallest tick with both children defined
    // Catalog models need exactly |u| + 2 ticks; try that first.
    std::uint64_t guess = std::min<std::uint64_t>(T, u.size() + 2);
    if (defined_at(guess)) {
      hi = guess;
      if (guess == 1 || !defined_at(guess - 1)) lo = guess;
    } else {
      lo = guess + 1;
    }
    while (lo < hi) {
      std::uint64_t mid = lo + (hi - lo) / 2;
      if (defined_at(mid)) hi = mid;
      else lo = mid + 1;
    }
    // Coverage wins only if it happened at a strictly earlier tick.
    result = (lo >= 2 && state_->cls->covers(cyl, lo - 2)) ? RaceResult::Covered : RaceResult::Defined;
  } else if (state_->cls->covers(cyl, T - 1)) {
    result = RaceResult::Covered;
  } else {
    throw RaceTimeout(u);
  }
  std::lock_guard lock(state_->mu);
  state_->races.emplace(u, result);
  return result;
}

std::vector<Capital> Totalizer::chain(const Word& w) const {
  constexpr std::size_t kCachedChains = 8;
  std::vector<Capital> out;
  {
    std::lock_guard lock(state_->mu);
    std::size_t best = 0;
    const std::vector<Capital>* from = nullptr;
    for (const auto& [word, values] : state_->chains) {
      std::size_t n = 0;
      std::size_t lim = std::min(word.size(), w.size());
      while (n < lim && word[n] == w[n]) ++n;
      if (n + 1 > best) {
        best = n + 1;
        from = &values;
      }
    }
    if (from) out.assign(from->begin(), from->begin() + static_cast<std::ptrdiff_t>(best));
  }
  if (out.empty()) {
    auto v = state_->d.eval(Word{}, state_->ticks);
    if (!v) throw RaceTimeout(Word{});
    out.push_back(*v);
  }
  ChainOutcome dchain;
  bool have_dchain = false;
  for (std::size_t n = out.size() - 1; n < w.size(); ++n) {
    Word u = w.prefix(n);
    if (race(u) == RaceResult::Covered) {
      out.push_back(out.back());
      continue;
    }
    // One chain evaluation of d when many values are missing.
    if (!have_dchain && w.size() - n > 4) {
      dchain = state_->d.chain(w, state_->ticks);
      have_dchain = true;
    }
    if (n + 1 < dchain.size()) {
      out.push_back(dchain[n + 1]);
    } else {
      auto v = state_->d.eval(w.prefix(n + 1), state_->ticks);
      if (!v) throw RaceTimeout(u);  // non-monotone budget behaviour
      out.push_back(*v);
    }
  }
  std::lock_guard lock(state_->mu);
  state_->chains.emplace_front(w, out);
  if (state_->chains.size() > kCachedChains) state_->chains.pop_back();
  return out;
}

Capital Totalizer::value(const Word& w) const { return chain(w).back(); }

std::optional<Word> Totalizer::frozen_prefix(const Word& w) const {
  for (std::size_t n = 0; n < w.size(); ++n) {
    Word u = w.prefix(n);
    if (race(u) == RaceResult::Covered) return u;
  }
  return std::nullopt;
}

namespace {

class TotalizedModel final : public MartingaleModel {
 public:
  TotalizedModel(Totalizer tz, std::string name) : tz_(std::move(tz)), name_(std::move(name)) {}
  EvalOutcome evaluate(const Word& w, StepBudget) const override { return tz_.value(w); }
  ChainOutcome evaluate_chain(const Word& w, StepBudget) const override { return tz_.chain(w); }
  std::string describe() const override { return name_; }

 private:
  Totalizer tz_;
  std::string name_;
};

}  // namespace

Martingale Totalizer::martingale() const {
  return Martingale::make<TotalizedModel>(*this, "total(" + state_->d.describe() + ", " + state_->cls->describe() + ")");
}

Totalization totalize_martingale(const Martingale& d, ClassPtr cls, std::size_t depth, StepBudget budget) {
  Totalizer tz(d, std::move(cls), budget);
  Totalization out{tz.martingale(), {}};
  tz.value(Word{});
  std::deque<Word> queue{Word{}};
  while (!queue.empty()) {
    Word u = std::move(queue.front());
    queue.pop_front();
    if (u.size() >= depth) continue;
    if (tz.race(u) == RaceResult::Covered) {
      out.marking.frozen_at.insert(u);
      continue;
    }
    queue.push_back(u.child(0));
    queue.push_back(u.child(1));
  }
  return out;
}

Strategy totalize_strategy(const Strategy& b, ClassPtr cls, std::size_t depth, StepBudget budget) {
  auto conj = conjugate_class(b.rule, std::move(cls));
  return Strategy{totalize_martingale(b.d, std::move(conj), depth, budget).martingale, b.rule};
}

}  // namespace mlab
