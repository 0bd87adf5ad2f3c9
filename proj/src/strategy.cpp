#include "mlab/strategy.hpp"

#include <algorithm>
#include <memory>
#include <unordered_map>
#include <unordered_set>

namespace mlab {

namespace {

std::uint64_t parse_count(const std::string& s, const std::string& ctx) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw ParseError("expected a natural number in '" + ctx + "'");
  }
  return std::stoull(s);
}

std::pair<std::string, std::string> split_first(const std::string& s, char sep = ':') {
  auto c = s.find(sep);
  if (c == std::string::npos) return {s, ""};
  return {s.substr(0, c), s.substr(c + 1)};
}

/// Shared lookup tables for list-headed maps.
struct ListHead {
  std::vector<Position> head;
  std::unordered_map<Position, std::uint64_t> first_index;
  // Sorted head values with the largest move index among values <= each.
  std::vector<Position> sorted_values;
  std::vector<std::uint64_t> prefix_max_index;

  explicit ListHead(std::vector<Position> h) : head(std::move(h)) {
    std::vector<std::pair<Position, std::uint64_t>> pairs;
    for (std::uint64_t j = 0; j < head.size(); ++j) {
      first_index.emplace(head[j], j);
      pairs.emplace_back(head[j], j);
    }
    std::sort(pairs.begin(), pairs.end());
    std::uint64_t best = 0;
    for (const auto& [v, j] : pairs) {
      sorted_values.push_back(v);
      best = std::max(best, j + 1);
      prefix_max_index.push_back(best);
    }
  }

  /// 1 + the largest head index visiting a position < n (0 if none).
  std::uint64_t head_bound(std::uint64_t n) const {
    auto it = std::lower_bound(sorted_values.begin(), sorted_values.end(), n);
    if (it == sorted_values.begin()) return 0;
    return prefix_max_index[static_cast<std::size_t>(it - sorted_values.begin()) - 1];
  }
};

}  // namespace

Position ScanRule::at_move(std::uint64_t j) const {
  switch (kind()) {
    case Kind::Monotonic:
      return j;
    case Kind::Permutation:
      return std::get<PermutationRule>(v_).forward(j);
    case Kind::Injection:
      return std::get<InjectionRule>(v_).map(j);
    case Kind::Adaptive:
      break;
  }
  throw UnsupportedRule("adaptive rule " + id_ + " has no fixed scan order");
}

std::optional<std::uint64_t> ScanRule::move_bound(std::uint64_t n) const {
  switch (kind()) {
    case Kind::Monotonic:
      return n;
    case Kind::Permutation: {
      const auto& r = std::get<PermutationRule>(v_);
      std::uint64_t bound = 0;
      for (Position p = 0; p < n; ++p) {
        auto j = r.inverse(p);
        if (!j) return std::nullopt;
        bound = std::max(bound, *j + 1);
      }
      return bound;
    }
    case Kind::Injection: {
      const auto& r = std::get<InjectionRule>(v_);
      if (!r.bound_hint) return std::nullopt;
      return r.bound_hint(n);
    }
    case Kind::Adaptive:
      break;
  }
  return std::nullopt;
}

ScanRule permutation_from_list(std::vector<Position> head, std::string id) {
  auto h = std::make_shared<const ListHead>(std::move(head));
  PermutationRule r;
  r.forward = [h](std::uint64_t j) -> Position { return j < h->head.size() ? h->head[j] : j; };
  r.inverse = [h](Position p) -> std::optional<std::uint64_t> {
    if (auto it = h->first_index.find(p); it != h->first_index.end()) return it->second;
    if (p >= h->head.size()) return p;
    return std::nullopt;
  };
  return ScanRule(std::move(r), std::move(id));
}

ScanRule injection_from_list(std::vector<Position> head, std::string id) {
  auto h = std::make_shared<const ListHead>(std::move(head));
  // Tail visits max+1, max+2, ... (or 0, 1, ... after an empty head).
  Position tail_start = h->sorted_values.empty() ? 0 : h->sorted_values.back() + 1;
  std::uint64_t len = h->head.size();
  InjectionRule r;
  r.map = [h, tail_start, len](std::uint64_t j) -> Position {
    return j < len ? h->head[j] : tail_start + (j - len);
  };
  r.bound_hint = [h, tail_start, len](std::uint64_t n) -> std::uint64_t {
    if (n > tail_start) return len + (n - tail_start);
    return h->head_bound(n);
  };
  return ScanRule(std::move(r), std::move(id));
}

ScanRule parse_scan_rule(const std::string& id) {
  auto [kind, rest] = split_first(id);
  if (kind == "monotonic") return ScanRule::monotonic();
  if (kind == "identity") return permutation_from_list({}, id);
  if (kind == "pair_swap" || kind == "reverse_blocks") {
    std::uint64_t k = kind == "pair_swap" ? 2 : parse_count(rest, id);
    if (k == 0) throw ParseError("block size must be positive: " + id);
    auto flip = [k](std::uint64_t j) -> std::uint64_t { return (j / k) * k + (k - 1 - j % k); };
    PermutationRule r;
    r.forward = flip;
    r.inverse = [flip](Position p) -> std::optional<std::uint64_t> { return flip(p); };
    return ScanRule(std::move(r), id);
  }
  if (kind == "perm" || kind == "map") {
    auto list = parse_natural_list(rest);
    if (kind == "perm") {
      auto sorted = list;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i) throw ParseError("perm list must be a permutation of 0..n-1: " + id);
      }
    }
    return permutation_from_list(std::move(list), id);
  }
  if (kind == "scale") {
    std::uint64_t a = parse_count(rest, id);
    if (a == 0) throw ParseError("scale factor must be positive: " + id);
    InjectionRule r;
    r.map = [a](std::uint64_t j) -> Position { return a * j; };
    r.bound_hint = [a](std::uint64_t n) -> std::uint64_t { return (n + a - 1) / a; };
    return ScanRule(std::move(r), id);
  }
  if (kind == "affine") {
    auto [as, bs] = split_first(rest);
    std::uint64_t a = parse_count(as, id);
    std::uint64_t b = parse_count(bs, id);
    if (a == 0) throw ParseError("affine slope must be positive: " + id);
    InjectionRule r;
    r.map = [a, b](std::uint64_t j) -> Position { return a * j + b; };
    r.bound_hint = [a, b](std::uint64_t n) -> std::uint64_t { return n <= b ? 0 : (n - b + a - 1) / a; };
    return ScanRule(std::move(r), id);
  }
  if (kind == "explicit") {
    auto list = parse_natural_list(rest);
    std::unordered_set<Position> seen;
    for (auto p : list) {
      if (!seen.insert(p).second) throw ParseError("explicit injection repeats a position: " + id);
    }
    return injection_from_list(std::move(list), id);
  }
  if (kind == "mod") {
    std::uint64_t m = parse_count(rest, id);
    if (m == 0) throw ParseError("mod needs a positive modulus: " + id);
    return ScanRule(AdaptiveRule{[m](const Word& h, StepBudget b) -> std::optional<Position> {
                      if (b.steps == 0) return std::nullopt;
                      return h.size() % m;
                    }},
                    id);
  }
  if (kind == "branch") {
    return ScanRule(AdaptiveRule{[](const Word& h, StepBudget b) -> std::optional<Position> {
                      if (b.steps == 0) return std::nullopt;
                      if (h.empty()) return 0;
                      return 2 * h.size() + static_cast<Position>(h[h.size() - 1]);
                    }},
                    id);
  }
  if (kind == "partial_after") {
    std::uint64_t k = parse_count(rest, id);
    return ScanRule(AdaptiveRule{[k](const Word& h, StepBudget b) -> std::optional<Position> {
                      if (b.steps == 0 || h.size() >= k) return std::nullopt;
                      return h.size();
                    }},
                    id);
  }
  throw ParseError("unknown scan rule: " + id);
}

std::optional<Position> next_position(const ScanRule& rule, const Word& history, StepBudget budget) {
  if (rule.kind() == ScanRule::Kind::Adaptive) {
    return std::get<AdaptiveRule>(rule.variant()).sigma(history, budget);
  }
  return rule.at_move(history.size());
}

Strategy parse_strategy(const std::string& id) {
  auto [m, r] = split_first(id, '+');
  return Strategy{parse_martingale(m), r.empty() ? ScanRule::monotonic() : parse_scan_rule(r)};
}

std::string to_string(RunHalt h) {
  switch (h) {
    case RunHalt::Completed:
      return "completed";
    case RunHalt::PositionOutsideWord:
      return "position_outside_word";
    case RunHalt::BudgetExhausted:
      return "budget_exhausted";
    case RunHalt::RepeatedPosition:
      return "repeated_position";
  }
  return "?";
}

namespace {

/// Visits positions inside w until the rule leaves it. Returns false on a
/// repeated position.
bool play_inside(const ScanRule& rule, const Word& w, RunTrace& trace) {
  if (!rule.is_oblivious()) throw UnsupportedRule("finite runs need a fixed scan order, got " + rule.id());
  std::vector<bool> seen(w.size(), false);
  for (std::uint64_t j = 0;; ++j) {
    Position p = rule.at_move(j);
    if (p >= w.size()) {
      trace.halt = RunHalt::PositionOutsideWord;
      return true;
    }
    if (seen[p]) {
      trace.halt = RunHalt::RepeatedPosition;
      return false;
    }
    seen[p] = true;
    trace.positions.push_back(p);
    trace.history.push_back(w[p]);
  }
}

}  // namespace

WordRun run_on_word(const Strategy& b, const Word& w, StepBudget budget) {
  WordRun run;
  if (!play_inside(b.rule, w, run.trace)) return run;
  run.trace.capitals = b.d.chain(run.trace.history, budget);
  if (run.trace.capitals.size() != run.trace.history.size() + 1) {
    run.trace.halt = RunHalt::BudgetExhausted;
    return run;
  }
  run.value = run.trace.capitals.back();
  return run;
}

std::optional<Capital> finite_run_value(const Strategy& b, const Word& w, StepBudget budget) {
  RunTrace trace;
  if (!play_inside(b.rule, w, trace)) return std::nullopt;
  return b.d.eval(trace.history, budget);
}

RunTrace run_on_sequence(const Strategy& b, const SequenceSource& s, std::size_t max_moves, StepBudget budget) {
  RunTrace trace;
  std::unordered_set<Position> seen;
  for (std::size_t k = 0; k < max_moves; ++k) {
    auto p = next_position(b.rule, trace.history, budget);
    if (!p) {
      trace.halt = RunHalt::BudgetExhausted;
      break;
    }
    if (!seen.insert(*p).second) {
      trace.halt = RunHalt::RepeatedPosition;
      break;
    }
    trace.positions.push_back(*p);
    trace.history.push_back(s.bit(*p));
  }
  trace.capitals = b.d.chain(trace.history, budget);
  if (trace.capitals.size() != trace.history.size() + 1) trace.halt = RunHalt::BudgetExhausted;
  return trace;
}

void write_trace_csv(std::ostream& out, const RunTrace& trace) {
  out << "move,position,bit,capital_num,capital_den,halt\n";
  for (std::size_t k = 0; k < trace.capitals.size(); ++k) {
    out << k << ',';
    if (k > 0) out << trace.positions[k - 1] << ',' << trace.history[k - 1];
    else out << ',';
    out << ',' << trace.capitals[k].numerator() << ',' << trace.capitals[k].denominator() << ',';
    if (k + 1 == trace.capitals.size()) out << to_string(trace.halt);
    out << '\n';
  }
}

InjectivityReport check_injectivity(const ScanRule& rule, std::uint64_t horizon, const Word& history,
                                    StepBudget budget) {
  InjectivityReport report;
  std::unordered_map<Position, std::uint64_t> first;
  const bool adaptive = !rule.is_oblivious();
  if (adaptive) horizon = std::min<std::uint64_t>(horizon, history.size() + 1);
  for (std::uint64_t j = 0; j < horizon; ++j) {
    Position p;
    if (adaptive) {
      auto q = next_position(rule, history.prefix(j), budget);
      if (!q) {
        report.stopped_at = j;
        return report;
      }
      p = *q;
    } else {
      p = rule.at_move(j);
    }
    auto [it, fresh] = first.emplace(p, j);
    if (!fresh) {
      report.repeat_at = std::make_pair(it->second, j);
      return report;
    }
    if (rule.kind() == ScanRule::Kind::Permutation) {
      auto inv = std::get<PermutationRule>(rule.variant()).inverse(p);
      if (!inv || *inv != j) {
        report.inverse_mismatch = j;
        return report;
      }
    }
  }
  return report;
}

VisitedSet visited_below(const ScanRule& rule, std::uint64_t n, StepBudget budget) {
  VisitedSet out;
  switch (rule.kind()) {
    case ScanRule::Kind::Monotonic:
      for (Position p = 0; p < n; ++p) out.moves.emplace(p, p);
      return out;
    case ScanRule::Kind::Permutation: {
      const auto& r = std::get<PermutationRule>(rule.variant());
      for (Position p = 0; p < n; ++p) {
        if (auto j = r.inverse(p)) out.moves.emplace(p, *j);
        else out.complete = false;
      }
      return out;
    }
    case ScanRule::Kind::Injection: {
      const auto& r = std::get<InjectionRule>(rule.variant());
      if (r.bound_hint) {
        std::uint64_t bound = r.bound_hint(n);
        for (std::uint64_t j = 0; j < bound; ++j) {
          Position p = r.map(j);
          if (p < n) out.moves.emplace(p, j);
        }
        return out;
      }
      // Only c.e.: enumerate as far as the budget allows.
      out.complete = false;
      for (std::uint64_t j = 0; j < budget.steps && out.moves.size() < n; ++j) {
        Position p = r.map(j);
        if (p < n) out.moves.emplace(p, j);
      }
      if (out.moves.size() == n) out.complete = true;
      return out;
    }
    case ScanRule::Kind::Adaptive:
      break;
  }
  throw UnsupportedRule("visited positions of adaptive rule " + rule.id() + " depend on the sequence");
}

}  // namespace mlab
