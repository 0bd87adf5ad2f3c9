#include "mlab/splitting.hpp"

#include <cmath>
#include <memory>

namespace mlab {

std::uint64_t base_threshold(std::uint64_t L) {
  long double x = std::log2(static_cast<long double>(L));
  long double t = x - 2 * std::log2(x);
  if (t <= 0) return 0;
  // nudge so exact integers are not lost to rounding
  return static_cast<std::uint64_t>(std::floor(t + 1e-12L));
}

SplittingPlan build_plan(const Checkpoints& cp, std::uint64_t slack) {
  SplittingPlan plan;
  plan.checkpoints = cp.values();
  for (std::size_t k = 0; k < cp.interval_count(); ++k) {
    std::uint64_t L = cp.interval_length(k);
    if (L < 4) throw IntervalTooSmall(k);
    PlanInterval iv;
    iv.begin = cp.interval_begin(k);
    iv.end = cp.interval_end(k);
    std::uint64_t lg = floor_log2(L);
    iv.s = std::max<std::uint64_t>(1, L / (lg * lg));
    std::uint64_t len = L / iv.s;
    for (std::uint64_t e = 0; e < iv.s; ++e) {
      Position b = iv.begin + e * len;
      iv.subs.push_back({b, e + 1 == iv.s ? iv.end : b + len});
    }
    std::uint64_t kk = k + 1;
    iv.stake = Capital(1) / Capital(static_cast<long>(kk * kk * iv.s));
    iv.threshold = base_threshold(L) + slack;
    plan.intervals.push_back(std::move(iv));
  }
  return plan;
}

Capital expected_gain(const SplittingPlan& plan, std::size_t k) {
  const auto& iv = plan.intervals.at(k);
  std::uint64_t shortest = iv.subs.front().length();
  for (const auto& j : iv.subs) shortest = std::min(shortest, j.length());
  return iv.stake * Capital(mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(shortest)));
}

namespace {

struct GameMoves {
  std::vector<std::size_t> game;   // move -> game index
  std::vector<int> target;         // move -> bit bet on
  std::vector<Capital> stakes;     // per game
};

// 2 + sum over games of (reserve - stake); each move of a live game bets the
// whole reserve on the target bit.
class SplittingModel final : public MartingaleModel {
 public:
  explicit SplittingModel(std::shared_ptr<const GameMoves> m) : m_(std::move(m)) {}

  EvalOutcome evaluate(const Word& h, StepBudget budget) const override {
    auto c = evaluate_chain(h, budget);
    if (c.size() != h.size() + 1) return std::nullopt;
    return c.back();
  }

  ChainOutcome evaluate_chain(const Word& h, StepBudget budget) const override {
    ChainOutcome out;
    if (budget.steps < h.size() + 1) return out;
    std::vector<Capital> reserve = m_->stakes;
    Capital cap(2);
    out.push_back(cap);
    for (std::size_t j = 0; j < h.size(); ++j) {
      if (j < m_->game.size()) {
        Capital& r = reserve[m_->game[j]];
        if (h[j] == m_->target[j]) {
          cap += r;
          r += r;
        } else {
          cap -= r;
          r = Capital(0);
        }
      }
      out.push_back(cap);
    }
    return out;
  }

  std::string describe() const override { return "splitting"; }

 private:
  std::shared_ptr<const GameMoves> m_;
};

}  // namespace

SplittingStrategy build_splitting_strategy(const SplittingPlan& plan, const DescriptionSystem& ds,
                                           StepBudget budget) {
  SplittingStrategy out{Strategy{zero_martingale(), ScanRule::monotonic()}, {}, {}, {}, false};
  std::size_t K = plan.intervals.size();
  // The candidate sets, materialized before any betting.
  std::vector<std::vector<Word>> S(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& iv = plan.intervals[k];
    auto stream = enumerate_low(ds, iv.end - iv.begin, iv.end - iv.begin, iv.threshold, budget);
    out.truncated = out.truncated || stream.truncated;
    S[k] = std::move(stream.words);
  }
  out.overflow.assign(K, 0);
  for (std::size_t k = 0; k < K; ++k) {
    if (S[k].size() > plan.intervals[k].s) out.overflow[k] = S[k].size() - plan.intervals[k].s;
  }
  auto moves = std::make_shared<GameMoves>();
  // Cantor order over (k, e): diagonal t visits k = 0..t with e = t - k.
  std::size_t longest = 0;
  for (const auto& s : S) longest = std::max(longest, s.size());
  for (std::size_t t = 0; t + 1 < K + longest; ++t) {
    for (std::size_t k = 0; k <= t && k < K; ++k) {
      std::size_t e = t - k;
      const auto& iv = plan.intervals[k];
      if (e >= S[k].size() || e >= iv.s) continue;
      SubGame g;
      g.k = k;
      g.e = e;
      g.j = iv.subs[e];
      g.stake = iv.stake;
      for (Position p = g.j.begin; p < g.j.end; ++p) {
        int bit = S[k][e][p - iv.begin];
        g.target.push_back(bit);
        out.order.push_back(p);
        moves->game.push_back(out.games.size());
        moves->target.push_back(bit);
      }
      moves->stakes.push_back(g.stake);
      out.games.push_back(std::move(g));
    }
  }
  out.strategy = Strategy{Martingale::make<SplittingModel>(moves), injection_from_list(out.order, "splitting")};
  return out;
}

std::vector<GainRow> gain_table(const SplittingPlan& plan, const SplittingStrategy& s, const RunTrace& trace) {
  std::vector<GainRow> rows(plan.intervals.size());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].k = k;
    rows[k].checkpoint = plan.intervals[k].end;
    rows[k].expected = expected_gain(plan, k);
  }
  std::size_t start = 0;
  for (const auto& g : s.games) {
    Capital reserve = g.stake;
    for (std::size_t i = 0; i < g.target.size() && start + i < trace.history.size(); ++i) {
      if (trace.history[start + i] == g.target[i]) reserve += reserve;
      else reserve = Capital(0);
    }
    start += g.target.size();
    rows[g.k].games += 1;
    rows[g.k].gain += reserve - g.stake;
  }
  return rows;
}

Capital capital_at_risk(const SplittingStrategy& s) {
  Capital sum(0);
  for (const auto& g : s.games) sum += g.stake;
  return sum;
}

}  // namespace mlab
