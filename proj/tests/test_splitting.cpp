#include "mlab/splitting.hpp"

#include <set>

#include "support.hpp"

using namespace mlab;
using mlab::testing::Gen;

namespace {

Capital pow2(std::uint64_t e) { return Capital(mpq_class(mpz_class(1) << static_cast<mp_bitcnt_t>(e))); }

const std::vector<std::uint64_t> kWitness{0, 256, 512, 1024, 2048};

}  // namespace

TEST_CASE("plan examples") {
  auto p = build_plan(validate_checkpoints({0, 16, 32}));
  REQUIRE(p.intervals.size() == 2);
  CHECK(p.intervals[0].s == 1);
  CHECK(p.intervals[0].subs.size() == 1);
  CHECK(p.intervals[0].subs[0].begin == 0);
  CHECK(p.intervals[0].subs[0].end == 16);
  CHECK(p.intervals[0].stake == Capital(1));
  CHECK(p.intervals[1].stake == Capital::parse("1/4"));
  CHECK(expected_gain(p, 0) == Capital(65536));

  auto q = build_plan(validate_checkpoints({0, 256, 512}));
  CHECK(q.intervals[0].s == 4);
  for (const auto& j : q.intervals[0].subs) CHECK(j.length() == 64);
  CHECK(q.intervals[0].stake == Capital::parse("1/4"));
  CHECK(expected_gain(q, 0) == pow2(62));

  CHECK_THROWS_AS(build_plan(validate_checkpoints({0, 3})), IntervalTooSmall);
  try {
    build_plan(validate_checkpoints({0, 2, 4}));
    FAIL("expected IntervalTooSmall");
  } catch (const IntervalTooSmall& e) {
    CHECK(e.interval() == 0);
  }
}

TEST_CASE("degenerate plan with one sub-interval of length 4") {
  auto p = build_plan(validate_checkpoints({0, 4, 8}));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(p.intervals[k].s == 1);
    CHECK(expected_gain(p, k) == Capital(16) / Capital(static_cast<long>((k + 1) * (k + 1))));
  }
}

TEST_CASE("witness plan numbers") {
  auto p = build_plan(validate_checkpoints(kWitness));
  std::vector<std::uint64_t> s, thr, base;
  for (const auto& iv : p.intervals) {
    s.push_back(iv.s);
    thr.push_back(iv.threshold);
  }
  CHECK(s == std::vector<std::uint64_t>{4, 4, 6, 10});
  CHECK(thr == std::vector<std::uint64_t>{3, 3, 3, 4});
  CHECK(base_threshold(256) == 2);
  CHECK(base_threshold(1024) == 3);
  CHECK(base_threshold(16) == 0);
  CHECK(base_threshold(4) == 0);
  CHECK(p.intervals[0].stake == Capital::parse("1/4"));
  CHECK(p.intervals[1].stake == Capital::parse("1/16"));
  CHECK(p.intervals[2].stake == Capital::parse("1/54"));
  CHECK(p.intervals[3].stake == Capital::parse("1/160"));
  // remainder goes to the last sub-interval: 512 = 5 * 85 + 87
  CHECK(p.intervals[2].subs.back().length() == 87);
  CHECK(p.intervals[2].subs.front().length() == 85);
}

TEST_CASE("property: plans partition the intervals and stakes stay below 2") {
  Gen g(31);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<std::uint64_t> cp{0, g.between(4, 300)};
    std::size_t n = g.between(0, 5);
    for (std::size_t i = 0; i < n; ++i) cp.push_back(2 * cp.back() + g.below(300));
    auto p = build_plan(validate_checkpoints(cp));
    Capital total(0);
    for (std::size_t k = 0; k < p.intervals.size(); ++k) {
      const auto& iv = p.intervals[k];
      Position at = iv.begin;
      for (const auto& j : iv.subs) {
        CHECK(j.begin == at);
        CHECK(j.length() >= 1);
        at = j.end;
      }
      CHECK(at == iv.end);
      CHECK(iv.subs.size() == iv.s);
      std::uint64_t lg = floor_log2(iv.end - iv.begin);
      CHECK(iv.s == std::max<std::uint64_t>(1, (iv.end - iv.begin) / (lg * lg)));
      total += iv.stake * Capital(static_cast<long>(iv.s));
      CHECK(iv.stake * Capital(static_cast<long>(iv.s)) ==
            Capital(1) / Capital(static_cast<long>((k + 1) * (k + 1))));
    }
    CHECK(total < Capital(2));
  }
}

TEST_CASE("strategy against all zeros") {
  auto plan = build_plan(validate_checkpoints(kWitness));
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{1 << 24});
  CHECK_FALSE(s.truncated);
  // S_k = {0^n, 1^n} from REPEAT("0") and REPEAT("1")
  REQUIRE(s.games.size() == 8);
  // Cantor order: (0,0) (0,1) (1,0) (0,2)... here (0,0),(0,1),(1,0),(1,1),(2,0),...
  CHECK(s.games[0].k == 0);
  CHECK(s.games[0].e == 0);
  CHECK(s.games[1].k == 0);
  CHECK(s.games[1].e == 1);
  CHECK(s.games[2].k == 1);
  CHECK(s.games[2].e == 0);
  for (const auto& gm : s.games) {
    CHECK(gm.target == Word::repeat(gm.e == 0 ? 0 : 1, gm.j.length()));
  }
  CHECK(check_injectivity(s.strategy.rule, plan.horizon() + 100).ok());
  CHECK(capital_at_risk(s) < Capital(2));

  auto trace = run_on_sequence(s.strategy, parse_source("all-zeros"), s.order.size(), kUnlimitedBudget);
  CHECK(trace.halt == RunHalt::Completed);
  auto rows = gain_table(plan, s, trace);
  std::size_t wins = 0;
  for (const auto& r : rows) {
    const auto& iv = plan.intervals[r.k];
    // oracle: J^0 doubles all the way, J^1 loses its stake
    Capital want = iv.stake * (pow2(iv.subs[0].length()) - Capital(1)) - iv.stake;
    CHECK(r.gain == want);
    CHECK(r.gain >= Capital(1));
    CHECK(r.expected == expected_gain(plan, r.k));
    wins += r.gain >= Capital(1) ? 1 : 0;
  }
  CHECK(wins == 4);
  Capital final_cap = trace.capitals.back();
  Capital sum(2);
  for (const auto& r : rows) sum += r.gain;
  CHECK(final_cap == sum);
}

TEST_CASE("source matching no candidate loses every opened reserve") {
  auto plan = build_plan(validate_checkpoints({0, 64, 128}));
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{1 << 24});
  auto trace = run_on_sequence(s.strategy, parse_source("alternating"), s.order.size(), kUnlimitedBudget);
  auto rows = gain_table(plan, s, trace);
  for (const auto& r : rows) {
    Capital lost(0);
    for (const auto& gm : s.games) {
      if (gm.k == r.k) lost += gm.stake;
    }
    CHECK(r.gain == -lost);
  }
  CHECK(trace.capitals.back() == Capital(2) - capital_at_risk(s));
  CHECK(trace.capitals.back() > Capital(0));
}

TEST_CASE("property: capital stays positive and the order ignores the source") {
  auto plan = build_plan(validate_checkpoints({0, 64, 160, 320}));
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{1 << 24});
  Gen g(41);
  std::vector<Position> first;
  for (int rep = 0; rep < 30; ++rep) {
    auto src = parse_source("random:" + std::to_string(g.below(1000000)));
    auto trace = run_on_sequence(s.strategy, src, s.order.size() + 20, kUnlimitedBudget);
    for (const auto& c : trace.capitals) CHECK(c > Capital(0));
    if (rep == 0) first = trace.positions;
    CHECK(trace.positions == first);
    std::set<Position> seen(trace.positions.begin(), trace.positions.end());
    CHECK(seen.size() == trace.positions.size());
  }
  CHECK(check_fairness(s.strategy.d, 10, kUnlimitedBudget).fair());
}

TEST_CASE("overflow candidates are dropped") {
  // a generous threshold lets LITERAL programs in: more candidates than slots
  auto plan = build_plan(validate_checkpoints({0, 4}), 10);
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{1 << 24});
  CHECK(plan.intervals[0].s == 1);
  CHECK(s.games.size() == 1);
  CHECK(s.overflow[0] > 0);
}

TEST_CASE("budget truncation stops opening games") {
  auto plan = build_plan(validate_checkpoints({0, 256, 512}));
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{10});
  CHECK(s.truncated);
  CHECK(s.games.size() < 4);
}
