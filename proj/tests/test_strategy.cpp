#include <set>
#include <sstream>

#include "doctest.h"
#include "mlab/strategy.hpp"
#include "support.hpp"

using namespace mlab;

namespace {

Martingale example_table() {
  return table_martingale({{Word{}, Capital(1)},
                           {Word::parse("0"), Capital(2)},
                           {Word::parse("1"), Capital(0)},
                           {Word::parse("00"), Capital(4)},
                           {Word::parse("01"), Capital(0)},
                           {Word::parse("10"), Capital(0)},
                           {Word::parse("11"), Capital(0)}});
}

std::vector<Capital> capitals(std::initializer_list<long> xs) {
  std::vector<Capital> out;
  for (long x : xs) out.emplace_back(x);
  return out;
}

}  // namespace

TEST_CASE("next_position examples") {
  CHECK(next_position(ScanRule::monotonic(), Word::parse("010"), kUnlimitedBudget) == 3u);
  CHECK(next_position(parse_scan_rule("pair_swap"), Word{}, kUnlimitedBudget) == 1u);
  CHECK(next_position(parse_scan_rule("scale:2"), Word::parse("0000"), kUnlimitedBudget) == 8u);
  CHECK(next_position(parse_scan_rule("branch"), Word::parse("1"), kUnlimitedBudget) == 3u);
  CHECK_FALSE(next_position(parse_scan_rule("partial_after:2"), Word::parse("01"), kUnlimitedBudget));
}

TEST_CASE("rule catalog") {
  auto rb = parse_scan_rule("reverse_blocks:3");
  CHECK(rb.at_move(0) == 2);
  CHECK(rb.at_move(4) == 4);
  CHECK(rb.at_move(5) == 3);
  auto ex = parse_scan_rule("explicit:1,5");
  CHECK(ex.at_move(1) == 5);
  CHECK(ex.at_move(2) == 6);
  CHECK(ex.at_move(3) == 7);
  CHECK(parse_scan_rule("affine:3:2").at_move(4) == 14);
  CHECK(parse_scan_rule("perm:2,0,1").at_move(5) == 5);
  CHECK_THROWS_AS(parse_scan_rule("perm:0,0,1"), ParseError);
  CHECK_THROWS_AS(parse_scan_rule("explicit:3,3"), ParseError);
  CHECK_THROWS_AS(parse_scan_rule("scale:0"), ParseError);
  CHECK_THROWS_AS(parse_scan_rule("sideways"), ParseError);
  CHECK(parse_scan_rule("mod:4").kind() == ScanRule::Kind::Adaptive);
  CHECK(parse_scan_rule("identity").kind() == ScanRule::Kind::Permutation);
  CHECK_THROWS_AS(parse_scan_rule("branch").at_move(0), UnsupportedRule);
}

TEST_CASE("property: bound hints are exact") {
  testing::Gen g(31);
  std::vector<std::string> ids = {"scale:1", "scale:3", "affine:2:5", "explicit:1,5", "explicit:9,2,4,0", "explicit:3"};
  for (const auto& id : ids) {
    auto r = parse_scan_rule(id);
    for (std::uint64_t n = 0; n < 40; ++n) {
      auto J = *r.move_bound(n);
      // No move at or after J visits below n, and move J-1 does.
      for (std::uint64_t j = J; j < J + 200; ++j) CHECK(r.at_move(j) >= n);
      if (J > 0) CHECK(r.at_move(J - 1) < n);
    }
  }
}

TEST_CASE("finite runs: the out-of-order example") {
  Strategy b{example_table(), parse_scan_rule("explicit:1,5")};
  CHECK(run_on_word(b, Word::parse("0"), kUnlimitedBudget).value == Capital(1));
  CHECK(run_on_word(b, Word::parse("1"), kUnlimitedBudget).value == Capital(1));
  CHECK(run_on_word(b, Word::parse("00"), kUnlimitedBudget).value == Capital(2));
  CHECK(run_on_word(b, Word::parse("01"), kUnlimitedBudget).value == Capital(0));
  CHECK(run_on_word(b, Word::parse("10"), kUnlimitedBudget).value == Capital(2));
  CHECK(run_on_word(b, Word::parse("11"), kUnlimitedBudget).value == Capital(0));
  auto run = run_on_word(b, Word::parse("01"), kUnlimitedBudget);
  CHECK(run.trace.positions == std::vector<Position>{1});
  CHECK(run.trace.halt == RunHalt::PositionOutsideWord);
}

TEST_CASE("finite-run values need not be fair") {
  Strategy b{example_table(), parse_scan_rule("perm:1,0")};
  auto bhat = function_martingale([b](const Word& w, StepBudget s) { return finite_run_value(b, w, s); }, "bhat");
  CHECK(bhat.value(Word::parse("0")) == Capital(1));
  CHECK(bhat.value(Word::parse("00")) == Capital(4));
  CHECK(bhat.value(Word::parse("01")) == Capital(0));
  auto report = check_fairness(bhat, 2, kUnlimitedBudget);
  bool at_zero = false;
  for (const auto& v : report.violations) at_zero |= v.at.to_string() == "0";
  CHECK(at_zero);
}

TEST_CASE("property: monotonic finite runs are plain evaluation") {
  testing::Gen g(32);
  std::vector<std::string> ids = {"double_on:1", "pattern:011", "majority", "saving:pattern:0"};
  for (const auto& id : ids) {
    Strategy b{parse_martingale(id), ScanRule::monotonic()};
    for (std::size_t n = 0; n <= 12; ++n) {
      Word w = g.word(n);
      CHECK(run_on_word(b, w, kUnlimitedBudget).value == b.d.value(w));
    }
  }
}

TEST_CASE("property: finite runs only read visited bits") {
  testing::Gen g(33);
  std::vector<std::string> rules = {"explicit:1,5", "scale:3", "affine:2:1", "pair_swap", "reverse_blocks:5", "perm:3,1,0,2"};
  for (int r = 0; r < 200; ++r) {
    Strategy b{parse_martingale("pattern:01"), parse_scan_rule(rules[g.below(rules.size())])};
    std::size_t n = g.between(1, 16);
    Word w = g.word(n);
    auto visited = visited_below(b.rule, n, kUnlimitedBudget);
    auto base = run_on_word(b, w, kUnlimitedBudget).value;
    for (std::size_t p = 0; p < n; ++p) {
      if (visited.moves.contains(p)) continue;
      std::vector<std::uint8_t> bits(w.bits().begin(), w.bits().end());
      bits[p] ^= 1;
      CHECK(run_on_word(b, Word(bits), kUnlimitedBudget).value == base);
    }
  }
}

TEST_CASE("sequence runs") {
  Strategy dbl{doubler(0), ScanRule::monotonic()};
  auto t = run_on_sequence(dbl, parse_source("all-zeros"), 5, kUnlimitedBudget);
  CHECK(t.capitals == capitals({1, 2, 4, 8, 16, 32}));
  CHECK(t.halt == RunHalt::Completed);
  auto t2 = run_on_sequence(dbl, parse_source("all-ones"), 3, kUnlimitedBudget);
  CHECK(t2.capitals == capitals({1, 0, 0, 0}));
  Strategy even{doubler(0), parse_scan_rule("scale:2")};
  auto t3 = run_on_sequence(even, parse_source("alternating"), 4, kUnlimitedBudget);
  CHECK(t3.capitals == capitals({1, 2, 4, 8, 16}));
  CHECK(t3.positions == std::vector<Position>{0, 2, 4, 6});
}

TEST_CASE("sequence runs halt on repeats and budget") {
  Strategy cyc{constant_martingale(1), parse_scan_rule("mod:3")};
  auto t = run_on_sequence(cyc, parse_source("all-zeros"), 10, kUnlimitedBudget);
  CHECK(t.halt == RunHalt::RepeatedPosition);
  CHECK(t.positions.size() == 3);
  Strategy part{constant_martingale(1), parse_scan_rule("partial_after:2")};
  auto t2 = run_on_sequence(part, parse_source("all-zeros"), 10, kUnlimitedBudget);
  CHECK(t2.halt == RunHalt::BudgetExhausted);
  CHECK(t2.positions.size() == 2);
  Strategy deep{partial_to_depth(2, doubler(0)), ScanRule::monotonic()};
  auto t3 = run_on_sequence(deep, parse_source("all-zeros"), 5, kUnlimitedBudget);
  CHECK(t3.halt == RunHalt::BudgetExhausted);
  CHECK(t3.capitals.size() == 3);
  CHECK_THROWS_AS(run_on_word(cyc, Word::parse("01"), kUnlimitedBudget), UnsupportedRule);
}

TEST_CASE("property: sequence runs follow the scan order and stay injective") {
  testing::Gen g(34);
  std::vector<std::string> rules = {"identity", "pair_swap", "reverse_blocks:7", "scale:5", "explicit:4,1,9", "affine:3:3"};
  for (const auto& id : rules) {
    Strategy b{majority_bettor(), parse_scan_rule(id)};
    auto src = parse_source("random:" + std::to_string(g.below(100)));
    auto t = run_on_sequence(b, src, 200, kUnlimitedBudget);
    REQUIRE(t.positions.size() == 200);
    std::set<Position> distinct(t.positions.begin(), t.positions.end());
    CHECK(distinct.size() == 200);
    for (std::size_t j = 0; j < 200; ++j) {
      CHECK(t.positions[j] == b.rule.at_move(j));
      CHECK(t.history[j] == src.bit(t.positions[j]));
    }
  }
}

TEST_CASE("injectivity checks") {
  CHECK(check_injectivity(parse_scan_rule("identity"), 100).ok());
  auto rep = check_injectivity(parse_scan_rule("map:5,0,1,5"), 10);
  REQUIRE(rep.repeat_at);
  CHECK(rep.repeat_at->first == 0);
  CHECK(rep.repeat_at->second == 3);
  // Injective but skipping position 2: the inverse does not round-trip.
  auto gap = check_injectivity(parse_scan_rule("map:0,1,3"), 10);
  CHECK_FALSE(gap.ok());
  CHECK(check_injectivity(parse_scan_rule("branch"), 50, Word::parse("0110100")).ok());
  auto cyc = check_injectivity(parse_scan_rule("mod:2"), 10, Word::parse("000"));
  REQUIRE(cyc.repeat_at);
  CHECK(cyc.repeat_at->second == 2);
}

TEST_CASE("visited_below examples") {
  auto id = visited_below(parse_scan_rule("identity"), 4, kUnlimitedBudget);
  CHECK(id.moves.size() == 4);
  CHECK(id.complete);
  auto ev = visited_below(parse_scan_rule("scale:2"), 5, kUnlimitedBudget);
  CHECK(ev.moves == std::map<Position, std::uint64_t>{{0, 0}, {2, 1}, {4, 2}});
  CHECK(ev.complete);
  auto sw = visited_below(parse_scan_rule("pair_swap"), 3, kUnlimitedBudget);
  CHECK(sw.moves == std::map<Position, std::uint64_t>{{0, 1}, {1, 0}, {2, 3}});
  // Without a hint the set is only enumerable.
  InjectionRule raw{[](std::uint64_t j) { return 3 * j; }, nullptr};
  auto open = visited_below(ScanRule(raw, "raw"), 5, StepBudget{100});
  CHECK_FALSE(open.complete);
  CHECK(open.moves.size() == 2);
}

TEST_CASE("trace CSV") {
  Strategy dbl{doubler(0), ScanRule::monotonic()};
  std::ostringstream out;
  write_trace_csv(out, run_on_sequence(dbl, parse_source("all-zeros"), 2, kUnlimitedBudget));
  CHECK(out.str() ==
        "move,position,bit,capital_num,capital_den,halt\n"
        "0,,,1,1,\n"
        "1,0,0,2,1,\n"
        "2,1,0,4,1,completed\n");
}

TEST_CASE("strategy ids") {
  auto s = parse_strategy("pattern:0+scale:3");
  CHECK(s.rule.kind() == ScanRule::Kind::Injection);
  CHECK(s.describe() == "pattern:0+scale:3");
  CHECK(parse_strategy("majority").rule.kind() == ScanRule::Kind::Monotonic);
}
