#include <algorithm>
#include <numeric>

#include "doctest.h"
#include "mlab/transforms.hpp"
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

/// Brute-force average of the finite-run value over every extension of
/// length M.
Capital oracle_average(const Strategy& b, const Word& w, std::size_t M) {
  Capital sum;
  std::size_t free = M - w.size();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free); ++mask) {
    Word x = w;
    for (std::size_t i = 0; i < free; ++i) x.push_back(static_cast<int>((mask >> i) & 1));
    sum += *run_on_word(b, x, kUnlimitedBudget).value;
  }
  return sum / Capital::pow2(free);
}

ScanRule random_permutation(testing::Gen& g, std::size_t max_len) {
  std::vector<Position> head(g.between(1, max_len));
  std::iota(head.begin(), head.end(), 0);
  std::shuffle(head.begin(), head.end(), g.engine());
  return permutation_from_list(head, "random");
}

Martingale random_base(testing::Gen& g) {
  switch (g.below(4)) {
    case 0:
      return doubler(g.bit());
    case 1:
      return pattern_bettor(g.word(g.between(1, 4)));
    case 2:
      return majority_bettor();
    default:
      return weighted_sum({{Capital(1), doubler(g.bit())}, {Capital(1, 2), pattern_bettor(g.word(3))}});
  }
}

}  // namespace

TEST_CASE("averaging_horizon examples") {
  CHECK(averaging_horizon(parse_scan_rule("identity"), 5) == 5);
  CHECK(averaging_horizon(parse_scan_rule("pair_swap"), 3) == 4);
  CHECK(averaging_horizon(parse_scan_rule("explicit:1,5"), 2) == 2);
  CHECK(averaging_horizon(parse_scan_rule("explicit:1,5"), 3) == 3);
  CHECK(averaging_horizon(parse_scan_rule("explicit:1,5"), 7) == 7);
  CHECK(averaging_horizon(parse_scan_rule("explicit:4,0"), 1) == 5);
  CHECK(averaging_horizon(ScanRule::monotonic(), 0) == 0);
  InjectionRule raw{[](std::uint64_t j) { return 3 * j; }, nullptr};
  CHECK_THROWS_AS(averaging_horizon(ScanRule(raw, "raw"), 4), NoBound);
  CHECK_THROWS_AS(averaging_horizon(parse_scan_rule("branch"), 4), UnsupportedRule);
}

TEST_CASE("average_martingale on the out-of-order example") {
  Strategy b{example_table(), parse_scan_rule("explicit:1,5")};
  auto av = average_martingale(b);
  CHECK(av.value(Word{}) == Capital(1));
  CHECK(av.value(Word::parse("0")) == Capital(1));
  CHECK(av.value(Word::parse("00")) == Capital(2));
  CHECK(av.value(Word::parse("01")) == Capital(0));
  CHECK(check_fairness(av, 2, kUnlimitedBudget).fair());
}

TEST_CASE("average of a monotonic strategy is the martingale") {
  Strategy b{pattern_bettor(Word::parse("011")), ScanRule::monotonic()};
  auto av = average_martingale(b);
  testing::Gen g(41);
  for (int r = 0; r < 30; ++r) {
    Word w = g.word(g.below(14));
    CHECK(av.value(w) == b.d.value(w));
  }
}

TEST_CASE("average with every visited position known is the finite run") {
  Strategy b{doubler(0), parse_scan_rule("reverse_blocks:4")};
  Word w = Word::parse("00000010");
  CHECK(average_value(b, w, 8, kUnlimitedBudget) == run_on_word(b, w, kUnlimitedBudget).value);
}

TEST_CASE("unknown-bit cap") {
  // Position 0 is visited last in its block of 12: 11 unknown bits first.
  Strategy b{doubler(0), parse_scan_rule("reverse_blocks:12")};
  CHECK_THROWS_AS(average_martingale(b, 10).value(Word::parse("0")), HorizonTooLarge);
  CHECK(average_martingale(b).value(Word::parse("0")) == Capital(2));
  CHECK(average_martingale(b).value(Word::parse("1")) == Capital(0));
}

TEST_CASE("property: averaging does not depend on the horizon and matches brute force") {
  testing::Gen g(42);
  for (int r = 0; r < 60; ++r) {
    Strategy b{random_base(g), random_permutation(g, 8)};
    Word w = g.word(g.below(9));
    auto M = averaging_horizon(b.rule, w.size());
    auto v = average_value(b, w, M, kUnlimitedBudget);
    REQUIRE(v);
    CHECK(average_value(b, w, M + 3, kUnlimitedBudget) == v);
    CHECK(oracle_average(b, w, M + 2) == *v);
  }
  for (const char* id : {"explicit:1,5", "scale:2", "affine:3:1", "explicit:4,0,7"}) {
    Strategy b{pattern_bettor(Word::parse("01")), parse_scan_rule(id)};
    for (std::size_t n = 0; n < 8; ++n) {
      Word w = g.word(n);
      auto M = averaging_horizon(b.rule, n);
      CHECK(average_value(b, w, M, kUnlimitedBudget) == average_value(b, w, M + 3, kUnlimitedBudget));
    }
  }
}

TEST_CASE("property: averages are martingales") {
  testing::Gen g(43);
  for (int r = 0; r < 10; ++r) {
    Strategy b{random_base(g), random_permutation(g, 10)};
    CHECK(check_fairness(average_martingale(b), 8, kUnlimitedBudget).fair());
  }
  for (const char* id : {"explicit:1,5", "scale:3", "affine:2:1"}) {
    Strategy b{majority_bettor(), parse_scan_rule(id)};
    CHECK(check_fairness(average_martingale(b), 8, kUnlimitedBudget).fair());
    CHECK(check_fairness(monotonize(b), 8, kUnlimitedBudget).fair());
  }
}

TEST_CASE("monotonize examples") {
  Strategy mono{doubler(1), ScanRule::monotonic()};
  auto saved = saving_transform(doubler(1)).martingale();
  testing::Gen g(44);
  for (int r = 0; r < 20; ++r) {
    Word w = g.word(g.below(12));
    CHECK(monotonize(mono).value(w) == saved.value(w));
  }

  // Pair-swapped doubler on zeros: the bank reaches 3 within 8 bits.
  Strategy swap{doubler(0), parse_scan_rule("pair_swap")};
  Strategy saving_swap{saving_transform(doubler(0)).martingale(), swap.rule};
  auto run = run_on_word(saving_swap, Word::repeat(0, 8), kUnlimitedBudget);
  auto states = saving_transform(doubler(0)).chain(run.trace.history);
  CHECK(states.back().bank >= Capital(3));
  auto out = monotonize(swap);
  for (std::size_t m = 8; m <= 16; ++m) CHECK(out.value(Word::repeat(0, m)) >= Capital(3));
}

TEST_CASE("property: banked capital survives averaging") {
  testing::Gen g(45);
  for (int r = 0; r < 20; ++r) {
    Strategy b{random_base(g), random_permutation(g, 10)};
    auto saving = saving_transform(b.d);
    Strategy sb{saving.martingale(), b.rule};
    auto out = monotonize(b);
    // Sources biased toward the bettor's favourite bits so banks grow.
    Word a = g.word(64);
    for (std::size_t n = 0; n <= 64; n += 4) {
      auto run = run_on_word(sb, a.prefix(n), kUnlimitedBudget);
      Capital bank = saving.chain(run.trace.history).back().bank;
      for (std::size_t m = n; m <= 64; m += 5) CHECK(out.value(a.prefix(m)) >= bank);
    }
  }
}

TEST_CASE("closed classes: cover test") {
  auto c = make_staged({{Word::parse("00")}, {Word::parse("01")}, {Word::parse("1")}});
  CHECK_FALSE(c->covers(cylinder_constraint(Word::parse("0")), 0));
  CHECK(c->covers(cylinder_constraint(Word::parse("0")), 1));
  CHECK(c->covers(cylinder_constraint(Word::parse("001")), 0));
  CHECK_FALSE(c->covers(cylinder_constraint(Word{}), 1));
  CHECK(c->covers(cylinder_constraint(Word{}), 2));
  CHECK(c->covers(cylinder_constraint(Word{}), 99));
  // Scattered constraint: X(1) = 1 with cylinders [01], [11].
  auto d = make_staged({{Word::parse("01"), Word::parse("11")}});
  CHECK(d->covers(Constraint{{1, 1}}, 0));
  CHECK_FALSE(d->covers(Constraint{{1, 0}}, 0));
}

TEST_CASE("closed classes: text format round trip") {
  auto s = StagedCylinders::parse("# comment\nstage 0: 01, -\nstage 2: 1\n");
  CHECK(s.stages().size() == 3);
  CHECK(s.stages()[0].size() == 2);
  CHECK(s.stages()[0][1].empty());
  CHECK(s.stages()[1].empty());
  CHECK(s.serialize() == "stage 0: 01, -\nstage 1:\nstage 2: 1\n");
  CHECK(StagedCylinders::parse(s.serialize()).serialize() == s.serialize());
  CHECK_THROWS_AS(StagedCylinders::parse("stag 1: 0"), ParseError);
  CHECK_THROWS_AS(StagedCylinders::parse("stage x: 0"), ParseError);
  CHECK_THROWS_AS(StagedCylinders::parse("stage 1: 2"), ParseError);
}

TEST_CASE("conjugate_class examples") {
  auto u = make_staged({{Word::parse("0")}});
  auto same = conjugate_class(parse_scan_rule("identity"), u);
  CHECK(*same->cylinders_by(0) == std::vector<Word>{Word::parse("0")});
  auto swapped = conjugate_class(parse_scan_rule("pair_swap"), u);
  CHECK(*swapped->cylinders_by(0) == std::vector<Word>{Word::parse("00"), Word::parse("10")});
  CHECK(swapped->covers(Constraint{{1, 0}}, 0));
  CHECK_FALSE(swapped->covers(Constraint{{0, 0}}, 0));
  CHECK(conjugate_class(parse_scan_rule("reverse_blocks:3"), empty_class_complement())->cylinders_by(5)->empty());
  CHECK_THROWS_AS(conjugate_class(parse_scan_rule("scale:2"), u), UnsupportedRule);
}

TEST_CASE("property: conjugation matches histories") {
  testing::Gen g(46);
  for (int r = 0; r < 30; ++r) {
    auto rule = random_permutation(g, 6);
    std::vector<Word> cyl;
    for (int i = 0; i < 3; ++i) cyl.push_back(g.word(g.between(1, 4)));
    auto u = make_staged({cyl});
    auto conj = conjugate_class(rule, u);
    // A sequence A (as a long prefix) is in U iff its history is in the conjugate.
    for (int s = 0; s < 20; ++s) {
      Word a = g.word(12);
      Word x;
      for (std::size_t j = 0; j < 12; ++j) x.push_back(a[rule.at_move(j)]);
      bool in_u = std::any_of(cyl.begin(), cyl.end(), [&](const Word& c) { return c.is_prefix_of(a); });
      CHECK(conj->covers(cylinder_constraint(x), 0) == in_u);
      auto listed = *conj->cylinders_by(0);
      bool in_conj = std::any_of(listed.begin(), listed.end(), [&](const Word& c) { return c.is_prefix_of(x); });
      CHECK(in_conj == in_u);
    }
  }
}

TEST_CASE("totalization examples") {
  auto plain = totalize_martingale(pattern_bettor(Word::parse("01")), empty_class_complement(), 6, kUnlimitedBudget);
  CHECK(plain.marking.frozen_at.empty());
  for_each_word(6, [&](const Word& w) { CHECK(plain.martingale.value(w) == pattern_bettor(Word::parse("01")).value(w)); });

  auto d = undefined_after(Word::parse("1"), pattern_bettor(Word::parse("0")));
  auto cover_one = make_staged({{Word::parse("1")}});
  auto t = totalize_martingale(d, cover_one, 3, kUnlimitedBudget);
  CHECK(t.marking.frozen_at == std::set<Word>{Word::parse("1")});
  CHECK(t.marking.is_inactive(Word::parse("10")));
  CHECK_FALSE(t.marking.is_inactive(Word::parse("1")));
  CHECK(t.martingale.value(Word::parse("10")) == Capital(1, 2));
  CHECK(t.martingale.value(Word::parse("11")) == Capital(1, 2));
  CHECK(t.martingale.value(Word::parse("1011")) == Capital(1, 2));
  CHECK(t.martingale.value(Word::parse("01")) == d.value(Word::parse("01")));
  CHECK(check_fairness(t.martingale, 6, kUnlimitedBudget).fair());

  try {
    totalize_martingale(d, make_staged({{Word::parse("0")}}), 3, kUnlimitedBudget);
    FAIL("expected RaceTimeout");
  } catch (const RaceTimeout& e) {
    CHECK(e.at() == Word::parse("1"));
  }
}

TEST_CASE("totalization: the race is decided by ticks") {
  // Children of "1" need 3 steps; the cover arrives at stage 0 (tick 1).
  auto d = pattern_bettor(Word::parse("0"));
  auto early = totalize_martingale(d, make_staged({{Word::parse("1")}}), 3, kUnlimitedBudget);
  CHECK(early.marking.frozen_at.contains(Word::parse("1")));
  // A cover arriving at stage 5 is too late.
  auto late = totalize_martingale(d, make_staged({{}, {}, {}, {}, {}, {Word::parse("1")}}), 3, kUnlimitedBudget);
  CHECK_FALSE(late.marking.frozen_at.contains(Word::parse("1")));
  // With few ticks the partial martingale cannot be decided.
  auto partial = partial_to_depth(1, d);
  CHECK_THROWS_AS(totalize_martingale(partial, make_staged({{}, {}, {}, {Word::parse("0")}}), 2, StepBudget{3}), RaceTimeout);
}

TEST_CASE("property: randomized totalization instances") {
  testing::Gen g(47);
  int resolved = 0, timeouts = 0;
  for (int r = 0; r < 40; ++r) {
    Word root = g.word(g.between(0, 3));
    auto d = undefined_after(root, random_base(g));
    std::vector<std::vector<Word>> stages(g.between(1, 6));
    for (auto& s : stages) {
      for (std::uint64_t i = g.below(3); i > 0; --i) s.push_back(g.word(g.between(1, 5)));
    }
    bool hypothesis = g.below(4) != 0;
    if (hypothesis) stages[g.below(stages.size())].push_back(root.child(0)), stages.back().push_back(root.child(1));
    auto cls = make_staged(stages);
    bool covered = cls->covers(cylinder_constraint(root), 1u << 20);
    if (!covered) {
      CHECK_THROWS_AS(totalize_martingale(d, cls, 10, kUnlimitedBudget), RaceTimeout);
      ++timeouts;
      continue;
    }
    ++resolved;
    auto t = totalize_martingale(d, cls, 10, kUnlimitedBudget);
    auto report = check_fairness(t.martingale, 10, kUnlimitedBudget);
    CHECK(report.fair());
    CHECK(report.exhausted.empty());
    auto all = *cls->cylinders_by(1u << 20);
    for_each_word(10, [&](const Word& w) {
      bool avoids = std::none_of(all.begin(), all.end(), [&](const Word& c) { return c.is_prefix_of(w); });
      if (avoids || !t.marking.is_inactive(w)) CHECK(t.martingale.value(w) == d.value(w));
      for (const auto& f : t.marking.frozen_at) {
        if (f.is_prefix_of(w)) CHECK(t.martingale.value(w) == t.martingale.value(f));
      }
    });
  }
  CHECK(resolved > 10);
  CHECK(timeouts > 0);
}

TEST_CASE("totalize_strategy") {
  Strategy total{majority_bettor(), parse_scan_rule("pair_swap")};
  auto same = totalize_strategy(total, make_staged({{Word::parse("11")}}), 8, kUnlimitedBudget);
  auto src = parse_source("random:5");
  CHECK(run_on_sequence(same, src, 8, kUnlimitedBudget).capitals == run_on_sequence(total, src, 8, kUnlimitedBudget).capitals);

  // The history starts with A(1); the martingale dies after history "1".
  Strategy partial{undefined_after(Word::parse("1"), pattern_bettor(Word::parse("0"))), parse_scan_rule("pair_swap")};
  auto cls = make_staged({{Word::parse("01"), Word::parse("11")}});
  auto fixed = totalize_strategy(partial, cls, 8, kUnlimitedBudget);
  CHECK(check_fairness(fixed.d, 8, kUnlimitedBudget).exhausted.empty());
  CHECK(fixed.d.value(Word::parse("1011")) == Capital(1, 2));
  // Members of the class (A(1) = 0) see identical capitals.
  for (const char* a : {"00000000", "10110100", "00101101"}) {
    auto s = parse_source(std::string("word:") + a);
    CHECK(run_on_sequence(fixed, s, 8, kUnlimitedBudget).capitals == run_on_sequence(partial, s, 8, kUnlimitedBudget).capitals);
  }

  Strategy mono{undefined_after(Word::parse("1"), doubler(0)), ScanRule::monotonic()};
  auto via_strategy = totalize_strategy(mono, make_staged({{Word::parse("1")}}), 6, kUnlimitedBudget);
  auto direct = totalize_martingale(mono.d, make_staged({{Word::parse("1")}}), 6, kUnlimitedBudget);
  for_each_word(6, [&](const Word& w) { CHECK(via_strategy.d.value(w) == direct.martingale.value(w)); });
}
