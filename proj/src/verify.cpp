#include "mlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mlab/diagonalize.hpp"
#include "mlab/splitting.hpp"

namespace mlab {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : e_(seed) {}
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(e_); }
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(e_);
  }
  int bit() { return static_cast<int>(below(2)); }
  Word word(std::size_t n) {
    Word w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(bit());
    return w;
  }
  std::mt19937_64& engine() { return e_; }

 private:
  std::mt19937_64 e_;
};

/// Collects cases of one property; keeps the first failure.
class Prop {
 public:
  Prop(std::string suite, std::string name) {
    r_.suite = std::move(suite);
    r_.name = std::move(name);
    start_ = std::chrono::steady_clock::now();
  }
  void check(bool ok, const std::function<std::string()>& what) {
    ++r_.cases;
    if (ok || !r_.passed) return;
    r_.passed = false;
    r_.counterexample = what();
  }
  void fail(const std::string& what) {
    check(false, [&] { return what; });
  }
  void note(std::string n) { r_.note = std::move(n); }
  PropertyReport done() {
    r_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    return r_;
  }

 private:
  PropertyReport r_;
  std::chrono::steady_clock::time_point start_;
};

/// Catches library errors as failed cases.
void guarded(Prop& p, const std::string& label, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    p.fail(label + ": " + e.what());
  }
}

std::string fairness_issue(const FairnessReport& r) {
  if (r.violations.empty()) return "";
  const auto& v = r.violations.front();
  return "'" + v.at.to_string() + "' " + v.detail;
}

ScanRule random_permutation(Rng& g, std::size_t max_len) {
  std::vector<Position> head(g.between(1, max_len));
  std::iota(head.begin(), head.end(), 0);
  std::shuffle(head.begin(), head.end(), g.engine());
  std::string id = "perm:";
  for (std::size_t i = 0; i < head.size(); ++i) id += (i ? "," : "") + std::to_string(head[i]);
  return permutation_from_list(head, id);
}

Martingale random_base(Rng& g) {
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

/// Catalog ids of every fair martingale family.
std::vector<std::string> martingale_catalog() {
  std::vector<std::string> ids = {"zero", "const:1", "const:7/3", "double_on:0", "double_on:1", "pattern:0",
                                  "pattern:1", "pattern:01", "pattern:110", "majority", "saving:double_on:0",
                                  "saving:pattern:1"};
  for (const auto& e : roster_catalog()) {
    if (e.kind == EntryKind::TotalMartingale || e.kind == EntryKind::PartialMartingale) ids.push_back(e.spec);
  }
  return ids;
}

// ---------------------------------------------------------------------------

std::vector<PropertyReport> fairness_suite(const VerifyOptions& o) {
  const std::size_t depth = 10;
  std::vector<PropertyReport> out;
  {
    Prop p("fairness", "catalog martingales are fair to depth 10");
    for (const auto& id : martingale_catalog()) {
      guarded(p, id, [&] {
        auto r = check_fairness(parse_martingale(id), depth, kUnlimitedBudget);
        p.check(r.fair(), [&] { return id + " at " + fairness_issue(r); });
      });
    }
    out.push_back(p.done());
  }
  {
    Prop p("fairness", "transform outputs are fair to depth 10");
    Rng g(o.seed);
    auto add = [&](const std::string& label, const std::function<Martingale()>& make) {
      guarded(p, label, [&] {
        auto r = check_fairness(make(), depth, kUnlimitedBudget);
        p.check(r.fair() && r.exhausted.empty(), [&] {
          return label + (r.fair() ? std::string(" undefined below depth") : " at " + fairness_issue(r));
        });
      });
    };
    for (int i = 0; i < 4; ++i) {
      auto a = random_base(g), b = random_base(g);
      Capital c(static_cast<long>(g.between(1, 9)), g.between(1, 9));
      add("weighted_sum(" + a.describe() + ", " + c.to_string() + " " + b.describe() + ")",
          [=] { return weighted_sum({{Capital(1), a}, {c, b}}); });
      add("saving(" + a.describe() + ")", [=] { return saving_transform(a).martingale(); });
    }
    for (int i = 0; i < 4; ++i) {
      Strategy b{random_base(g), random_permutation(g, 10)};
      add("average(" + b.describe() + ")", [=] { return average_martingale(b); });
      add("monotonize(" + b.describe() + ")", [=] { return monotonize(b); });
    }
    for (const char* rule : {"scale:2", "affine:3:1", "explicit:4,0,7"}) {
      Strategy b{majority_bettor(), parse_scan_rule(rule)};
      add("average(" + b.describe() + ")", [=] { return average_martingale(b); });
      add("monotonize(" + b.describe() + ")", [=] { return monotonize(b); });
    }
    // partial martingales whose undefined region gets covered
    struct Inst {
      const char* d;
      std::vector<std::vector<Word>> stages;
    };
    std::vector<Inst> inst = {
        {"undefined_after:1:pattern:0", {{}, {Word::parse("1")}}},
        {"undefined_after:01:majority", {{Word::parse("010"), Word::parse("011")}}},
        {"partial:3:double_on:0", {{}, {}, {Word::parse("")}}},
    };
    for (const auto& in : inst) {
      add(std::string("totalize(") + in.d + ")", [&] {
        return totalize_martingale(parse_martingale(in.d), make_staged(in.stages), depth, kUnlimitedBudget)
            .martingale;
      });
    }
    out.push_back(p.done());
  }
  {
    Prop p("fairness", "conservation: sum over length n is 2^n d(empty)");
    for (const auto& id : martingale_catalog()) {
      auto m = parse_martingale(id);
      if (!m.declared_total()) continue;
      for (std::size_t n = 0; n <= depth; ++n) {
        Capital total;
        for_each_word(n, [&](const Word& w) { total += m.value(w); });
        p.check(total == Capital::pow2(n) * m.initial_capital(),
                [&] { return id + " n=" + std::to_string(n) + " sum " + total.to_string(); });
      }
    }
    out.push_back(p.done());
  }
  return out;
}

std::vector<PropertyReport> averaging_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  Rng g(o.seed + 1);
  {
    Prop p("averaging", "Av does not depend on the horizon (M vs M+3)");
    for (int r = 0; r < 50; ++r) {
      Strategy b{random_base(g), random_permutation(g, 8)};
      Word w = g.word(g.below(9));
      guarded(p, b.describe(), [&] {
        auto M = averaging_horizon(b.rule, w.size());
        auto v = average_value(b, w, M, kUnlimitedBudget);
        auto v3 = average_value(b, w, M + 3, kUnlimitedBudget);
        p.check(v && v3 && *v == *v3, [&] {
          return b.describe() + " w='" + w.to_string() + "' M=" + std::to_string(M) + ": " +
                 (v ? v->to_string() : "undefined") + " vs " + (v3 ? v3->to_string() : "undefined");
        });
      });
    }
    out.push_back(p.done());
  }
  {
    Prop p("averaging", "Av matches the brute-force mean of finite runs");
    for (int r = 0; r < 30; ++r) {
      Strategy b{random_base(g), random_permutation(g, 6)};
      Word w = g.word(g.below(7));
      guarded(p, b.describe(), [&] {
        std::size_t M = averaging_horizon(b.rule, w.size()) + 1;
        Capital sum;
        std::size_t free = M - w.size();
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << free); ++mask) {
          Word x = w;
          for (std::size_t i = 0; i < free; ++i) x.push_back(static_cast<int>((mask >> i) & 1));
          sum += *finite_run_value(b, x, kUnlimitedBudget);
        }
        sum /= Capital::pow2(free);
        Capital v = average_martingale(b).value(w);
        p.check(v == sum, [&] {
          return b.describe() + " w='" + w.to_string() + "': " + v.to_string() + " vs " + sum.to_string();
        });
      });
    }
    out.push_back(p.done());
  }
  return out;
}

/// 64 bits chosen along the strategy's scan order, following the bit its
/// martingale favours four times out of five.
Word favoured_source(const Strategy& b, Rng& g, std::size_t n) {
  std::vector<int> a(n, -1);
  Word history;
  for (std::uint64_t j = 0; history.size() < n; ++j) {
    Position pos = b.rule.at_move(j);
    if (pos >= n) continue;
    int bit = b.d.value(history.child(0)) >= b.d.value(history.child(1)) ? 0 : 1;
    if (g.below(5) == 0) bit = g.bit();
    a[pos] = bit;
    history.push_back(bit);
  }
  Word w;
  for (int x : a) w.push_back(x);
  return w;
}

std::vector<PropertyReport> saving_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  Rng g(o.seed + 2);
  const std::size_t n = 64;
  {
    Prop p("saving", "bank never decreases and active stays below 2 d(empty)");
    for (const auto& id : martingale_catalog()) {
      auto base = parse_martingale(id);
      if (!base.declared_total() || base.initial_capital().is_zero()) continue;
      for (int r = 0; r < 5; ++r) {
        Word w;
        for (std::size_t i = 0; i < n; ++i) {
          w.push_back(g.below(5) == 0 ? g.bit() : (base.value(w.child(0)) >= base.value(w.child(1)) ? 0 : 1));
        }
        auto states = saving_transform(base).chain(w);
        Capital prev;
        for (std::size_t i = 0; i < states.size(); ++i) {
          p.check(states[i].bank >= prev && states[i].active < Capital(2) * base.initial_capital(), [&] {
            return id + " on '" + w.prefix(i).to_string() + "' bank " + states[i].bank.to_string() + " active " +
                   states[i].active.to_string();
          });
          prev = states[i].bank;
        }
      }
    }
    out.push_back(p.done());
  }
  {
    Prop p("saving", "monotonize keeps every banked amount (20 permutation strategies, 64 bits)");
    std::size_t nontrivial = 0;
    for (int r = 0; r < 20; ++r) {
      Strategy b{random_base(g), random_permutation(g, 10)};
      guarded(p, b.describe(), [&] {
        Word a = favoured_source(b, g, n);
        auto saving = saving_transform(b.d);
        Strategy sb{saving.martingale(), b.rule};
        auto mono = monotonize(b);
        std::vector<Capital> bank(n + 1), value(n + 1);
        for (std::size_t m = 0; m <= n; ++m) {
          auto run = run_on_word(sb, a.prefix(m), kUnlimitedBudget);
          bank[m] = saving.chain(run.trace.history).back().bank;
          value[m] = mono.value(a.prefix(m));
        }
        nontrivial += bank[n].sign() > 0;
        for (std::size_t k = 0; k <= n; ++k) {
          for (std::size_t m = k; m <= n; ++m) {
            p.check(value[m] >= bank[k], [&] {
              return b.describe() + " A='" + a.to_string() + "': bank " + bank[k].to_string() + " at move " +
                     std::to_string(k) + " but monotonize(A|" + std::to_string(m) + ") = " + value[m].to_string();
            });
          }
        }
      });
    }
    p.note(std::to_string(nontrivial) + "/20 runs banked capital");
    out.push_back(p.done());
  }
  return out;
}

std::vector<PropertyReport> totalize_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  Rng g(o.seed + 3);
  Prop p("totalize", "resolved races give a total martingale agreeing on active words");
  Prop q("totalize", "hypothesis-violating instances time out");
  int resolved = 0, timeouts = 0;
  for (int r = 0; r < 400 && (resolved < 20 || timeouts < 5); ++r) {
    Word root = g.word(g.between(0, 3));
    auto d = undefined_after(root, random_base(g));
    std::vector<std::vector<Word>> stages(g.between(1, 6));
    for (auto& s : stages) {
      for (std::uint64_t i = g.below(3); i > 0; --i) s.push_back(g.word(g.between(1, 5)));
    }
    if (g.below(4) != 0) {
      stages[g.below(stages.size())].push_back(root.child(0));
      stages.back().push_back(root.child(1));
    }
    auto cls = make_staged(stages);
    std::string label = d.describe() + " vs " + cls->describe();
    bool covered = cls->covers(cylinder_constraint(root), 1u << 20);
    if (!covered) {
      if (timeouts >= 5) continue;
      ++timeouts;
      try {
        auto t = totalize_martingale(d, cls, 10, kUnlimitedBudget);
        q.fail(label + ": returned a value instead of RaceTimeout");
      } catch (const RaceTimeout&) {
        q.check(true, {});
      }
      continue;
    }
    if (resolved >= 20) continue;
    ++resolved;
    guarded(p, label, [&] {
      auto t = totalize_martingale(d, cls, 10, kUnlimitedBudget);
      auto report = check_fairness(t.martingale, 10, kUnlimitedBudget);
      p.check(report.fair() && report.exhausted.empty(), [&] { return label + ": not total and fair " + fairness_issue(report); });
      auto all = *cls->cylinders_by(1u << 20);
      for_each_word(10, [&](const Word& w) {
        bool avoids = std::none_of(all.begin(), all.end(), [&](const Word& c) { return c.is_prefix_of(w); });
        if (avoids || !t.marking.is_inactive(w)) {
          p.check(t.martingale.value(w) == d.value(w), [&] { return label + ": differs at active '" + w.to_string() + "'"; });
        }
        for (const auto& f : t.marking.frozen_at) {
          if (f.is_prefix_of(w)) {
            p.check(t.martingale.value(w) == t.martingale.value(f),
                    [&] { return label + ": not constant below '" + f.to_string() + "' at '" + w.to_string() + "'"; });
          }
        }
      });
    });
  }
  if (resolved < 20) p.fail("only " + std::to_string(resolved) + " resolved instances generated");
  p.note(std::to_string(resolved) + " instances");
  q.note(std::to_string(timeouts) + " instances");
  out.push_back(p.done());
  out.push_back(q.done());
  return out;
}

// Golden advice sizes of 512-bit constructions; a change here is a format change.
struct GoldenConstruction {
  Variant variant;
  std::vector<unsigned> roster;
  std::size_t advice_bits;
};

const std::vector<GoldenConstruction>& golden_constructions() {
  static const std::vector<GoldenConstruction> g = {
      {Variant::Tmr, {1, 3, 6, 32}, 64},
      {Variant::Pmr, {32, 33, 3, 35}, 75},
      {Variant::Tir, {16, 18, 2, 21}, 83},
      {Variant::Ppr, {48, 53, 33, 54}, 65},
  };
  return g;
}

std::string roster_text(const std::vector<unsigned>& roster) {
  std::string s;
  for (std::size_t i = 0; i < roster.size(); ++i) s += (i ? "," : "") + std::to_string(roster[i]);
  return "{" + s + "}";
}

std::vector<PropertyReport> diagonal_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  Rng g(o.seed + 4);
  const std::vector<std::uint64_t> schedule{0, 8, 32, 128, 512};
  {
    Prop p("diagonal", "D(u) < 2 on every prefix and alpha_i d_i < 2 (rosters of size 1..5)");
    std::vector<unsigned> pool;
    for (const auto& e : roster_catalog()) {
      if (e.kind == EntryKind::TotalMartingale || e.kind == EntryKind::PartialMartingale) pool.push_back(e.id);
    }
    for (std::size_t size = 1; size <= 5; ++size) {
      for (Variant v : {Variant::Tmr, Variant::Pmr}) {
        for (int rep = 0; rep < 2; ++rep) {
          std::vector<unsigned> roster;
          for (std::size_t i = 0; i < size; ++i) roster.push_back(pool[g.below(pool.size())]);
          std::string label = to_string(v) + " " + roster_text(roster);
          guarded(p, label, [&] {
            ConstructionOptions opt;
            opt.variant = v;
            opt.schedule = schedule;
            auto r = run_construction(roster, opt);
            p.check(r.prefix.size() == 512, [&] { return label + ": short prefix"; });
            for (std::size_t L = 0; L <= r.prefix.size(); ++L) {
              Capital D(0);
              for (const auto& t : r.terms) {
                if (L < t.inserted_at || (t.removed_at && L > *t.removed_at)) continue;
                std::size_t i = L - t.inserted_at;
                if (i >= t.values.size()) continue;
                p.check(t.alpha * t.values[i] < Capital(2), [&] {
                  return label + ": entry " + std::to_string(t.id) + " has capital " + t.values[i].to_string() +
                         " > 2/alpha at length " + std::to_string(L);
                });
                D += t.alpha * t.values[i];
              }
              p.check(D < Capital(2) && r.adversary[L] == D, [&] {
                return label + ": D = " + D.to_string() + " at length " + std::to_string(L);
              });
            }
          });
        }
      }
    }
    out.push_back(p.done());
  }
  {
    Prop p("diagonal", "certificates replay 512-bit prefixes and meet the size bound");
    std::string sizes;
    for (const auto& gc : golden_constructions()) {
      std::string label = to_string(gc.variant) + " " + roster_text(gc.roster);
      guarded(p, label, [&] {
        ConstructionOptions opt;
        opt.variant = gc.variant;
        opt.schedule = schedule;
        auto r = run_construction(gc.roster, opt);
        auto bytes = serialize_certificate(r.certificate);
        auto back = parse_certificate(bytes);
        p.check(back == r.certificate, [&] { return label + ": serialization round trip"; });
        Word again = replay_certificate(back, 512);
        p.check(again == r.prefix, [&] { return label + ": replay differs"; });
        std::size_t bits = encode_advice(r.certificate).size();
        p.check(bits <= certificate_size_bound(r.certificate), [&] {
          return label + ": " + std::to_string(bits) + " bits > bound " +
                 std::to_string(certificate_size_bound(r.certificate));
        });
        p.check(bits == gc.advice_bits, [&] {
          return label + ": " + std::to_string(bits) + " bits, golden " + std::to_string(gc.advice_bits);
        });
        sizes += (sizes.empty() ? "" : " ") + to_string(gc.variant) + "=" + std::to_string(bits);
      });
    }
    p.note("advice bits " + sizes);
    out.push_back(p.done());
  }
  {
    Prop p("diagonal", "the doubler on 0 is beaten by 1^n");
    ConstructionOptions opt;
    opt.schedule = schedule;
    auto r = run_construction({1}, opt);
    p.check(r.prefix == Word::repeat(1, 512), [&] { return "prefix " + r.prefix.prefix(16).to_string() + "..."; });
    for (std::size_t i = 1; i < r.terms.at(0).values.size(); ++i) {
      p.check(r.terms[0].values[i].is_zero(),
              [&] { return "doubler capital " + r.terms[0].values[i].to_string() + " at move " + std::to_string(i); });
    }
    out.push_back(p.done());
  }
  return out;
}

std::vector<PropertyReport> splitting_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  Rng g(o.seed + 5);
  {
    Prop p("splitting", "plans partition the intervals and total stake is below 2");
    for (int rep = 0; rep < 100; ++rep) {
      std::vector<std::uint64_t> cp{0, g.between(4, 300)};
      for (std::uint64_t i = g.below(6); i > 0; --i) cp.push_back(2 * cp.back() + g.below(300));
      auto plan = build_plan(validate_checkpoints(cp));
      Capital total;
      for (const auto& iv : plan.intervals) {
        Position at = iv.begin;
        for (const auto& j : iv.subs) {
          p.check(j.begin == at && j.length() >= 1, [&] { return "gap at " + std::to_string(at); });
          at = j.end;
        }
        p.check(at == iv.end && iv.subs.size() == iv.s, [&] { return "interval ending at " + std::to_string(iv.end); });
        total += iv.stake * Capital(static_cast<long>(iv.s));
      }
      p.check(total < Capital(2), [&] { return "total stake " + total.to_string(); });
    }
    out.push_back(p.done());
  }
  auto plan = build_plan(validate_checkpoints({0, 256, 512, 1024, 2048}));
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, StepBudget{std::uint64_t{1} << 26});
  {
    Prop p("splitting", "all zeros gains at least 1 on 3 or more intervals of [0,256,512,1024,2048]");
    p.check(!s.truncated, [] { return std::string("enumeration truncated"); });
    auto inj = check_injectivity(s.strategy.rule, plan.horizon());
    p.check(inj.ok(), [] { return std::string("scan rule repeats a position"); });
    Capital risk = capital_at_risk(s);
    p.check(risk < Capital(2), [&] { return "capital at risk " + risk.to_string(); });
    auto trace = run_on_sequence(s.strategy, parse_source("all-zeros"), s.order.size(), kUnlimitedBudget);
    auto rows = gain_table(plan, s, trace);
    std::size_t wins = 0;
    for (const auto& r : rows) wins += r.gain >= Capital(1);
    p.check(wins >= 3, [&] { return std::to_string(wins) + " intervals gained 1"; });
    p.note(std::to_string(wins) + " winning intervals, at risk " + risk.to_string());
    out.push_back(p.done());
  }
  {
    Prop p("splitting", "capital stays positive and the scan order ignores the source");
    std::vector<Position> first;
    for (int rep = 0; rep < 20; ++rep) {
      std::string src = rep == 0 ? "alternating" : "random:" + std::to_string(g.below(1000000));
      auto trace = run_on_sequence(s.strategy, parse_source(src), s.order.size(), kUnlimitedBudget);
      for (std::size_t i = 0; i < trace.capitals.size(); ++i) {
        p.check(trace.capitals[i].sign() > 0, [&] { return src + ": capital 0 at move " + std::to_string(i); });
      }
      if (rep == 0) first = trace.positions;
      p.check(trace.positions == first, [&] { return src + ": scan order differs"; });
    }
    out.push_back(p.done());
  }
  return out;
}

std::vector<PropertyReport> counting_suite(const VerifyOptions& o) {
  std::vector<PropertyReport> out;
  DescriptionSystem ds;
  {
    Prop p("counting", "enumerate_low emits fewer than 2^(t+1) distinct words");
    std::size_t worst_t = 0, worst = 0;
    for (std::uint64_t t = 0; t <= o.counting_threshold; ++t) {
      for (std::size_t len = 0; len <= 32; ++len) {
        auto s = enumerate_low(ds, len, len, t, kUnlimitedBudget);
        std::set<Word> distinct(s.words.begin(), s.words.end());
        p.check(!s.truncated && distinct.size() == s.words.size() && s.words.size() < (std::size_t{1} << (t + 1)),
                [&] {
                  return "t=" + std::to_string(t) + " length " + std::to_string(len) + ": " +
                         std::to_string(s.words.size()) + " words";
                });
        if (t == o.counting_threshold && s.words.size() >= worst) {
          worst = s.words.size();
          worst_t = len;
        }
      }
    }
    p.note("t=" + std::to_string(o.counting_threshold) + ": at most " + std::to_string(worst) + " < " +
           std::to_string(std::size_t{1} << (o.counting_threshold + 1)) + " words (length " + std::to_string(worst_t) +
           ")");
    out.push_back(p.done());
  }
  {
    Prop p("counting", "well-formed programs up to 16 bits are prefix-free");
    std::set<Word> valid;
    for_each_program(16, [&](const Word& w) {
      if (parse_program(w)) valid.insert(w);
      return true;
    });
    for (const auto& w : valid) {
      for (std::size_t n = 0; n < w.size(); ++n) {
        p.check(!valid.contains(w.prefix(n)),
                [&] { return "'" + w.prefix(n).to_string() + "' is a prefix of '" + w.to_string() + "'"; });
      }
    }
    p.note(std::to_string(valid.size()) + " programs");
    out.push_back(p.done());
  }
  return out;
}

using SuiteFn = std::vector<PropertyReport> (*)(const VerifyOptions&);

const std::map<std::string, SuiteFn>& suites() {
  static const std::map<std::string, SuiteFn> m = {
      {"fairness", fairness_suite},   {"averaging", averaging_suite}, {"saving", saving_suite},
      {"totalize", totalize_suite},   {"diagonal", diagonal_suite},   {"splitting", splitting_suite},
      {"counting", counting_suite},
  };
  return m;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"fairness", "averaging", "saving",  "totalize",
                                                 "diagonal", "splitting", "counting"};
  return names;
}

std::vector<PropertyReport> run_suite(const std::string& name, const VerifyOptions& options) {
  if (name == "all") {
    std::vector<PropertyReport> out;
    for (const auto& n : suite_names()) {
      auto r = suites().at(n)(options);
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }
  auto it = suites().find(name);
  if (it == suites().end()) throw UnknownSuite(name);
  return it->second(options);
}

void write_report(std::ostream& out, const std::vector<PropertyReport>& reports) {
  for (const auto& r : reports) {
    out << (r.passed ? "PASS " : "FAIL ") << r.suite << ": " << r.name << " [" << r.cases << " cases";
    if (!r.note.empty()) out << "; " << r.note;
    out << "]";
    if (!r.passed) out << "\n  first counterexample: " << r.counterexample;
    out << "\n";
  }
}

}  // namespace mlab
