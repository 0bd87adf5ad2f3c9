// One PASS/FAIL line per acceptance criterion. Exit 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>

#include "mlab/verify.hpp"

using namespace mlab;

namespace {

struct SuiteRun {
  std::vector<PropertyReport> props;
  double seconds = 0;
};

SuiteRun timed(const std::string& suite) {
  auto t0 = std::chrono::steady_clock::now();
  SuiteRun r;
  r.props = run_suite(suite);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Properties [from, to) of a suite must pass, within `limit` seconds when given.
struct Criterion {
  int number;
  std::string title;
  std::string suite;
  std::size_t from, to;
  double limit;
};

}  // namespace

int main() {
  // Tolerances are pinned here: exact rational comparisons everywhere, wall-clock limits in seconds.
  const std::vector<Criterion> criteria = {
      {1, "fairness of catalog and transform outputs to depth 10", "fairness", 0, 3, 30.0},
      {2, "averaging is independent of the horizon (50 cases, M vs M+3)", "averaging", 0, 1, 0},
      {3, "monotonize keeps saved capital (20 strategies, 64 bits)", "saving", 1, 2, 0},
      {4, "diagonal bound D < 2 and alpha d < 2, rosters 1..5", "diagonal", 0, 1, 60.0},
      {5, "certificate replay of 512-bit prefixes and size bound", "diagonal", 1, 2, 0},
      {6, "totalization: total, agreeing, constant when frozen; timeouts", "totalize", 0, 2, 0},
      {7, "counting bound t <= 12, lengths <= 32; prefix-free to 16 bits", "counting", 0, 2, 0},
      {8, "splitting gains >= 1 on >= 3 intervals, injective, risk < 2", "splitting", 1, 2, 60.0},
      {9, "greedy defeat of the doubler on 0 by 1^n", "diagonal", 2, 3, 0},
  };
  std::map<std::string, SuiteRun> runs;
  bool all = true;
  for (const auto& c : criteria) {
    if (!runs.count(c.suite)) {
      try {
        runs[c.suite] = timed(c.suite);
      } catch (const std::exception& e) {
        PropertyReport r;
        r.passed = false;
        r.name = c.suite;
        r.counterexample = std::string("suite threw: ") + e.what();
        runs[c.suite].props = {r};
      }
    }
    const auto& run = runs[c.suite];
    bool ok = true;
    std::string why;
    double secs = 0;
    for (std::size_t i = c.from; i < c.to; ++i) {
      if (i >= run.props.size()) {
        ok = false;
        why = run.props.empty() ? "no properties ran" : run.props.front().counterexample;
        break;
      }
      secs += run.props[i].seconds;
      if (!run.props[i].passed && ok) {
        ok = false;
        why = run.props[i].name + ": " + run.props[i].counterexample;
      }
    }
    // criterion 8 counts plan and strategy construction too
    if (c.number == 1 || c.number == 8) secs = run.seconds;
    if (c.limit > 0 && secs >= c.limit) {
      ok = false;
      why = "took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit) + " s";
    }
    all = all && ok;
    std::printf("%s %d %s (%.2f s)\n", ok ? "PASS" : "FAIL", c.number, c.title.c_str(), secs);
    if (!ok) std::printf("     %s\n", why.c_str());
    for (std::size_t i = c.from; i < c.to && i < run.props.size(); ++i) {
      if (!run.props[i].note.empty()) std::printf("     %s\n", run.props[i].note.c_str());
    }
  }
  return all ? 0 : 1;
}
