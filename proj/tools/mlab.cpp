// Batch front end: runs, constructions, certificates, splitting, complexity
// and the invariant suites.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mlab/diagonalize.hpp"
#include "mlab/splitting.hpp"
#include "mlab/verify.hpp"

using namespace mlab;
namespace fs = std::filesystem;

namespace {

constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

/// Bad input: exit 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes through a temporary file so readers never see half a file.
void write_file(const fs::path& path, const std::string& data) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << data;
    out.flush();
    if (!out) throw Error("cannot write " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot write " + path.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// run

struct RunSpec {
  std::string name;
  Strategy strategy;
};

ScanRule rule_from_json(const nlohmann::json& r) {
  if (r.is_string()) {
    if (r.get<std::string>() != "monotonic") throw ConfigError("rule string must be \"monotonic\"");
    return ScanRule::monotonic();
  }
  if (!r.is_object() || r.size() != 1 || !r.begin().value().is_string()) {
    throw ConfigError("rule must be \"monotonic\" or {\"permutation\"|\"injection\"|\"adaptive\": id}");
  }
  const std::string kind = r.begin().key();
  ScanRule rule = parse_scan_rule(r.begin().value().get<std::string>());
  ScanRule::Kind want;
  if (kind == "permutation") want = ScanRule::Kind::Permutation;
  else if (kind == "injection") want = ScanRule::Kind::Injection;
  else if (kind == "adaptive") want = ScanRule::Kind::Adaptive;
  else throw ConfigError("unknown rule kind '" + kind + "'");
  if (rule.kind() != want) throw ConfigError("rule '" + rule.id() + "' is not a " + kind + " rule");
  return rule;
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return s;
}

struct RunConfig {
  std::vector<RunSpec> strategies;
  std::vector<std::string> sources;
  std::size_t moves = 0;
  StepBudget budget;
  std::string output_dir;
};

RunConfig parse_run_config(const std::string& text, StepBudget budget) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.budget = budget;
  try {
    if (!j.contains("strategies") || !j["strategies"].is_array() || j["strategies"].empty()) {
      throw ConfigError("config needs a non-empty \"strategies\" list");
    }
    std::size_t index = 0;
    for (const auto& s : j["strategies"]) {
      if (!s.is_object() || !s.contains("martingale") || !s["martingale"].is_string()) {
        throw ConfigError("strategy " + std::to_string(index) + " needs a \"martingale\" id");
      }
      RunSpec r{s.value("name", "s" + std::to_string(index)),
                Strategy{parse_martingale(s["martingale"].get<std::string>()),
                         s.contains("rule") ? rule_from_json(s["rule"]) : ScanRule::monotonic()}};
      c.strategies.push_back(std::move(r));
      ++index;
    }
    if (!j.contains("sources") || !j["sources"].is_array() || j["sources"].empty()) {
      throw ConfigError("config needs a non-empty \"sources\" list");
    }
    for (const auto& s : j["sources"]) {
      parse_source(s.get<std::string>());
      c.sources.push_back(s.get<std::string>());
    }
    if (!j.contains("moves") || !j["moves"].is_number_unsigned()) throw ConfigError("config needs \"moves\"");
    c.moves = j["moves"].get<std::size_t>();
    if (j.contains("budget")) c.budget = StepBudget{j["budget"].get<std::uint64_t>()};
    c.output_dir = j.value("output_dir", std::string("."));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  } catch (const UnsupportedRule& e) {
    throw ConfigError(e.what());
  }
  return c;
}

int cmd_run(const std::string& config_path, const std::string& out_dir, StepBudget budget) {
  RunConfig c = parse_run_config(read_file(config_path), budget);
  if (!out_dir.empty()) c.output_dir = out_dir;
  fs::path dir(c.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  for (const auto& s : c.strategies) {
    for (const auto& src : c.sources) {
      auto trace = run_on_sequence(s.strategy, parse_source(src), c.moves, c.budget);
      std::ostringstream csv;
      write_trace_csv(csv, trace);
      fs::path file = dir / (file_safe(s.name) + "__" + file_safe(src) + ".csv");
      write_file(file, csv.str());
      std::cout << file.string() << " " << trace.capitals.back().to_string() << " " << to_string(trace.halt) << "\n";
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------
// diagonalize / replay

std::vector<std::uint64_t> parse_list(const std::string& text) {
  try {
    return parse_natural_list(text);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int cmd_diagonalize(const std::string& roster_path, const std::string& schedule, const std::string& variant,
                    const std::string& out, int budget_log2, int set_id, int probe_depth) {
  ConstructionOptions o;
  std::vector<unsigned> roster;
  try {
    roster = parse_roster_json(read_file(roster_path));
    o.variant = parse_variant(variant);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  o.schedule = parse_list(schedule);
  if (o.schedule.empty() || o.schedule.front() != 0) throw ConfigError("schedule must start at 0");
  o.budget_log2 = static_cast<std::uint8_t>(budget_log2);
  o.set_id = static_cast<std::uint8_t>(set_id);
  o.probe_depth = static_cast<std::uint8_t>(probe_depth);
  auto r = run_construction(roster, o);
  auto bytes = serialize_certificate(r.certificate);
  if (!out.empty()) write_file(out, std::string(bytes.begin(), bytes.end()));
  std::cout << "prefix " << r.prefix.to_string() << "\n";
  std::cout << "advice_bits " << encode_advice(r.certificate).size() << "\n";
  std::cout << "size_bound " << certificate_size_bound(r.certificate) << "\n";
  for (std::size_t i = 0; i < r.certificate.entries.size(); ++i) {
    const auto& e = r.certificate.entries[i];
    std::cout << "entry " << i << " id " << unsigned(e.id) << " " << to_string(e.status);
    if (e.status == EntryStatus::Divergent) std::cout << " stage " << e.stage;
    if (e.status == EntryStatus::Adopted) std::cout << " suffix " << e.suffix.to_string();
    std::cout << "\n";
  }
  std::cout << "final_adversary " << r.adversary.back().to_string() << "\n";
  return 0;
}

int cmd_replay(const std::string& path, std::uint64_t length) {
  std::string data = read_file(path);
  Certificate c;
  try {
    c = parse_certificate(std::vector<std::uint8_t>(data.begin(), data.end()));
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  std::cout << replay_certificate(c, length).to_string() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// splitting

int cmd_splitting(const std::string& checkpoints, const std::string& source, std::size_t max_moves,
                  const std::string& trajectory_out, const std::string& gains_out, StepBudget budget) {
  SplittingPlan plan;
  try {
    plan = build_plan(validate_checkpoints(parse_list(checkpoints)));
    parse_source(source);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  DescriptionSystem ds;
  auto s = build_splitting_strategy(plan, ds, budget);
  if (s.truncated) std::cerr << "warning: enumeration budget exhausted, fewer games opened\n";
  std::size_t moves = max_moves == 0 ? s.order.size() : max_moves;
  auto trace = run_on_sequence(s.strategy, parse_source(source), moves, kUnlimitedBudget);
  std::ostringstream traj, gains;
  write_trace_csv(traj, trace);
  gains << "interval,checkpoint,games,gain_num,gain_den,expected_num,expected_den\n";
  for (const auto& r : gain_table(plan, s, trace)) {
    gains << r.k << ',' << r.checkpoint << ',' << r.games << ',' << r.gain.numerator() << ','
          << r.gain.denominator() << ',' << r.expected.numerator() << ',' << r.expected.denominator() << '\n';
  }
  if (trajectory_out.empty()) std::cout << traj.str() << "\n";
  else write_file(trajectory_out, traj.str());
  if (gains_out.empty()) std::cout << gains.str();
  else write_file(gains_out, gains.str());
  return 0;
}

// ---------------------------------------------------------------------------
// complexity / enumerate-low

Word parse_word_arg(const std::string& text) {
  try {
    return Word::parse(text);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int cmd_complexity(const std::string& word, std::optional<std::uint64_t> condition, StepBudget budget) {
  Word w = parse_word_arg(word);
  auto b = complexity_upper(full_description_system(), w, condition.value_or(w.size()), budget);
  if (!b) throw Error("budget exhausted before any program was verified");
  std::cout << "bound " << b->bound << "\n";
  std::cout << "witness " << to_hex(b->witness) << "\n";
  std::cout << "witness_bits " << b->witness.to_string() << "\n";
  return 0;
}

int cmd_enumerate(std::size_t length, std::uint64_t threshold, std::optional<std::uint64_t> condition,
                  StepBudget budget) {
  auto s = enumerate_low(full_description_system(), length, condition.value_or(length), threshold, budget);
  for (const auto& w : s.words) std::cout << w.to_string() << "\n";
  std::cerr << s.words.size() << " words" << (s.truncated ? " (budget exhausted)" : "") << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// verify

int cmd_verify(const std::string& suite, std::uint64_t seed, std::uint64_t threshold) {
  VerifyOptions o;
  o.seed = seed;
  o.counting_threshold = threshold;
  std::vector<PropertyReport> reports;
  try {
    reports = run_suite(suite, o);
  } catch (const UnknownSuite& e) {
    throw ConfigError(std::string(e.what()) + "; expected one of fairness, averaging, saving, totalize, diagonal, "
                      "splitting, counting, all");
  }
  write_report(std::cout, reports);
  bool ok = std::all_of(reports.begin(), reports.end(), [](const PropertyReport& r) { return r.passed; });
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"martingale lab: betting strategies, diagonal constructions and certificates"};
  app.require_subcommand(1);
  std::uint64_t budget_steps = 0;
  app.add_option("--budget", budget_steps, "step budget (default: MLAB_BUDGET or 1000000)");

  std::string config, out_dir;
  auto* run = app.add_subcommand("run", "run strategies against sources, one CSV per pair");
  run->add_option("config", config, "JSON run config")->required();
  run->add_option("--out-dir", out_dir, "overrides output_dir of the config");

  std::string roster, schedule = "0,8,32,128,512", variant = "tmr", cert_out;
  int budget_log2 = 20, set_id = 0, probe_depth = 8;
  auto* diag = app.add_subcommand("diagonalize", "build a prefix diagonal against a roster");
  diag->add_option("--roster", roster, "roster JSON {\"roster\": [ids]}")->required();
  diag->add_option("--schedule", schedule, "stage boundaries, e.g. 0,8,32,128");
  diag->add_option("--variant", variant, "tmr | tir | pmr | ppr");
  diag->add_option("--out", cert_out, "certificate file");
  diag->add_option("--budget-log2", budget_log2, "per-term step budget is 2^this")->check(CLI::Range(0, 62));
  diag->add_option("--stage-set", set_id, "stage set id")->check(CLI::Range(0, 3));
  diag->add_option("--probe-depth", probe_depth, "ppr divergence probe depth")->check(CLI::Range(0, 15));

  std::string cert_in;
  std::uint64_t replay_len = 0;
  auto* replay = app.add_subcommand("replay", "replay a certificate");
  replay->add_option("certificate", cert_in)->required();
  replay->add_option("--length", replay_len)->required();

  std::string checkpoints, source = "all-zeros", traj_out, gains_out;
  std::size_t max_moves = 0;
  auto* split = app.add_subcommand("splitting", "interval-splitting strategy: trajectory and gain table");
  split->add_option("--checkpoints", checkpoints, "e.g. 0,256,512,1024")->required();
  split->add_option("--source", source, "sequence source id");
  split->add_option("--max-moves", max_moves, "moves to play (default: every queued position)");
  split->add_option("--trajectory", traj_out, "write the trajectory CSV here instead of stdout");
  split->add_option("--gains", gains_out, "write the gain table CSV here instead of stdout");

  std::string word;
  std::optional<std::uint64_t> condition;
  auto* cx = app.add_subcommand("complexity", "upper bound on C(w | n) with a witness program");
  cx->add_option("word", word, "bit string")->required();
  cx->add_option("--condition", condition, "condition n (default |w|)");

  std::size_t length = 0;
  std::uint64_t threshold = 0;
  std::optional<std::uint64_t> en_condition;
  auto* en = app.add_subcommand("enumerate-low", "words of a length with a program of at most T bits");
  en->add_option("--length", length)->required();
  en->add_option("--threshold", threshold)->required()->check(CLI::Range(0, 24));
  en->add_option("--condition", en_condition, "condition (default: the length)");

  std::string suite;
  std::uint64_t seed = 1, counting_t = 12;
  auto* ver = app.add_subcommand("verify", "run an invariant suite");
  ver->add_option("suite", suite, "fairness, averaging, saving, totalize, diagonal, splitting, counting, all")
      ->required();
  ver->add_option("--seed", seed);
  ver->add_option("--threshold", counting_t, "largest threshold of the counting suite")->check(CLI::Range(0, 16));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    StepBudget budget = budget_steps ? StepBudget{budget_steps} : default_budget();
    if (*run) return cmd_run(config, out_dir, budget);
    if (*diag) return cmd_diagonalize(roster, schedule, variant, cert_out, budget_log2, set_id, probe_depth);
    if (*replay) return cmd_replay(cert_in, replay_len);
    if (*split) return cmd_splitting(checkpoints, source, max_moves, traj_out, gains_out, budget);
    if (*cx) return cmd_complexity(word, condition, budget);
    if (*en) return cmd_enumerate(length, threshold, en_condition, budget);
    if (*ver) return cmd_verify(suite, seed, counting_t);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ParseError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kConfigError;
}
