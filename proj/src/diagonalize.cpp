#include "mlab/diagonalize.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <unordered_map>

#include "json.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// Catalog

std::string to_string(EntryKind k) {
  switch (k) {
    case EntryKind::TotalMartingale: return "total_martingale";
    case EntryKind::PartialMartingale: return "partial_martingale";
    case EntryKind::TotalInjectiveStrategy: return "total_injective_strategy";
    case EntryKind::PartialPermutationStrategy: return "partial_permutation_strategy";
  }
  return "?";
}

const std::vector<CatalogEntry>& roster_catalog() {
  using K = EntryKind;
  static const std::vector<CatalogEntry> catalog = {
      {0, K::TotalMartingale, "const:1"},
      {1, K::TotalMartingale, "double_on:0"},
      {2, K::TotalMartingale, "double_on:1"},
      {3, K::TotalMartingale, "pattern:01"},
      {4, K::TotalMartingale, "pattern:0"},
      {5, K::TotalMartingale, "pattern:1"},
      {6, K::TotalMartingale, "majority"},
      {7, K::TotalMartingale, "pattern:10"},
      {8, K::TotalMartingale, "pattern:001"},
      {9, K::TotalMartingale, "pattern:110"},
      {16, K::TotalInjectiveStrategy, "double_on:0+scale:2"},
      {17, K::TotalInjectiveStrategy, "pattern:0+scale:3"},
      {18, K::TotalInjectiveStrategy, "pattern:1+pair_swap"},
      {19, K::TotalInjectiveStrategy, "pattern:01+explicit:1,5"},
      {20, K::TotalInjectiveStrategy, "majority+affine:2:1"},
      {21, K::TotalInjectiveStrategy, "double_on:1+reverse_blocks:3"},
      {22, K::TotalInjectiveStrategy, "pattern:10+scale:2"},
      {32, K::PartialMartingale, "partial:3:double_on:0"},
      {33, K::PartialMartingale, "undefined_after:1:pattern:0"},
      {34, K::PartialMartingale, "partial:6:pattern:01"},
      {35, K::PartialMartingale, "undefined_after:00:majority"},
      {36, K::PartialMartingale, "partial:10:double_on:1"},
      {48, K::PartialPermutationStrategy, "pattern:0+pair_swap"},
      {49, K::PartialPermutationStrategy, "undefined_after:1:pattern:0+pair_swap"},
      {50, K::PartialPermutationStrategy, "pattern:1+map:0,1,0"},
      {51, K::PartialPermutationStrategy, "partial:6:pattern:01+identity"},
      {52, K::PartialPermutationStrategy, "majority+reverse_blocks:3"},
      {53, K::PartialPermutationStrategy, "undefined_after:0:double_on:1+identity"},
      {54, K::PartialPermutationStrategy, "pattern:01+map:0,2"},
  };
  return catalog;
}

const CatalogEntry& catalog_entry(unsigned id) {
  for (const auto& e : roster_catalog()) {
    if (e.id == id) return e;
  }
  throw UnknownRosterId(id);
}

Strategy entry_strategy(const CatalogEntry& e) {
  if (e.spec.find('+') == std::string::npos) return Strategy{parse_martingale(e.spec), ScanRule::monotonic()};
  return parse_strategy(e.spec);
}

namespace {

bool is_martingale_kind(EntryKind k) { return k == EntryKind::TotalMartingale || k == EntryKind::PartialMartingale; }

void check_kind(Variant v, const CatalogEntry& e) {
  if ((v == Variant::Tmr || v == Variant::Pmr) && !is_martingale_kind(e.kind)) {
    throw Error("roster id " + std::to_string(e.id) + " is a strategy; " + to_string(v) + " takes martingales");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Schedules and stage sets

std::vector<std::uint64_t> catalog_schedule(std::uint8_t id, std::uint64_t limit) {
  std::vector<std::uint64_t> out{0};
  for (std::uint64_t k = 1; k <= 30; ++k) {
    std::uint64_t v = 0;
    switch (id) {
      case 0: v = std::uint64_t{2} << (2 * k); break;
      case 1: v = std::uint64_t{1} << (k + 1); break;
      case 2: v = 8 * k; break;
      case 3: v = std::uint64_t{1} << (2 * k + 2); break;
      default: throw Error("unknown schedule id " + std::to_string(id));
    }
    if (v > limit) break;
    out.push_back(v);
  }
  return out;
}

std::uint8_t match_schedule(const std::vector<std::uint64_t>& schedule) {
  if (schedule.empty()) return kInlineSchedule;
  for (std::uint8_t id = 0; id < 4; ++id) {
    if (catalog_schedule(id, schedule.back()) == schedule) return id;
  }
  return kInlineSchedule;
}

std::vector<std::uint64_t> schedule_from_order(const std::vector<std::uint64_t>& h) {
  std::vector<std::uint64_t> f{0};
  std::size_t n = 0;
  for (std::uint64_t k = 1;; ++k) {
    // least n with h(n) >= k + 1, scanning forward (h need not be monotone)
    std::size_t m = 0;
    while (m < h.size() && h[m] < k + 1) ++m;
    if (m >= h.size()) break;
    n = std::max<std::size_t>(m, f.back() + 1);
    f.push_back(n);
  }
  return f;
}

bool in_stage_set(std::uint8_t set_id, std::uint64_t n) {
  switch (set_id) {
    case 0: return true;
    case 1: return n == 0 || (n & (n - 1)) == 0;
    case 2: return n % 8 == 0;
    case 3: {
      auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
      while (r * r > n) --r;
      while ((r + 1) * (r + 1) <= n) ++r;
      return r * r == n;
    }
    default: throw Error("unknown stage set id " + std::to_string(set_id));
  }
}

std::uint64_t next_in_stage_set(std::uint8_t set_id, std::uint64_t n) {
  switch (set_id) {
    case 0: return n;
    case 1: {
      if (n == 0) return 0;
      std::uint64_t p = 1;
      while (p < n) p <<= 1;
      return p;
    }
    case 2: return (n + 7) / 8 * 8;
    case 3: {
      auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(n)));
      while (r * r > n) --r;
      while (r * r < n) ++r;
      return r * r;
    }
    default: throw Error("unknown stage set id " + std::to_string(set_id));
  }
}

// ---------------------------------------------------------------------------
// Certificates

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Tmr: return "tmr";
    case Variant::Tir: return "tir";
    case Variant::Pmr: return "pmr";
    case Variant::Ppr: return "ppr";
  }
  return "?";
}

Variant parse_variant(const std::string& s) {
  if (s == "tmr") return Variant::Tmr;
  if (s == "tir") return Variant::Tir;
  if (s == "pmr") return Variant::Pmr;
  if (s == "ppr") return Variant::Ppr;
  throw ParseError("unknown variant '" + s + "' (tmr, tir, pmr, ppr)");
}

std::string to_string(EntryStatus s) {
  switch (s) {
    case EntryStatus::Active: return "active";
    case EntryStatus::Divergent: return "divergent";
    case EntryStatus::Discarded: return "discarded";
    case EntryStatus::Adopted: return "adopted";
  }
  return "?";
}

std::vector<std::uint64_t> Certificate::schedule() const {
  if (schedule_id == kInlineSchedule) return inline_schedule;
  return catalog_schedule(schedule_id, target_length);
}

namespace {

std::size_t stage_width(std::uint64_t n) { return ceil_log2(n + 1); }

void put_bits(Word& out, std::uint64_t v, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<int>((v >> i) & 1));
}

class BitReader {
 public:
  explicit BitReader(const Word& w) : w_(w) {}

  std::uint64_t bits(std::size_t width) {
    if (pos_ + width > w_.size()) throw ParseError("certificate advice is truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 1) | static_cast<std::uint64_t>(w_[pos_++]);
    return v;
  }
  std::uint64_t natural() {
    auto v = read_natural(w_, pos_);
    if (!v) throw ParseError("certificate advice has a bad natural");
    return *v;
  }
  Word word(std::size_t len) {
    if (pos_ + len > w_.size()) throw ParseError("certificate advice is truncated");
    Word out = Word(std::vector<std::uint8_t>(w_.bits().begin() + static_cast<std::ptrdiff_t>(pos_),
                                              w_.bits().begin() + static_cast<std::ptrdiff_t>(pos_ + len)));
    pos_ += len;
    return out;
  }
  bool done() const { return pos_ == w_.size(); }

 private:
  const Word& w_;
  std::size_t pos_ = 0;
};

Word inline_schedule_bits(const std::vector<std::uint64_t>& s) {
  Word out;
  append_natural(out, s.size());
  for (std::size_t i = 1; i < s.size(); ++i) append_natural(out, s[i] - s[i - 1]);
  return out;
}

}  // namespace

Word encode_advice(const Certificate& c) {
  Word out;
  std::size_t W = stage_width(c.target_length);
  put_bits(out, static_cast<std::uint64_t>(c.variant), 2);
  put_bits(out, c.schedule_id, 4);
  if (c.schedule_id == kInlineSchedule) out = out.concat(inline_schedule_bits(c.inline_schedule));
  put_bits(out, c.budget_log2, 6);
  put_bits(out, c.set_id, 3);
  put_bits(out, c.probe_depth, 4);
  append_natural(out, c.entries.size());
  for (const auto& e : c.entries) {
    put_bits(out, e.id, 8);
    put_bits(out, static_cast<std::uint64_t>(e.status), 2);
    if (e.status == EntryStatus::Divergent) {
      put_bits(out, static_cast<std::uint64_t>(e.cause), 1);
      put_bits(out, e.stage, W);
    } else if (e.status == EntryStatus::Adopted) {
      append_natural(out, e.suffix.size());
      out = out.concat(e.suffix);
    }
  }
  if (c.variant == Variant::Tir) {
    out.push_back(c.last_pair ? 1 : 0);
    if (c.last_pair) {
      put_bits(out, c.last_pair->first, 8);
      put_bits(out, c.last_pair->second, W);
    }
  }
  return out;
}

Certificate decode_advice(const Word& advice, std::uint64_t target_length) {
  Certificate c;
  c.target_length = target_length;
  std::size_t W = stage_width(target_length);
  BitReader in(advice);
  c.variant = static_cast<Variant>(in.bits(2));
  c.schedule_id = static_cast<std::uint8_t>(in.bits(4));
  if (c.schedule_id == kInlineSchedule) {
    std::uint64_t count = in.natural();
    if (count == 0 || count > target_length + 1) throw ParseError("bad inline schedule length");
    c.inline_schedule.push_back(0);
    for (std::uint64_t i = 1; i < count; ++i) {
      std::uint64_t d = in.natural();
      if (d == 0) throw ParseError("inline schedule is not increasing");
      c.inline_schedule.push_back(c.inline_schedule.back() + d);
    }
    if (c.inline_schedule.back() != target_length) throw ParseError("inline schedule does not end at the target");
  } else if (c.schedule_id > 3) {
    throw ParseError("unknown schedule id " + std::to_string(c.schedule_id));
  }
  c.budget_log2 = static_cast<std::uint8_t>(in.bits(6));
  if (c.budget_log2 > 62) throw ParseError("budget exponent too large");
  c.set_id = static_cast<std::uint8_t>(in.bits(3));
  if (c.set_id > 3) throw ParseError("unknown stage set id");
  c.probe_depth = static_cast<std::uint8_t>(in.bits(4));
  std::uint64_t count = in.natural();
  if (count > 255) throw ParseError("too many roster entries");
  for (std::uint64_t i = 0; i < count; ++i) {
    EntryRecord e;
    e.id = static_cast<std::uint8_t>(in.bits(8));
    e.status = static_cast<EntryStatus>(in.bits(2));
    if (e.status == EntryStatus::Divergent) {
      e.cause = static_cast<DivergenceCause>(in.bits(1));
      e.stage = in.bits(W);
      if (e.stage > target_length) throw ParseError("divergence stage past the target");
    } else if (e.status == EntryStatus::Adopted) {
      std::uint64_t len = in.natural();
      if (len > 15) throw ParseError("adopted suffix longer than any probe");
      e.suffix = in.word(len);
    }
    c.entries.push_back(std::move(e));
  }
  if (c.variant == Variant::Tir && in.bits(1) == 1) {
    auto i = static_cast<std::uint8_t>(in.bits(8));
    std::uint64_t l = in.bits(W);
    c.last_pair = std::make_pair(i, l);
  }
  if (!in.done()) throw ParseError("trailing bits after certificate advice");
  return c;
}

std::uint64_t certificate_size_bound(const Certificate& c) {
  std::uint64_t records = c.last_pair ? 1 : 0;
  for (const auto& e : c.entries) records += e.status == EntryStatus::Divergent ? 1 : 0;
  std::uint64_t bound = kSizeC1 * c.entries.size() + kSizeC2 * stage_width(c.target_length) * records + kSizeC3;
  if (c.schedule_id == kInlineSchedule) bound += inline_schedule_bits(c.inline_schedule).size();
  return bound;
}

namespace {

constexpr std::uint8_t kFileVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint64_t v) {
  if (v > 0xffffffffu) throw Error("value does not fit the certificate file");
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | in[at + static_cast<std::size_t>(i)];
  return v;
}

}  // namespace

std::vector<std::uint8_t> serialize_certificate(const Certificate& c) {
  Word advice = encode_advice(c);
  std::vector<std::uint8_t> out{'M', 'L', 'C', 'T', kFileVersion, kCatalogVersion};
  put_u32(out, c.target_length);
  put_u32(out, advice.size());
  for (std::size_t i = 0; i < advice.size(); i += 8) {
    std::uint8_t byte = 0;
    for (std::size_t j = 0; j < 8; ++j) {
      byte = static_cast<std::uint8_t>(byte << 1);
      if (i + j < advice.size()) byte |= static_cast<std::uint8_t>(advice[i + j]);
    }
    out.push_back(byte);
  }
  return out;
}

Certificate parse_certificate(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 14 || bytes[0] != 'M' || bytes[1] != 'L' || bytes[2] != 'C' || bytes[3] != 'T') {
    throw ParseError("not a certificate file");
  }
  if (bytes[4] != kFileVersion) throw ParseError("unsupported certificate version " + std::to_string(bytes[4]));
  if (bytes[5] != kCatalogVersion) {
    throw ParseError("certificate was made with roster catalog version " + std::to_string(bytes[5]));
  }
  std::uint64_t target = get_u32(bytes, 6);
  std::uint64_t nbits = get_u32(bytes, 10);
  if (bytes.size() != 14 + (nbits + 7) / 8) throw ParseError("certificate file has the wrong size");
  std::vector<std::uint8_t> bits(nbits);
  for (std::uint64_t i = 0; i < nbits; ++i) bits[i] = (bytes[14 + i / 8] >> (7 - i % 8)) & 1;
  return decode_advice(Word(std::move(bits)), target);
}

// ---------------------------------------------------------------------------
// Greedy steps

int greedy_choice(const Word& w, const Capital& dw, const Capital& d0, const Capital& d1) {
  bool ok0 = d0 <= dw;
  bool ok1 = d1 <= dw;
  if (ok0 && ok1) return w.empty() ? 0 : w[w.size() - 1];
  if (ok0) return 0;
  if (ok1) return 1;
  throw FairnessViolation(w);
}

int greedy_step(const Martingale& D, const Word& w, StepBudget budget) {
  auto dw = D.eval(w, budget);
  auto d0 = D.eval(w.child(0), budget);
  auto d1 = D.eval(w.child(1), budget);
  if (!dw || !d0 || !d1) throw WordError("adversary undefined next to this word", w);
  return greedy_choice(w, *dw, *d0, *d1);
}

// ---------------------------------------------------------------------------
// DiagonalState

namespace {

// nullopt with the cause set when the evaluation fails either way.
std::optional<Capital> try_eval(const Martingale& m, const Word& w, StepBudget budget, DivergenceCause& cause) {
  try {
    auto v = m.eval(w, budget);
    if (!v) cause = DivergenceCause::Budget;
    return v;
  } catch (const Error&) {
    cause = DivergenceCause::Race;
    return std::nullopt;
  }
}

}  // namespace

bool DiagonalState::live_at(const AdversaryTerm& t, std::uint64_t len) const {
  return len >= t.inserted_at && (!t.removed_at || len < *t.removed_at);
}

Capital DiagonalState::current_value() const {
  Capital sum(0);
  for (const auto& t : terms_) {
    if (!t.removed_at) sum += t.alpha * t.values.back();
  }
  return sum;
}

std::optional<Capital> DiagonalState::evaluate(const Word& u) const {
  Capital sum(0);
  for (const auto& t : terms_) {
    if (t.removed_at) continue;
    DivergenceCause cause;
    auto v = try_eval(t.effective, u, budget_, cause);
    if (!v) return std::nullopt;
    sum += t.alpha * *v;
  }
  return sum;
}

std::vector<WeightedTerm> DiagonalState::live_terms() const {
  std::vector<WeightedTerm> out;
  for (const auto& t : terms_) {
    if (!t.removed_at) out.push_back(WeightedTerm{t.alpha, t.effective});
  }
  return out;
}

bool DiagonalState::insert(std::uint8_t id, Martingale effective, DivergenceCause* cause) {
  DivergenceCause why = DivergenceCause::Budget;
  auto v = try_eval(effective, prefix_, budget_, why);
  if (!v) {
    if (cause) *cause = why;
    return false;
  }
  Capital D = current_value();
  Capital alpha = (Capital(2) - D) / (Capital(2) * max(Capital(1), *v));
  AdversaryTerm t;
  t.id = id;
  t.alpha = alpha;
  t.effective = std::move(effective);
  t.inserted_at = prefix_.size();
  t.values.push_back(*v);
  terms_.push_back(std::move(t));
  planned_.push_back(std::nullopt);
  trace_.back() = current_value();
  return true;
}

void DiagonalState::plan_removal(std::size_t index, std::uint64_t stage) {
  if (index >= terms_.size()) throw Error("no term to schedule for removal");
  if (stage < prefix_.size()) throw Error("removal stage already passed");
  planned_[index] = stage;
}

void DiagonalState::append_bit(int bit, const std::vector<std::optional<Capital>>& child_values) {
  prefix_.push_back(bit);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    if (!terms_[i].removed_at) terms_[i].values.push_back(*child_values[i]);
  }
  trace_.push_back(current_value());
}

void DiagonalState::extend_to(std::uint64_t target_len) {
  while (prefix_.size() < target_len) {
    std::uint64_t L = prefix_.size();
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (!terms_[i].removed_at && planned_[i] && *planned_[i] == L) terms_[i].removed_at = L;
    }
    std::vector<std::optional<Capital>> v0(terms_.size()), v1(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      auto& t = terms_[i];
      if (t.removed_at) continue;
      DivergenceCause cause = DivergenceCause::Budget;
      v0[i] = try_eval(t.effective, prefix_.child(0), budget_, cause);
      if (v0[i]) v1[i] = try_eval(t.effective, prefix_.child(1), budget_, cause);
      if (!v0[i] || !v1[i]) {
        if (replay_) throw Error("replay diverged at length " + std::to_string(L));
        t.removed_at = L;
        t.cause = cause;
      }
    }
    Capital dw(0), d0(0), d1(0);
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      const auto& t = terms_[i];
      if (t.removed_at) continue;
      dw += t.alpha * t.values.back();
      d0 += t.alpha * *v0[i];
      d1 += t.alpha * *v1[i];
    }
    int bit = greedy_choice(prefix_, dw, d0, d1);
    append_bit(bit, bit == 0 ? v0 : v1);
  }
}

void DiagonalState::adopt(const Word& suffix) {
  for (std::size_t k = 0; k < suffix.size(); ++k) {
    Word next = prefix_.child(suffix[k]);
    std::vector<std::optional<Capital>> vals(terms_.size());
    for (std::size_t i = 0; i < terms_.size(); ++i) {
      if (terms_[i].removed_at) continue;
      DivergenceCause cause;
      vals[i] = try_eval(terms_[i].effective, next, budget_, cause);
      if (!vals[i]) throw WordError("adversary undefined along the adopted extension", next);
    }
    append_bit(suffix[k], vals);
  }
}

// ---------------------------------------------------------------------------
// Adversary class and divergence probe

namespace {

class AdversaryClass final : public ClosedClassEnum {
 public:
  AdversaryClass(Word prefix, std::vector<WeightedTerm> terms, StepBudget budget, std::size_t cap)
      : prefix_(std::move(prefix)), terms_(std::move(terms)), budget_(budget), cap_(cap) {}

  bool covers(const Constraint& c, std::uint64_t stage) const override {
    std::size_t nodes = 0;
    Word u;
    std::function<bool()> all_bad = [&]() -> bool {
      if (bad(u)) return true;
      if (u.size() >= stage || ++nodes > cap_) return false;
      auto it = c.find(u.size());
      for (int b = 0; b < 2; ++b) {
        if (it != c.end() && it->second != b) continue;
        u.push_back(b);
        bool ok = all_bad();
        u.pop_back();
        if (!ok) return false;
      }
      return true;
    };
    return all_bad();
  }

  std::string describe() const override { return "adversary(" + prefix_.to_string() + ")"; }

 private:
  // u leaves the prefix, or D reaches 2 at u. Called on u whose parent is
  // not bad, so only the last bit needs comparing.
  bool bad(const Word& u) const {
    if (!u.empty() && u.size() <= prefix_.size() && u[u.size() - 1] != prefix_[u.size() - 1]) return true;
    auto v = value(u);
    return v && *v >= Capital(2);
  }

  std::optional<Capital> value(const Word& u) const {
    {
      std::lock_guard lock(mu_);
      if (auto it = memo_.find(u); it != memo_.end()) return it->second;
    }
    std::optional<Capital> sum = Capital(0);
    for (const auto& t : terms_) {
      DivergenceCause cause;
      auto v = try_eval(t.martingale, u, budget_, cause);
      if (!v) {
        sum.reset();
        break;
      }
      *sum += t.coefficient * *v;
    }
    std::lock_guard lock(mu_);
    memo_.emplace(u, sum);
    return sum;
  }

  Word prefix_;
  std::vector<WeightedTerm> terms_;
  StepBudget budget_;
  std::size_t cap_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Word, std::optional<Capital>, WordHash> memo_;
};

}  // namespace

ClassPtr adversary_class(const DiagonalState& state, std::size_t node_cap) {
  return std::make_shared<const AdversaryClass>(state.prefix(), state.live_terms(), state.budget(), node_cap);
}

std::optional<Word> divergence_probe(const Strategy& b, const DiagonalState& state, std::size_t depth,
                                     StepBudget budget) {
  const Word& start = state.prefix();
  Word v = start;
  std::function<bool(std::size_t)> search = [&](std::size_t left) -> bool {
    if (v.size() > start.size()) {
      auto D = state.evaluate(v);
      if (!D || *D >= Capital(2)) return false;
    }
    if (run_on_word(b, v, budget).trace.halt == RunHalt::BudgetExhausted) return true;
    if (left == 0) return false;
    for (int bit = 0; bit < 2; ++bit) {
      v.push_back(bit);
      if (search(left - 1)) return true;
      v.pop_back();
    }
    return false;
  };
  if (search(depth)) return v;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// The construction

namespace {

struct Frontier {
  std::uint64_t n = 0;
  // per strategy: move indices whose positions fall below n, with positions
  std::vector<std::vector<std::pair<std::uint64_t, Position>>> events;
};

std::optional<std::pair<std::uint8_t, std::uint64_t>> last_dovetail_pair(const std::vector<ScanRule>& rules,
                                                                         std::uint64_t n) {
  std::uint64_t rounds = 0;
  for (const auto& r : rules) rounds = std::max(rounds, r.move_bound(n).value());
  std::optional<std::pair<std::uint8_t, std::uint64_t>> last;
  for (std::uint64_t j = 0; j < rounds; ++j) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      Position p = rules[i].at_move(j);
      if (p < n) last = std::make_pair(static_cast<std::uint8_t>(i), p);
    }
  }
  return last;
}

// Dovetails the scans until the recorded last pair shows up.
std::shared_ptr<Frontier> replay_frontier(const std::vector<ScanRule>& rules, std::uint64_t n,
                                          const std::optional<std::pair<std::uint8_t, std::uint64_t>>& last,
                                          StepBudget budget) {
  auto f = std::make_shared<Frontier>();
  f->n = n;
  f->events.resize(rules.size());
  if (!last) return f;
  if (last->first >= rules.size()) throw Error("certificate pair names a missing strategy");
  Meter meter(budget);
  for (std::uint64_t j = 0;; ++j) {
    for (std::size_t i = 0; i < rules.size(); ++i) {
      if (!meter.charge(1)) throw Error("dovetailed enumeration ran out of budget");
      Position p = rules[i].at_move(j);
      if (p >= n) continue;
      f->events[i].emplace_back(j, p);
      if (i == last->first && p == last->second) return f;
    }
  }
}

ScanRule rule_with_frontier(const ScanRule& rule, std::shared_ptr<const Frontier> f, std::size_t index) {
  InjectionRule r;
  r.map = [rule](std::uint64_t j) { return rule.at_move(j); };
  r.bound_hint = [f, index](std::uint64_t m) -> std::uint64_t {
    if (m > f->n) throw Error("bound requested past the certificate target");
    std::uint64_t J = 0;
    for (const auto& [j, p] : f->events[index]) {
      if (p < m) J = std::max(J, j + 1);
    }
    return J;
  };
  return ScanRule(std::move(r), rule.id());
}

bool tir_total(const Strategy& b, std::uint64_t horizon) {
  return b.d.declared_total() && b.rule.is_oblivious() && b.rule.move_bound(0).has_value() &&
         check_injectivity(b.rule, horizon).ok();
}

bool valid_permutation(const ScanRule& rule, std::uint64_t horizon) {
  if (rule.kind() == ScanRule::Kind::Monotonic) return true;
  if (rule.kind() != ScanRule::Kind::Permutation) return false;
  if (!check_injectivity(rule, horizon).ok()) return false;
  const auto& r = std::get<PermutationRule>(rule.variant());
  for (Position p = 0; p < horizon; ++p) {
    auto j = r.inverse(p);
    if (!j || r.forward(*j) != p) return false;
  }
  return true;
}

struct Plan {
  Variant variant;
  std::vector<std::uint64_t> schedule;
  std::uint8_t budget_log2;
  std::uint8_t set_id;
  std::uint8_t probe_depth;
};

void check_plan(const Plan& p) {
  if (p.schedule.empty() || p.schedule[0] != 0) throw Error("schedule must start at 0");
  for (std::size_t i = 1; i < p.schedule.size(); ++i) {
    if (p.schedule[i] <= p.schedule[i - 1]) throw NotIncreasing(i);
  }
  if (p.schedule.back() > Word::kMaxLength) throw Error("target length too large");
  if (p.budget_log2 > 62) throw Error("budget exponent must be at most 62");
  if (p.set_id > 3) throw Error("unknown stage set id " + std::to_string(p.set_id));
  if (p.probe_depth > 15) throw Error("probe depth must be at most 15");
}

// One pass of the construction. With `replay` set, entry decisions come from
// the certificate; otherwise they are made here and written into `records`.
struct Pass {
  Plan plan;
  std::uint64_t stop;
  const Certificate* replay = nullptr;
  // forward input
  std::vector<unsigned> roster;

  DiagonalState state;
  std::vector<EntryRecord> records;
  std::vector<std::optional<std::size_t>> term_of;
  std::vector<ScanRule> tir_rules;

  Pass(Plan p, std::uint64_t s) : plan(std::move(p)), stop(s), state(StepBudget{std::uint64_t{1} << plan.budget_log2}) {}

  StepBudget budget() const { return state.budget(); }
  std::uint64_t horizon() const { return plan.schedule.back() + 64; }

  std::uint64_t stretched(std::uint64_t f) const {
    std::uint64_t at = std::max<std::uint64_t>(f, state.prefix().size());
    return std::min(stop, next_in_stage_set(plan.set_id, at));
  }

  Martingale effective_ppr(const Strategy& b) {
    Strategy t = totalize_strategy(b, adversary_class(state), 0, budget());
    return monotonize(t);
  }

  void forward_entry(std::size_t k) {
    const auto& ce = catalog_entry(roster[k]);
    check_kind(plan.variant, ce);
    Strategy b = entry_strategy(ce);
    EntryRecord rec;
    rec.id = ce.id;
    rec.status = EntryStatus::Discarded;
    std::optional<Martingale> eff;
    try {
      switch (plan.variant) {
        case Variant::Tmr:
          if (b.d.declared_total()) eff = b.d;
          break;
        case Variant::Pmr:
          eff = b.d;
          break;
        case Variant::Tir:
          if (tir_total(b, horizon())) eff = monotonize(b);
          break;
        case Variant::Ppr:
          if (!valid_permutation(b.rule, horizon())) break;
          if (auto v = divergence_probe(b, state, plan.probe_depth, budget())) {
            rec.status = EntryStatus::Adopted;
            rec.suffix = Word(std::vector<std::uint8_t>(v->bits().begin() + static_cast<std::ptrdiff_t>(state.prefix().size()),
                                                        v->bits().end()));
            state.adopt(rec.suffix);
            break;
          }
          eff = effective_ppr(b);
          break;
      }
      if (eff && state.insert(ce.id, *eff)) {
        rec.status = EntryStatus::Active;
        term_of[k] = state.terms().size() - 1;
        if (plan.variant == Variant::Tir) tir_rules.push_back(b.rule);
      }
    } catch (const Error&) {
      if (rec.status != EntryStatus::Adopted) rec.status = EntryStatus::Discarded;
    }
    records.push_back(std::move(rec));
  }

  void replay_entry(std::size_t k, const std::vector<ScanRule>& replay_rules, std::size_t& tir_index) {
    const EntryRecord& rec = replay->entries[k];
    const auto& ce = catalog_entry(rec.id);
    check_kind(plan.variant, ce);
    if (rec.status == EntryStatus::Discarded) return;
    if (rec.status == EntryStatus::Adopted) {
      if (plan.variant != Variant::Ppr) throw Error("adopted entries only occur in ppr");
      state.adopt(rec.suffix);
      return;
    }
    Strategy b = entry_strategy(ce);
    Martingale eff = b.d;
    if (plan.variant == Variant::Tir) {
      eff = monotonize(Strategy{b.d, replay_rules.at(tir_index++)});
    } else if (plan.variant == Variant::Ppr) {
      eff = effective_ppr(b);
    }
    if (!state.insert(ce.id, eff)) throw Error("replay could not insert roster id " + std::to_string(rec.id));
    if (rec.status == EntryStatus::Divergent) state.plan_removal(state.terms().size() - 1, rec.stage);
  }

  void run() {
    std::size_t entries = replay ? replay->entries.size() : roster.size();
    term_of.assign(entries, std::nullopt);
    std::vector<ScanRule> replay_rules;
    std::size_t tir_index = 0;
    if (replay) {
      state.set_replay(true);
      if (plan.variant == Variant::Tir) {
        std::vector<ScanRule> rules;
        for (const auto& e : replay->entries) {
          if (e.status == EntryStatus::Active || e.status == EntryStatus::Divergent) {
            rules.push_back(entry_strategy(catalog_entry(e.id)).rule);
          }
        }
        auto f = replay_frontier(rules, replay->target_length, replay->last_pair, budget());
        for (std::size_t i = 0; i < rules.size(); ++i) replay_rules.push_back(rule_with_frontier(rules[i], f, i));
      }
    }
    const auto& f = plan.schedule;
    for (std::size_t k = 0; k + 1 < f.size(); ++k) {
      if (state.prefix().size() >= stop) break;
      if (k < entries) {
        if (replay) replay_entry(k, replay_rules, tir_index);
        else forward_entry(k);
      }
      state.extend_to(stretched(f[k + 1]));
    }
    state.extend_to(stop);
  }
};

Plan plan_of(const Certificate& c) {
  return Plan{c.variant, c.schedule(), c.budget_log2, c.set_id, c.probe_depth};
}

}  // namespace

ConstructionResult run_construction(const std::vector<unsigned>& roster, const ConstructionOptions& options) {
  Plan plan{options.variant, options.schedule, options.budget_log2, options.set_id, options.probe_depth};
  check_plan(plan);
  if (roster.size() > 255) throw Error("at most 255 roster entries");
  for (unsigned id : roster) check_kind(options.variant, catalog_entry(id));
  std::uint64_t target = plan.schedule.back();
  Pass pass(plan, target);
  pass.roster = roster;
  pass.run();

  ConstructionResult out;
  Certificate& c = out.certificate;
  c.variant = plan.variant;
  c.schedule_id = match_schedule(plan.schedule);
  if (c.schedule_id == kInlineSchedule) c.inline_schedule = plan.schedule;
  c.budget_log2 = plan.budget_log2;
  c.set_id = plan.set_id;
  c.probe_depth = plan.probe_depth;
  c.target_length = target;
  c.entries = pass.records;
  for (std::size_t k = 0; k < c.entries.size(); ++k) {
    if (!pass.term_of[k]) continue;
    const auto& t = pass.state.terms()[*pass.term_of[k]];
    if (t.removed_at && *t.removed_at < target) {
      c.entries[k].status = EntryStatus::Divergent;
      c.entries[k].stage = *t.removed_at;
      c.entries[k].cause = t.cause;
    }
  }
  if (plan.variant == Variant::Tir) c.last_pair = last_dovetail_pair(pass.tir_rules, target);

  out.prefix = pass.state.prefix().prefix(std::min<std::size_t>(target, pass.state.prefix().size()));
  out.adversary = pass.state.adversary_trace();
  out.adversary.resize(std::min(out.adversary.size(), out.prefix.size() + 1));
  out.terms = pass.state.terms();
  return out;
}

Word replay_certificate(const Certificate& cert, std::uint64_t n) {
  if (n > cert.target_length) throw Error("replay length past the certificate target");
  Plan plan = plan_of(cert);
  check_plan(plan);
  if (plan.schedule.back() != cert.target_length) throw Error("schedule does not end at the target");
  Pass pass(plan, n);
  pass.replay = &cert;
  pass.run();
  return pass.state.prefix().prefix(n);
}

DescriptionSystem full_description_system() {
  return DescriptionSystem([](const Word& advice, std::uint64_t length, StepBudget budget) -> std::optional<Word> {
    if (budget.steps < length) return std::nullopt;
    try {
      return replay_certificate(decode_advice(advice, length), length);
    } catch (const Error&) {
      return std::nullopt;
    }
  });
}

std::vector<unsigned> parse_roster_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("roster file: ") + e.what());
  }
  if (!j.is_object() || !j.contains("roster") || !j["roster"].is_array()) {
    throw ParseError("roster file needs {\"roster\": [ids]}");
  }
  std::vector<unsigned> out;
  for (const auto& v : j["roster"]) {
    if (!v.is_number_unsigned()) throw ParseError("roster ids are naturals");
    auto id = v.get<std::uint64_t>();
    if (id > 255) throw UnknownRosterId(static_cast<unsigned>(std::min<std::uint64_t>(id, 1u << 30)));
    catalog_entry(static_cast<unsigned>(id));
    out.push_back(static_cast<unsigned>(id));
  }
  return out;
}

}  // namespace mlab
