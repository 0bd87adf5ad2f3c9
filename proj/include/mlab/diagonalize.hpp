#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlab/complexity.hpp"
#include "mlab/transforms.hpp"

namespace mlab {

class UnknownRosterId : public Error {
 public:
  explicit UnknownRosterId(unsigned id) : Error("unknown roster id " + std::to_string(id)), id_(id) {}
  unsigned id() const noexcept { return id_; }

 private:
  unsigned id_;
};

/// Both children of a word exceed it: the adversary is not a martingale.
class FairnessViolation : public WordError {
 public:
  explicit FairnessViolation(Word at) : WordError("adversary is not fair", std::move(at)) {}
};

// ---------------------------------------------------------------------------
// Public roster catalog

enum class EntryKind { TotalMartingale, PartialMartingale, TotalInjectiveStrategy, PartialPermutationStrategy };
std::string to_string(EntryKind k);

struct CatalogEntry {
  std::uint8_t id;
  EntryKind kind;
  /// Martingale id, or "<martingale>+<rule>" for strategies.
  std::string spec;
};

inline constexpr std::uint8_t kCatalogVersion = 1;

const std::vector<CatalogEntry>& roster_catalog();
/// Throws UnknownRosterId.
const CatalogEntry& catalog_entry(unsigned id);
/// Martingale entries become monotonic strategies.
Strategy entry_strategy(const CatalogEntry& e);

// ---------------------------------------------------------------------------
// Schedules and stage sets

inline constexpr std::uint8_t kInlineSchedule = 15;

/// Catalog schedules, as many values as are <= limit (at least f(0) = 0):
/// 0: 0, 8, 32, 128, ... (2*4^k)   1: 0, 4, 8, 16, ... (2^(k+1))
/// 2: 0, 8, 16, 24, ... (8k)       3: 0, 16, 64, 256, ... (4^(k+1))
std::vector<std::uint64_t> catalog_schedule(std::uint8_t id, std::uint64_t limit);
/// Catalog id whose prefix equals the schedule, or kInlineSchedule.
std::uint8_t match_schedule(const std::vector<std::uint64_t>& schedule);

/// f(0) = 0 and f(k) = max(f(k-1) + 1, least n with h(n) >= k + 1) for a
/// tabulated order h(0), h(1), ...; stops where the table runs out.
std::vector<std::uint64_t> schedule_from_order(const std::vector<std::uint64_t>& h);

/// Stage-length sets: 0 all naturals, 1 {0} and powers of two,
/// 2 multiples of 8, 3 squares.
bool in_stage_set(std::uint8_t set_id, std::uint64_t n);
std::uint64_t next_in_stage_set(std::uint8_t set_id, std::uint64_t n);

// ---------------------------------------------------------------------------
// Certificates

enum class Variant { Tmr, Tir, Pmr, Ppr };
std::string to_string(Variant v);
Variant parse_variant(const std::string& s);

enum class EntryStatus { Active = 0, Divergent = 1, Discarded = 2, Adopted = 3 };
std::string to_string(EntryStatus s);

enum class DivergenceCause { Budget = 0, Race = 1 };

struct EntryRecord {
  std::uint8_t id = 0;
  EntryStatus status = EntryStatus::Active;
  /// Divergent: prefix length from which the entry is ignored.
  std::uint64_t stage = 0;
  DivergenceCause cause = DivergenceCause::Budget;
  /// Adopted: the extension taken at insertion.
  Word suffix;

  friend bool operator==(const EntryRecord&, const EntryRecord&) = default;
};

struct Certificate {
  Variant variant = Variant::Tmr;
  std::uint8_t schedule_id = 0;
  /// Only for kInlineSchedule.
  std::vector<std::uint64_t> inline_schedule;
  std::uint8_t budget_log2 = 20;
  std::uint8_t set_id = 0;
  std::uint8_t probe_depth = 8;
  std::vector<EntryRecord> entries;
  /// tir: the last (entry index, position) of the dovetailed enumeration of
  /// visited positions below the target length.
  std::optional<std::pair<std::uint8_t, std::uint64_t>> last_pair;
  /// The target length n; the condition of the description, not part of the
  /// advice.
  std::uint64_t target_length = 0;

  std::vector<std::uint64_t> schedule() const;
  friend bool operator==(const Certificate&, const Certificate&) = default;
};

Word encode_advice(const Certificate& c);
/// Throws ParseError on malformed advice.
Certificate decode_advice(const Word& advice, std::uint64_t target_length);

/// Frozen constants of the size bound
/// |advice| <= c1 * entries + c2 * ceil(log2(n + 1)) * records + c3,
/// records = divergence records plus the tir pair.
inline constexpr std::uint64_t kSizeC1 = 36;
inline constexpr std::uint64_t kSizeC2 = 2;
inline constexpr std::uint64_t kSizeC3 = 32;
std::uint64_t certificate_size_bound(const Certificate& c);

/// "MLCT", version, catalog version, target (u32 LE), advice bits (u32 LE),
/// advice packed MSB first.
std::vector<std::uint8_t> serialize_certificate(const Certificate& c);
Certificate parse_certificate(const std::vector<std::uint8_t>& bytes);

// ---------------------------------------------------------------------------
// The construction

/// Least bit whose child does not exceed the parent; when both qualify, the
/// last bit of w is repeated (0 at the empty word). Throws
/// FairnessViolation when neither qualifies.
int greedy_choice(const Word& w, const Capital& dw, const Capital& d0, const Capital& d1);
int greedy_step(const Martingale& D, const Word& w, StepBudget budget);

struct AdversaryTerm {
  std::uint8_t id = 0;
  Capital alpha;
  Martingale effective = zero_martingale();
  std::uint64_t inserted_at = 0;
  std::optional<std::uint64_t> removed_at;
  DivergenceCause cause = DivergenceCause::Budget;
  /// effective(prefix|L) for L = inserted_at, inserted_at + 1, ...
  std::vector<Capital> values;
};

/// The prefix built so far and the weighted sum D of the inserted terms.
class DiagonalState {
 public:
  explicit DiagonalState(StepBudget term_budget) : budget_(term_budget) { trace_.push_back(Capital(0)); }

  const Word& prefix() const noexcept { return prefix_; }
  const std::vector<AdversaryTerm>& terms() const noexcept { return terms_; }
  StepBudget budget() const noexcept { return budget_; }
  /// D(prefix|L) as seen when the prefix reached length L (and after any
  /// insertion at L).
  const std::vector<Capital>& adversary_trace() const noexcept { return trace_; }
  Capital current_value() const;

  /// D at any word with the currently live terms; nullopt if a term fails.
  std::optional<Capital> evaluate(const Word& u) const;
  /// The live terms as (alpha, effective) pairs.
  std::vector<WeightedTerm> live_terms() const;

  /// Inserts effective with alpha = (2 - D(w)) / (2 max(1, effective(w))).
  /// Returns false (and inserts nothing) if effective is undefined at w.
  bool insert(std::uint8_t id, Martingale effective, DivergenceCause* cause = nullptr);
  /// Greedy extension to target_len. Terms that fail are dropped at the
  /// step where they fail; in replay mode (planned removals given) a failure
  /// is an error.
  void extend_to(std::uint64_t target_len);
  /// Appends a suffix along which D stays below 2 (taken from a probe).
  void adopt(const Word& suffix);

  /// Replay: drop term `index` at prefix length `stage`.
  void plan_removal(std::size_t index, std::uint64_t stage);
  void set_replay(bool on) noexcept { replay_ = on; }

 private:
  void append_bit(int bit, const std::vector<std::optional<Capital>>& child_values);
  bool live_at(const AdversaryTerm& t, std::uint64_t len) const;

  StepBudget budget_;
  Word prefix_;
  std::vector<AdversaryTerm> terms_;
  std::vector<std::optional<std::uint64_t>> planned_;
  std::vector<Capital> trace_;
  bool replay_ = false;
};

/// C = [prefix] minus the sequences with a prefix where D >= 2, given by
/// the staged enumeration of its complement: stage t lists the bad words of
/// length <= t. The cover search gives up (answers "not covered") after
/// node_cap nodes.
ClassPtr adversary_class(const DiagonalState& state, std::size_t node_cap = 4096);

/// Depth-first search (0 first) over extensions of the prefix of length at
/// most |prefix| + depth along which D stays below 2, for one on which the
/// finite run of b runs out of budget.
std::optional<Word> divergence_probe(const Strategy& b, const DiagonalState& state, std::size_t depth,
                                     StepBudget budget);

struct ConstructionOptions {
  Variant variant = Variant::Tmr;
  std::vector<std::uint64_t> schedule{0, 8, 32, 128, 512};
  std::uint8_t budget_log2 = 20;
  std::uint8_t set_id = 0;
  std::uint8_t probe_depth = 8;
};

struct ConstructionResult {
  Word prefix;
  Certificate certificate;
  std::vector<Capital> adversary;
  std::vector<AdversaryTerm> terms;
};

/// Inserts roster[k] at the k-th stage boundary and extends greedily to the
/// next one; the target length is the last schedule value.
ConstructionResult run_construction(const std::vector<unsigned>& roster, const ConstructionOptions& options);

/// Re-runs the construction from the certificate alone, up to length n.
Word replay_certificate(const Certificate& cert, std::uint64_t n);

/// The description system with CERT programs replayed through
/// replay_certificate (condition = target length).
DescriptionSystem full_description_system();

/// Reads {"roster": [ids]}.
std::vector<unsigned> parse_roster_json(const std::string& text);

}  // namespace mlab
