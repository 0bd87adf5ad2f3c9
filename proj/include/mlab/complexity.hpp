#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mlab/core.hpp"

namespace mlab {

// ---------------------------------------------------------------------------
// Self-delimiting naturals
//
// enc(n): write n + 1 in binary with L bits; emit L - 1 ones, a zero, then
// the L - 1 low bits. enc(0) = 0, enc(1) = 100, enc(2) = 101, enc(3) = 11000.

void append_natural(Word& out, std::uint64_t n);
std::size_t natural_code_length(std::uint64_t n);
/// Reads a natural at `pos`, advancing it. nullopt on truncated or oversized
/// input.
std::optional<std::uint64_t> read_natural(const Word& in, std::size_t& pos);

// ---------------------------------------------------------------------------
// Programs
//
// A program is exactly one record:
//   0  enc(|p| - 1) p      REPEAT: p repeated cyclically to length `condition`
//   10 enc(|w|) w          LITERAL: w
//   11 enc(|a|) a          CERT: the advice a replayed to length `condition`

enum class Opcode { Repeat, Literal, Cert };

Word encode_repeat(const Word& pattern);
Word encode_literal(const Word& w);
Word encode_cert(const Word& advice);

struct ProgramRecord {
  Opcode op;
  Word payload;
};

/// Parses a program; nullopt unless it is exactly one well-formed record.
std::optional<ProgramRecord> parse_program(const Word& p);

/// Replays certificate advice to the given length.
using CertDecoder = std::function<std::optional<Word>(const Word& advice, std::uint64_t length, StepBudget budget)>;

enum class DecodeStatus { Ok, Invalid, OutOfBudget };

struct DecodeResult {
  DecodeStatus status = DecodeStatus::Invalid;
  Word output;
};

class DescriptionSystem {
 public:
  /// Without a decoder every CERT program is invalid.
  explicit DescriptionSystem(CertDecoder cert = nullptr) : cert_(std::move(cert)) {}

  /// Cost: |p| + |output| steps, plus whatever the certificate replay uses.
  DecodeResult decode(const Word& p, std::uint64_t condition, StepBudget budget) const;

 private:
  CertDecoder cert_;
};

struct ComplexityBound {
  Word word;
  std::uint64_t condition = 0;
  std::uint64_t bound = 0;
  Word witness;
};

inline constexpr std::size_t kExhaustiveProgramBits = 16;

/// Shortest program found for w: every program of at most
/// `exhaustive_bits` bits is tried in length-lexicographic order, then the
/// REPEAT and LITERAL candidates and any extra candidates (e.g. a CERT
/// program), each checked by decoding. nullopt only if the budget runs out
/// first.
std::optional<ComplexityBound> complexity_upper(const DescriptionSystem& ds, const Word& w,
                                                std::uint64_t condition, StepBudget budget,
                                                std::size_t exhaustive_bits = kExhaustiveProgramBits,
                                                const std::vector<Word>& extra_candidates = {});

struct LowStream {
  std::vector<Word> words;
  /// The budget ran out before every program was tried.
  bool truncated = false;
};

/// Distinct outputs of the given length among programs of at most
/// `threshold` bits, in program order.
LowStream enumerate_low(const DescriptionSystem& ds, std::size_t length, std::uint64_t condition,
                        std::uint64_t threshold, StepBudget budget);

/// Calls visit(p) for every word of length 0..max_bits in length-lex order;
/// stops early when visit returns false.
void for_each_program(std::size_t max_bits, const std::function<bool(const Word&)>& visit);

/// MSB-first hex of the bits, zero padded to whole bytes.
std::string to_hex(const Word& bits);

}  // namespace mlab
