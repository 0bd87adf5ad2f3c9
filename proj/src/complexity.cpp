#include "mlab/complexity.hpp"

#include <unordered_set>

namespace mlab {

namespace {

constexpr std::size_t kMaxNaturalBits = 48;

}  // namespace

void append_natural(Word& out, std::uint64_t n) {
  std::uint64_t v = n + 1;
  std::size_t L = floor_log2(v) + 1;
  for (std::size_t i = 0; i + 1 < L; ++i) out.push_back(1);
  out.push_back(0);
  for (std::size_t i = L - 1; i-- > 0;) out.push_back(static_cast<int>((v >> i) & 1));
}

std::size_t natural_code_length(std::uint64_t n) { return 2 * floor_log2(n + 1) + 1; }

std::optional<std::uint64_t> read_natural(const Word& in, std::size_t& pos) {
  std::size_t ones = 0;
  while (pos < in.size() && in[pos] == 1) {
    ++ones;
    ++pos;
    if (ones > kMaxNaturalBits) return std::nullopt;
  }
  if (pos >= in.size()) return std::nullopt;
  ++pos;  // the zero
  if (pos + ones > in.size()) return std::nullopt;
  std::uint64_t v = 1;
  for (std::size_t i = 0; i < ones; ++i) v = (v << 1) | static_cast<std::uint64_t>(in[pos++]);
  return v - 1;
}

namespace {

Word record(std::initializer_list<int> opcode, const Word& payload, std::uint64_t count) {
  Word p;
  for (int b : opcode) p.push_back(b);
  append_natural(p, count);
  return p.concat(payload);
}

}  // namespace

Word encode_repeat(const Word& pattern) {
  if (pattern.empty()) throw Error("REPEAT needs a nonempty pattern");
  return record({0}, pattern, pattern.size() - 1);
}

Word encode_literal(const Word& w) { return record({1, 0}, w, w.size()); }

Word encode_cert(const Word& advice) { return record({1, 1}, advice, advice.size()); }

std::optional<ProgramRecord> parse_program(const Word& p) {
  if (p.empty()) return std::nullopt;
  std::size_t pos = 0;
  Opcode op;
  if (p[0] == 0) {
    op = Opcode::Repeat;
    pos = 1;
  } else {
    if (p.size() < 2) return std::nullopt;
    op = p[1] == 0 ? Opcode::Literal : Opcode::Cert;
    pos = 2;
  }
  auto n = read_natural(p, pos);
  if (!n) return std::nullopt;
  std::uint64_t len = op == Opcode::Repeat ? *n + 1 : *n;
  if (p.size() - pos != len) return std::nullopt;
  std::vector<std::uint8_t> bits(p.bits().begin() + static_cast<std::ptrdiff_t>(pos), p.bits().end());
  return ProgramRecord{op, Word(std::move(bits))};
}

DecodeResult DescriptionSystem::decode(const Word& p, std::uint64_t condition, StepBudget budget) const {
  DecodeResult out;
  Meter meter(budget);
  if (!meter.charge(p.size())) {
    out.status = DecodeStatus::OutOfBudget;
    return out;
  }
  auto rec = parse_program(p);
  if (!rec) return out;
  switch (rec->op) {
    case Opcode::Literal:
      if (!meter.charge(rec->payload.size())) {
        out.status = DecodeStatus::OutOfBudget;
        return out;
      }
      out.output = rec->payload;
      break;
    case Opcode::Repeat: {
      if (condition > Word::kMaxLength) return out;
      if (!meter.charge(condition)) {
        out.status = DecodeStatus::OutOfBudget;
        return out;
      }
      std::vector<std::uint8_t> bits(condition);
      const auto& pat = rec->payload;
      for (std::size_t i = 0; i < condition; ++i) bits[i] = static_cast<std::uint8_t>(pat[i % pat.size()]);
      out.output = Word(std::move(bits));
      break;
    }
    case Opcode::Cert: {
      if (!cert_ || condition > Word::kMaxLength) return out;
      auto w = cert_(rec->payload, condition, StepBudget{meter.left()});
      if (!w) return out;
      out.output = std::move(*w);
      break;
    }
  }
  out.status = DecodeStatus::Ok;
  return out;
}

void for_each_program(std::size_t max_bits, const std::function<bool(const Word&)>& visit) {
  for (std::size_t n = 0; n <= max_bits; ++n) {
    std::vector<std::uint8_t> bits(n, 0);
    while (true) {
      if (!visit(Word(bits))) return;
      std::size_t i = n;
      while (i > 0 && bits[i - 1] == 1) bits[--i] = 0;
      if (i == 0) break;
      bits[i - 1] = 1;
    }
  }
}

namespace {

/// Smallest-period REPEAT program and the LITERAL program, shortest first.
std::optional<Word> structural_candidate(const Word& w, std::uint64_t condition) {
  std::optional<Word> best = encode_literal(w);
  auto consider = [&](Word p) {
    if (p.size() < best->size() || (p.size() == best->size() && p < *best)) best = std::move(p);
  };
  if (condition == w.size() && !w.empty()) {
    for (std::size_t period = 1; period <= w.size(); ++period) {
      if (1 + natural_code_length(period - 1) + period >= best->size()) break;
      bool periodic = true;
      for (std::size_t i = period; i < w.size() && periodic; ++i) periodic = w[i] == w[i - period];
      if (periodic) {
        consider(encode_repeat(w.prefix(period)));
        break;  // longer periods give longer programs
      }
    }
  } else if (condition == 0 && w.empty()) {
    consider(encode_repeat(Word::parse("0")));
  }
  return best;
}

}  // namespace

std::optional<ComplexityBound> complexity_upper(const DescriptionSystem& ds, const Word& w,
                                                std::uint64_t condition, StepBudget budget,
                                                std::size_t exhaustive_bits,
                                                const std::vector<Word>& extra_candidates) {
  Meter meter(budget);
  auto fallback = structural_candidate(w, condition);
  for (const auto& p : extra_candidates) {
    if (p.size() > fallback->size() || (p.size() == fallback->size() && !(p < *fallback))) continue;
    auto r = ds.decode(p, condition, StepBudget{meter.left()});
    meter.charge(p.size() + 1);
    if (r.status == DecodeStatus::Ok && r.output == w) fallback = p;
  }
  std::size_t limit = std::min(exhaustive_bits, fallback->size() - 1);
  std::optional<Word> found;
  bool exhausted = false;
  for_each_program(limit, [&](const Word& p) {
    if (meter.left() == 0) {
      exhausted = true;
      return false;
    }
    auto r = ds.decode(p, condition, StepBudget{meter.left()});
    meter.charge(p.size() + 1);
    if (r.status == DecodeStatus::Ok && r.output == w) {
      found = p;
      return false;
    }
    return true;
  });
  if (!found) {
    if (exhausted) return std::nullopt;
    auto check = ds.decode(*fallback, condition, StepBudget{meter.left()});
    if (check.status != DecodeStatus::Ok) return std::nullopt;
    found = fallback;
  }
  return ComplexityBound{w, condition, found->size(), *found};
}

LowStream enumerate_low(const DescriptionSystem& ds, std::size_t length, std::uint64_t condition,
                        std::uint64_t threshold, StepBudget budget) {
  LowStream out;
  Meter meter(budget);
  std::unordered_set<Word, WordHash> seen;
  for_each_program(threshold, [&](const Word& p) {
    if (meter.left() == 0) {
      out.truncated = true;
      return false;
    }
    auto r = ds.decode(p, condition, StepBudget{meter.left()});
    meter.charge(p.size() + 1);
    if (r.status == DecodeStatus::OutOfBudget) {
      out.truncated = true;
      return false;
    }
    if (r.status == DecodeStatus::Ok && r.output.size() == length && seen.insert(r.output).second) {
      out.words.push_back(r.output);
    }
    return true;
  });
  return out;
}

std::string to_hex(const Word& bits) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (std::size_t i = 0; i < bits.size(); i += 8) {
    int byte = 0;
    for (std::size_t j = 0; j < 8; ++j) byte = (byte << 1) | (i + j < bits.size() ? bits[i + j] : 0);
    out.push_back(digits[byte >> 4]);
    out.push_back(digits[byte & 15]);
  }
  return out;
}

}  // namespace mlab
