#include "mlab/word.hpp"

#include <algorithm>

#include "mlab/core.hpp"

namespace mlab {

Word::Word(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  if (bits_.size() > kMaxLength) throw ParseError("word exceeds maximum length");
  for (auto b : bits_) {
    if (b > 1) throw ParseError("word bits must be 0 or 1");
  }
}

Word Word::parse(std::string_view text) {
  if (text.size() > kMaxLength) throw ParseError("word exceeds maximum length");
  std::vector<std::uint8_t> bits;
  bits.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') {
      throw ParseError("invalid character in word: '" + std::string(1, c) + "'");
    }
    bits.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  Word w;
  w.bits_ = std::move(bits);
  return w;
}

Word Word::repeat(int bit, std::size_t n) {
  if (n > kMaxLength) throw ParseError("word exceeds maximum length");
  Word w;
  w.bits_.assign(n, static_cast<std::uint8_t>(bit & 1));
  return w;
}

int Word::at(std::size_t i) const {
  if (i >= bits_.size()) {
    throw std::out_of_range("bit " + std::to_string(i) + " outside word of length " +
                            std::to_string(bits_.size()));
  }
  return bits_[i];
}

void Word::push_back(int bit) {
  if (bits_.size() >= kMaxLength) throw Error("word exceeds maximum length");
  bits_.push_back(static_cast<std::uint8_t>(bit & 1));
}

Word Word::child(int bit) const {
  Word w = *this;
  w.push_back(bit);
  return w;
}

Word Word::prefix(std::size_t n) const {
  Word w;
  w.bits_.assign(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(std::min(n, size())));
  return w;
}

Word Word::concat(const Word& suffix) const {
  if (size() + suffix.size() > kMaxLength) throw Error("word exceeds maximum length");
  Word w = *this;
  w.bits_.insert(w.bits_.end(), suffix.bits_.begin(), suffix.bits_.end());
  return w;
}

bool Word::is_prefix_of(const Word& other) const noexcept {
  if (size() > other.size()) return false;
  return std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

bool Word::compatible_with(const Word& other) const noexcept {
  return is_prefix_of(other) || other.is_prefix_of(*this);
}

std::string Word::to_string() const {
  std::string s(bits_.size(), '0');
  for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = static_cast<char>('0' + bits_[i]);
  return s;
}

std::strong_ordering operator<=>(const Word& a, const Word& b) {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.bits_.begin(), a.bits_.end(), b.bits_.begin(),
                                                b.bits_.end());
}

std::size_t WordHash::operator()(const Word& w) const noexcept {
  // FNV-1a over the bits, length mixed in so that 0 and 00 differ.
  std::uint64_t h = 1469598103934665603ull ^ w.size();
  for (auto b : w.bits()) {
    h ^= b + 0x9e;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

void for_each_word(std::size_t n, const std::function<void(const Word&)>& visit) {
  std::vector<std::uint8_t> bits(n, 0);
  while (true) {
    visit(Word(bits));
    std::size_t i = n;
    while (i > 0 && bits[i - 1] == 1) {
      bits[i - 1] = 0;
      --i;
    }
    if (i == 0) return;
    bits[i - 1] = 1;
  }
}

}  // namespace mlab
