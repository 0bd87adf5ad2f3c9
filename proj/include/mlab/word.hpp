#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlab {

using Position = std::uint64_t;

/// A finite binary word. Bits are indexed from 0.
class Word {
 public:
  static constexpr std::size_t kMaxLength = std::size_t{1} << 20;

  Word() = default;
  explicit Word(std::vector<std::uint8_t> bits);

  /// Parses an ASCII string over {0,1}. The empty string is the empty word.
  static Word parse(std::string_view text);
  static Word repeat(int bit, std::size_t n);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  int operator[](std::size_t i) const noexcept { return bits_[i]; }
  int at(std::size_t i) const;

  void push_back(int bit);
  void pop_back() { bits_.pop_back(); }
  Word child(int bit) const;
  Word prefix(std::size_t n) const;
  Word concat(const Word& suffix) const;

  bool is_prefix_of(const Word& other) const noexcept;
  bool compatible_with(const Word& other) const noexcept;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::string to_string() const;

  friend bool operator==(const Word&, const Word&) = default;
  /// Length-then-lexicographic order.
  friend std::strong_ordering operator<=>(const Word& a, const Word& b);

 private:
  std::vector<std::uint8_t> bits_;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

/// Visits every word of length n in lexicographic order.
void for_each_word(std::size_t n, const std::function<void(const Word&)>& visit);

}  // namespace mlab
