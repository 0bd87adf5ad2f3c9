#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace mlab {

/// Exact rational amount of money. Arithmetic never rounds.
///
/// The value is signed so that differences such as 2 - D(w) can be formed;
/// martingale values are required to be nonnegative by the martingale
/// contract, not by this type.
class Capital {
 public:
  Capital() = default;
  Capital(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Capital(long num, unsigned long den);
  explicit Capital(mpq_class q) : q_(std::move(q)) { q_.canonicalize(); }

  /// Parses "num/den" or a bare integer.
  static Capital parse(std::string_view text);
  static Capital pow2(unsigned long exponent);

  Capital& operator+=(const Capital& o) { q_ += o.q_; return *this; }
  Capital& operator-=(const Capital& o) { q_ -= o.q_; return *this; }
  Capital& operator*=(const Capital& o) { q_ *= o.q_; return *this; }
  Capital& operator/=(const Capital& o);

  friend Capital operator+(Capital a, const Capital& b) { return a += b; }
  friend Capital operator-(Capital a, const Capital& b) { return a -= b; }
  friend Capital operator*(Capital a, const Capital& b) { return a *= b; }
  friend Capital operator/(Capital a, const Capital& b) { return a /= b; }
  Capital operator-() const { return Capital(mpq_class(-q_)); }

  friend bool operator==(const Capital& a, const Capital& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Capital& a, const Capital& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }

  std::string numerator() const { return q_.get_num().get_str(); }
  std::string denominator() const { return q_.get_den().get_str(); }
  /// Always "num/den", also for integers ("32/1").
  std::string to_string() const { return numerator() + "/" + denominator(); }
  double approx() const { return q_.get_d(); }

  const mpq_class& raw() const { return q_; }

 private:
  mpq_class q_{0};
};

Capital max(const Capital& a, const Capital& b);
Capital min(const Capital& a, const Capital& b);

}  // namespace mlab
