#include "mlab/capital.hpp"

#include <cctype>

#include "mlab/core.hpp"

namespace mlab {

Capital::Capital(long num, unsigned long den) {
  if (den == 0) throw Error("zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Capital Capital::parse(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ParseError("empty capital");
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-')) {
      throw ParseError("invalid capital: " + s);
    }
  }
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw ParseError("invalid capital: " + s);
  if (q.get_den() == 0) throw ParseError("zero denominator: " + s);
  q.canonicalize();
  return Capital(std::move(q));
}

Capital Capital::pow2(unsigned long exponent) {
  mpz_class z;
  mpz_ui_pow_ui(z.get_mpz_t(), 2, exponent);
  return Capital(mpq_class(z));
}

Capital& Capital::operator/=(const Capital& o) {
  if (o.is_zero()) throw Error("division by zero capital");
  q_ /= o.q_;
  return *this;
}

Capital max(const Capital& a, const Capital& b) { return a < b ? b : a; }
Capital min(const Capital& a, const Capital& b) { return b < a ? b : a; }

}  // namespace mlab
