#ifndef FOBN_RATIONAL_HPP
#define FOBN_RATIONAL_HPP

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace fobn {

// Arbitrary-precision rational, always in canonical reduced form with a
// positive denominator. All probability arithmetic in the library goes
// through this type; there is no floating point on any decision path.
class Rational {
public:
  Rational() : v_(0) {}
  Rational(long num) : v_(num) {}
  Rational(long num, long den);

  // Accepts "p/q", an integer, or a terminating decimal such as "0.125".
  static Rational parse(const std::string& text);

  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }

  Rational operator+(const Rational& o) const { return Rational(v_ + o.v_); }
  Rational operator-(const Rational& o) const { return Rational(v_ - o.v_); }
  Rational operator*(const Rational& o) const { return Rational(v_ * o.v_); }
  Rational operator/(const Rational& o) const;
  Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
  Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
  Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }

  bool operator==(const Rational& o) const { return v_ == o.v_; }
  bool operator!=(const Rational& o) const { return v_ != o.v_; }
  bool operator<(const Rational& o) const { return v_ < o.v_; }
  bool operator<=(const Rational& o) const { return v_ <= o.v_; }
  bool operator>(const Rational& o) const { return v_ > o.v_; }
  bool operator>=(const Rational& o) const { return v_ >= o.v_; }

  // "p/q", or just "p" when the denominator is 1.
  std::string str() const;

  // Exact decimal expansion truncated to `digits` fractional places,
  // computed with integer arithmetic so it is platform-independent.
  std::string decimal(int digits = 6) const;

  std::string numerator_str() const { return v_.get_num().get_str(); }
  std::string denominator_str() const { return v_.get_den().get_str(); }

private:
  explicit Rational(mpq_class q) : v_(std::move(q)) { v_.canonicalize(); }
  mpq_class v_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

// 1/2^k without intermediate blowup; used for uniform root weights.
Rational half_power(unsigned k);

} // namespace fobn

#endif
