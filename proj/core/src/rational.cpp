#include "fobn/rational.hpp"

#include <ostream>
#include <sstream>

#include "fobn/errors.hpp"

namespace fobn {

Rational::Rational(long num, long den) : v_(num, den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  v_.canonicalize();
}

Rational Rational::operator/(const Rational& o) const {
  if (o.v_ == 0) throw DomainError("rational division by zero");
  return Rational(mpq_class(v_ / o.v_));
}

Rational Rational::parse(const std::string& text) {
  auto bad = [&] { throw ParseError("malformed rational '" + text + "'"); };
  if (text.empty()) bad();
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    mpq_class q;
    if (q.set_str(text, 10) != 0) bad();
    if (q.get_den() == 0) throw ParseError("zero denominator in '" + text + "'");
    q.canonicalize();
    return Rational(q);
  }
  auto dot = text.find('.');
  if (dot == std::string::npos) {
    mpz_class n;
    if (n.set_str(text, 10) != 0) bad();
    return Rational(mpq_class(n));
  }
  std::string digits = text.substr(0, dot) + text.substr(dot + 1);
  std::size_t frac = text.size() - dot - 1;
  if (digits.empty() || frac == 0) bad();
  mpz_class num;
  if (num.set_str(digits, 10) != 0) bad();
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac);
  mpq_class q(num, den);
  q.canonicalize();
  return Rational(q);
}

std::string Rational::str() const {
  if (v_.get_den() == 1) return v_.get_num().get_str();
  return v_.get_str();
}

std::string Rational::decimal(int digits) const {
  mpz_class num = v_.get_num();
  mpz_class den = v_.get_den();
  bool neg = num < 0;
  if (neg) num = -num;
  mpz_class ip = num / den;
  mpz_class rem = num % den;
  std::string out = (neg && (ip != 0 || rem != 0) ? "-" : "") + ip.get_str();
  if (digits <= 0) return out;
  out += '.';
  for (int i = 0; i < digits; ++i) {
    rem *= 10;
    mpz_class d = rem / den;
    rem %= den;
    out += static_cast<char>('0' + d.get_si());
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) {
  return os << r.str();
}

Rational half_power(unsigned k) {
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
  return Rational::parse("1/" + den.get_str());
}

} // namespace fobn
