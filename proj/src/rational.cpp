#include "xrate/rational.hpp"

#include <cmath>

#include "xrate/error.hpp"

namespace xrate {

Rational make_rational(long num, long den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

Rational make_rational(const Natural& num, const Natural& den) {
  if (den == 0) throw InvalidInput("rational with zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

namespace {

Natural parse_integer(std::string_view text, std::string_view whole) {
  std::size_t start = 0;
  if (!text.empty() && (text[0] == '-' || text[0] == '+')) start = 1;
  if (start == text.size()) throw InvalidInput("malformed rational '" + std::string(whole) + "'");
  for (std::size_t i = start; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') {
      throw InvalidInput("malformed rational '" + std::string(whole) + "'");
    }
  }
  std::string digits(text[0] == '+' ? text.substr(1) : text);
  return Natural(digits, 10);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  text = trim(text);
  const auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    return Rational(parse_integer(text, text));
  }
  Natural num = parse_integer(trim(text.substr(0, slash)), text);
  Natural den = parse_integer(trim(text.substr(slash + 1)), text);
  if (den == 0) throw InvalidInput("rational with zero denominator: '" + std::string(text) + "'");
  return make_rational(num, den);
}

std::string to_string(const Rational& q) {
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

std::string to_string(const Natural& n) { return n.get_str(); }

Rational pow2_inv(std::uint64_t k) {
  Natural den;
  mpz_ui_pow_ui(den.get_mpz_t(), 2, k);
  return Rational(Natural(1), den);
}

double log2(const Natural& n) {
  if (n <= 0) return -HUGE_VAL;
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log2(mant) + static_cast<double>(exp);
}

double log2(const Rational& q) {
  if (q <= 0) return -HUGE_VAL;
  return log2(q.get_num()) - log2(q.get_den());
}

double to_double(const Rational& q) {
  if (q == 0) return 0.0;
  const double l = log2(abs(q));
  if (l > -1000.0 && l < 1000.0) return q.get_d();
  return (q < 0 ? -1.0 : 1.0) * std::exp2(l);
}

}  // namespace xrate
