#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <string_view>

namespace xrate {

/// Exact big-integer fraction, always kept in lowest terms.
using Rational = mpq_class;
/// Arbitrary-precision natural number.
using Natural = mpz_class;

/// num/den reduced. Throws InvalidInput when den == 0.
Rational make_rational(long num, long den = 1);
Rational make_rational(const Natural& num, const Natural& den);

/// Parses "num/den" or a bare integer. Rejects anything else.
Rational parse_rational(std::string_view text);

/// Always "num/den", including integers ("1/1").
std::string to_string(const Rational& q);
std::string to_string(const Natural& n);

/// 2^-k exactly.
Rational pow2_inv(std::uint64_t k);

/// log2 of a positive rational, accurate for numbers far outside double range.
double log2(const Rational& q);
double log2(const Natural& n);

double to_double(const Rational& q);

}  // namespace xrate
