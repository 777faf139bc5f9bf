#pragma once

// Independent reference computations used by the tests. Nothing here calls
// the library's interval, mass or conversion code; only the plain data
// types (BitString, Rational) are shared.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/rational.hpp"

namespace oracle {

using xrate::BitString;
using xrate::Rational;

/// Parameters of a measure, restated without the library's Measure type.
struct Source {
  enum Kind { lebesgue, bernoulli, step, markov } kind = lebesgue;
  Rational p;                  // P(bit 1) for Bernoulli
  std::size_t n = 1;           // block length for step
  std::vector<Rational> table; // block masses by lex rank
  Rational t[2][2];            // Markov transitions P(j | i)
};

inline Rational power(const Rational& base, std::size_t e) {
  Rational out = 1;
  for (std::size_t i = 0; i < e; ++i) out *= base;
  return out;
}

/// μ(σ) straight from the definition.
inline Rational mass(const Source& s, const BitString& sigma) {
  switch (s.kind) {
    case Source::lebesgue:
      return Rational(1, 1) / power(Rational(2), sigma.size());
    case Source::bernoulli: {
      const std::size_t ones = sigma.count_ones();
      return power(s.p, ones) * power(1 - s.p, sigma.size() - ones);
    }
    case Source::step: {
      Rational out = 1;
      const std::size_t full = sigma.size() / s.n;
      for (std::size_t b = 0; b < full; ++b) {
        std::size_t r = 0;
        for (std::size_t i = 0; i < s.n; ++i) r = 2 * r + (sigma[b * s.n + i] ? 1 : 0);
        out *= s.table[r];
      }
      const std::size_t rest = sigma.size() - full * s.n;
      if (rest > 0) {
        // Marginal of a partial block: sum the table over completions.
        Rational part = 0;
        for (std::size_t r = 0; r < s.table.size(); ++r) {
          bool match = true;
          for (std::size_t i = 0; i < rest; ++i) {
            const bool bit = ((r >> (s.n - 1 - i)) & 1U) != 0;
            match = match && bit == sigma[full * s.n + i];
          }
          if (match) part += s.table[r];
        }
        out *= part;
      }
      return out;
    }
    case Source::markov: {
      if (sigma.empty()) return 1;
      const Rational pi0 = s.t[1][0] / (s.t[0][1] + s.t[1][0]);
      Rational out = sigma[0] ? 1 - pi0 : pi0;
      for (std::size_t i = 1; i < sigma.size(); ++i) out *= s.t[sigma[i - 1] ? 1 : 0][sigma[i] ? 1 : 0];
      return out;
    }
  }
  return 0;
}

/// All strings of length n in lexicographic order.
inline std::vector<BitString> strings(std::size_t n) {
  std::vector<BitString> out;
  for (std::uint64_t r = 0; r < (std::uint64_t{1} << n); ++r) {
    BitString s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(((r >> (n - 1 - i)) & 1U) != 0);
    out.push_back(s);
  }
  return out;
}

/// Left end of (σ)_μ as the literal sum over same-length strings before σ.
inline Rational interval_left_literal(const Source& s, const BitString& sigma) {
  Rational left = 0;
  for (const auto& tau : strings(sigma.size())) {
    if (tau == sigma) break;
    left += mass(s, tau);
  }
  return left;
}

/// Absolute interval of σ by plain rational splitting, for long strings.
inline std::pair<Rational, Rational> interval_by_split(const Source& s, const BitString& sigma) {
  Rational lo = 0;
  BitString prefix;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const Rational m0 = mass(s, prefix.with(false));
    if (sigma[i]) lo += m0;
    prefix.push_back(sigma[i]);
  }
  return {lo, lo + mass(s, sigma)};
}

/// Binary digit i (i ≥ 1) of a rational in [0,1).
inline bool binary_digit(const Rational& q, std::size_t i) {
  Rational scaled = q * power(Rational(2), i);
  xrate::Natural whole = scaled.get_num() / scaled.get_den();
  return mpz_odd_p(whole.get_mpz_t()) != 0;
}

/// Shannon entropy of a two-point law in bits.
inline double h2(double p) { return p <= 0 || p >= 1 ? 0.0 : -(p * std::log2(p) + (1 - p) * std::log2(1 - p)); }

inline BitString random_string(std::mt19937_64& rng, std::size_t n) {
  BitString s;
  for (std::size_t i = 0; i < n; ++i) s.push_back((rng() & 1U) != 0);
  return s;
}

/// Rational in (0,1) with denominator ≤ max_den.
inline Rational random_probability(std::mt19937_64& rng, long max_den = 20) {
  const long den = 2 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_den - 1));
  const long num = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(den - 1));
  return xrate::make_rational(num, den);
}

/// Positive table of 2^n block masses summing to 1.
inline std::vector<Rational> random_table(std::mt19937_64& rng, std::size_t n) {
  const std::size_t k = std::size_t{1} << n;
  std::vector<long> weights(k);
  long total = 0;
  for (auto& w : weights) {
    w = 1 + static_cast<long>(rng() % 9);
    total += w;
  }
  std::vector<Rational> out;
  for (const auto w : weights) out.push_back(xrate::make_rational(w, total));
  return out;
}

}  // namespace oracle
