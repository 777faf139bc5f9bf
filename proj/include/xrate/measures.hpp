#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/rational.hpp"

namespace xrate {

enum class MeasureKind { lebesgue, bernoulli, step_bernoulli, markov };

using Transition = std::array<std::array<Rational, 2>, 2>;

/// A computable measure on Cantor space with rational parameters.
///
/// Every supported kind is a finite-state source: a state summarises the
/// prefix read so far and fixes the conditional law of the next bit.
/// Lebesgue and Bernoulli have one state, Markov has {start, after 0,
/// after 1}, and an n-step Bernoulli measure has one state per proper
/// within-block prefix.
///
/// Bernoulli(p) puts mass p on the bit 1: μ(σ) = p^#1(σ) (1-p)^#0(σ).
class Measure {
 public:
  using State = std::uint32_t;

  static Measure lebesgue();
  static Measure bernoulli(const Rational& p);
  /// table[r] is the mass of the length-n block with lex rank r. Entries must
  /// be non-negative and sum to 1; zero entries are accepted but make the
  /// measure non-positive.
  static Measure step_bernoulli(std::size_t n, std::vector<Rational> table);
  /// Stationary chain: the initial law is solved exactly from the transition
  /// matrix, whose entries must all lie in (0,1).
  static Measure markov(const Transition& transition);

  MeasureKind kind() const noexcept { return kind_; }
  /// Canonical config string, accepted back by parse_measure.
  std::string config() const;

  const Rational& p() const { return p_; }
  /// Block length of the i.i.d. structure: 1 for Lebesgue/Bernoulli, n for
  /// step Bernoulli, nullopt for Markov chains.
  std::optional<std::size_t> step() const;
  const std::vector<Rational>& table() const noexcept { return table_; }
  const Transition& transition() const noexcept { return transition_; }
  const std::array<Rational, 2>& stationary() const noexcept { return stationary_; }

  /// μ(σ) > 0 for every σ.
  bool is_positive() const noexcept { return positive_; }

  State initial_state() const noexcept { return 0; }
  State advance(State s, bool bit) const noexcept { return next_[s][bit ? 1 : 0]; }
  /// μ(σb | σ) for any σ leading to state s (0 for unreachable states).
  const Rational& conditional(State s, bool bit) const noexcept { return cond_[s][bit ? 1 : 0]; }
  /// floor(μ(σ1|σ) · 2^64), saturating; used by the sampler.
  std::uint64_t one_threshold(State s) const noexcept { return threshold_[s]; }
  bool always_one(State s) const noexcept { return always_one_[s]; }
  std::size_t state_count() const noexcept { return cond_.size(); }

  /// Marginal mass of a within-block prefix (step Bernoulli only).
  const Rational& block_marginal(const BitString& rho) const;

  friend bool operator==(const Measure& a, const Measure& b) { return a.config() == b.config(); }

 private:
  Measure() = default;
  void finish();

  MeasureKind kind_ = MeasureKind::lebesgue;
  Rational p_;
  std::size_t n_ = 1;
  std::vector<Rational> table_;
  std::vector<Rational> marginal_;  // indexed by (2^len - 1 + rank), len <= n
  Transition transition_;
  std::array<Rational, 2> stationary_;

  std::vector<std::array<Rational, 2>> cond_;
  std::vector<std::array<State, 2>> next_;
  std::vector<std::uint64_t> threshold_;
  std::vector<bool> always_one_;
  bool positive_ = true;
};

/// Parses "lebesgue", "bernoulli:1/4", "markov:P00,P01;P10,P11",
/// "step:N:m_0,m_1,...,m_{2^N-1}", or a JSON record such as
/// {"kind":"bernoulli","p":"1/4"}.
Measure parse_measure(std::string_view config);

/// μ(σ), computed from the parameters directly (not via conditionals).
Rational cylinder_mass(const Measure& mu, const BitString& sigma);

/// (σ)_μ, built by incremental splitting of [0,1]. Requires μ positive.
RatInterval measure_interval(const Measure& mu, const BitString& sigma);

/// Mass of a pattern of fixed bits (0/1) and wildcards (-1).
Rational pattern_mass(const Measure& mu, const std::vector<int>& pattern);

/// Closed-form entropy rate in bits.
double entropy_rate(const Measure& mu);

/// −log2 μ(x↾n) / n.
double smb_entropy_estimate(const Measure& mu, BitStream& x, std::uint64_t n);

/// Largest δ with every conditional in [δ, 1−δ]; nullopt if one hits 0 or 1.
std::optional<Rational> positivity_delta(const Measure& mu);

/// Infinite stream of μ-distributed bits from a seeded mt19937_64.
BitStream measure_stream(const Measure& mu, std::uint64_t seed);

/// First n bits of measure_stream(mu, seed).
BitString sample(const Measure& mu, std::uint64_t seed, std::uint64_t n);

}  // namespace xrate
