#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "xrate/bundles.hpp"
#include "xrate/ergodic.hpp"
#include "xrate/error.hpp"

using namespace xrate;

namespace {

oracle::Source step2_source() {
  oracle::Source s;
  s.kind = oracle::Source::step;
  s.n = 2;
  s.table = {make_rational(1, 8), make_rational(3, 8), make_rational(1, 4), make_rational(1, 4)};
  return s;
}

oracle::Source bernoulli_source(const Rational& p) {
  oracle::Source s;
  s.kind = oracle::Source::bernoulli;
  s.p = p;
  return s;
}

/// Mass of {x : x↾|τ| = τ, x[start..start+|σ|) = σ} by summing over all
/// strings of the covering length.
Rational shifted_overlap(const oracle::Source& src, const BitString& sigma, const BitString& tau, std::size_t start) {
  const std::size_t len = std::max(tau.size(), start + sigma.size());
  Rational total = 0;
  for (const auto& x : oracle::strings(len)) {
    if (!tau.is_prefix_of(x)) continue;
    if (x.slice(start, start + sigma.size()) != sigma) continue;
    total += oracle::mass(src, x);
  }
  return total;
}

/// All concatenations of i terminal strings.
std::vector<BitString> block_words(const std::vector<BitString>& terminals, std::size_t i) {
  std::vector<BitString> words{BitString{}};
  for (std::size_t k = 0; k < i; ++k) {
    std::vector<BitString> next;
    for (const auto& w : words) {
      for (const auto& t : terminals) next.push_back(w.concat(t));
    }
    words = std::move(next);
  }
  return words;
}

/// μ(T^{-i}⟦σ⟧ ∩ ⟦τ⟧) for a tree-shift: the preimage is the disjoint union of
/// the cylinders wσ over words w of i blocks.
Rational tree_overlap(const oracle::Source& src, const std::vector<BitString>& terminals, const BitString& sigma,
                      const BitString& tau, std::size_t i) {
  Rational total = 0;
  for (const auto& w : block_words(terminals, i)) {
    const BitString ws = w.concat(sigma);
    if (ws.is_prefix_of(tau)) {
      total += oracle::mass(src, tau);
    } else if (tau.is_prefix_of(ws)) {
      total += oracle::mass(src, ws);
    }
  }
  return total;
}

std::vector<BitString> terminal_strings(const DdgTree& t) {
  std::vector<BitString> out;
  for (const auto& [s, label] : t.terminals()) out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("n-shift mixing matches enumeration") {
  std::mt19937_64 rng(21);
  const oracle::Source lambda_src;
  const oracle::Source step_src = step2_source();
  const oracle::Source bern_src = bernoulli_source(make_rational(3, 10));
  struct Case {
    const oracle::Source* src;
    Measure mu;
    std::size_t n;
  };
  const std::vector<Case> cases = {{&lambda_src, Measure::lebesgue(), 1},
                                   {&step_src, bundled_step2(), 2},
                                   {&bern_src, Measure::bernoulli(make_rational(3, 10)), 3}};
  for (const auto& c : cases) {
    const ShiftSpec shift = ShiftSpec::n_shift(c.n);
    for (int trial = 0; trial < 25; ++trial) {
      const BitString sigma = oracle::random_string(rng, 1 + rng() % 4);
      const BitString tau = oracle::random_string(rng, 1 + rng() % 4);
      const auto seq = mixing_average(shift, c.mu, sigma, tau, 4);
      REQUIRE(seq.size() == 5);
      for (std::size_t i = 0; i <= 4; ++i) CHECK(seq[i] == shifted_overlap(*c.src, sigma, tau, i * c.n));
      const Rational product = oracle::mass(*c.src, sigma) * oracle::mass(*c.src, tau);
      for (std::size_t i = mixing_threshold(shift, tau); i <= 4; ++i) CHECK(seq[i] == product);
    }
  }
}

TEST_CASE("2-shift on the step measure factorizes once the blocks separate") {
  const Measure mu = bundled_step2();
  const ShiftSpec shift = ShiftSpec::n_shift(2);
  const BitString s = BitString::parse("01");
  const auto seq = mixing_average(shift, mu, s, s, 5);
  CHECK(seq[0] == make_rational(3, 8));
  for (std::size_t i = 1; i <= 5; ++i) CHECK(seq[i] == make_rational(9, 64));
  CHECK(mixing_threshold(shift, BitString::parse("01011")) == 3);
}

TEST_CASE("tree-shift mixing matches enumeration") {
  const DdgTree tree = bundled_three_leaf_tree();
  const ShiftSpec shift = ShiftSpec::tree_shift(tree);
  const auto terms = terminal_strings(tree);
  const oracle::Source lambda_src;
  const oracle::Source bern_src = bernoulli_source(make_rational(1, 4));
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    const BitString sigma = oracle::random_string(rng, 1 + rng() % 4);
    const BitString tau = oracle::random_string(rng, 1 + rng() % 5);
    const auto seq = mixing_average(shift, Measure::lebesgue(), sigma, tau, 5);
    for (std::size_t i = 0; i <= 5; ++i) CHECK(seq[i] == tree_overlap(lambda_src, terms, sigma, tau, i));
    const Rational product = oracle::mass(lambda_src, sigma) * oracle::mass(lambda_src, tau);
    for (std::size_t i = mixing_threshold(shift, tau); i <= 5; ++i) CHECK(seq[i] == product);
    const auto b = mixing_average(shift, Measure::bernoulli(make_rational(1, 4)), sigma, tau, 3);
    for (std::size_t i = 0; i <= 3; ++i) CHECK(b[i] == tree_overlap(bern_src, terms, sigma, tau, i));
  }
}

TEST_CASE("one tree-shift step does not yet mix") {
  const ShiftSpec shift = ShiftSpec::tree_shift(bundled_three_leaf_tree());
  const auto seq = mixing_average(shift, Measure::lebesgue(), BitString::parse("0"), BitString::parse("111"), 3);
  CHECK(seq[1] == 0);
  CHECK(seq[3] == make_rational(1, 16));
  CHECK(mixing_threshold(shift, BitString::parse("111")) == 3);
}

TEST_CASE("infeasible expansions are refused") {
  const ShiftSpec shift = ShiftSpec::n_shift(1);
  const BitString long_string = BitString(std::vector<std::uint8_t>(7, 1));
  CHECK_THROWS_WITH_AS(mixing_average(shift, Measure::lebesgue(), long_string, long_string, 2),
                       doctest::Contains("infeasible"), InvalidInput);
  CHECK_THROWS_AS(mixing_average(shift, Measure::lebesgue(), BitString{1}, BitString{1}, kMaxMixingSteps + 1),
                  InvalidInput);
  const ShiftSpec ky = ShiftSpec::tree_shift(knuth_yao({make_rational(2, 3), make_rational(1, 3)}));
  CHECK_THROWS_AS(mixing_average(ky, Measure::lebesgue(), BitString{1}, BitString{1}, 2), InvalidInput);
  CHECK_THROWS_AS(ShiftSpec::n_shift(0), InvalidInput);
}

TEST_CASE("Birkhoff averages") {
  const Measure lambda = Measure::lebesgue();
  BitStream x = measure_stream(lambda, 1);
  CHECK(birkhoff_average(ShiftSpec::n_shift(1), constant_observable(0.375), x, 1000) == 0.375);

  const Measure b = Measure::bernoulli(make_rational(1, 4));
  const Observable vn = block_oi_observable(von_neumann());
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    BitStream y = measure_stream(b, seed);
    CHECK(std::abs(birkhoff_average(ShiftSpec::n_shift(2), vn, y, 100000) - 3.0 / 16) < 0.01);
  }

  const DdgTree tree = bundled_three_leaf_tree();
  BitStream z = measure_stream(lambda, 4);
  const double len = birkhoff_average(ShiftSpec::tree_shift(tree), block_length_observable(tree), z, 100000);
  CHECK(len == doctest::Approx(1.5).epsilon(0.01));

  Observable loud{"loud", [](const BitStream&) { return 1.0; }, 0.5, 0};
  CHECK_THROWS_AS(birkhoff_average(ShiftSpec::n_shift(1), loud, x, 10), ContractViolation);
  CHECK_THROWS_AS(birkhoff_average(ShiftSpec::n_shift(1), loud, x, 0), InvalidInput);
}
