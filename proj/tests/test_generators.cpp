#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "xrate/blockmap.hpp"
#include "xrate/bundles.hpp"
#include "xrate/error.hpp"
#include "xrate/generators.hpp"

using namespace xrate;

namespace {

oracle::Source bernoulli_source(const Rational& p) {
  oracle::Source s;
  s.kind = oracle::Source::bernoulli;
  s.p = p;
  return s;
}

/// Σ μ(σ)|f(σ)| over all σ of length n, with masses from the oracle.
Rational brute_expected_length(const StringMap& f, const oracle::Source& src, std::size_t n) {
  Rational total = 0;
  for (const auto& s : oracle::strings(n)) total += oracle::mass(src, s) * static_cast<unsigned long>(f(s).size());
  return total;
}

/// Emits von Neumann output one pair late: the pair is only decoded once a
/// further bit has arrived. Monotone, but not canonical.
Generator lagging_vn() {
  Generator g;
  g.name = "lagging-vn";
  g.eval = [](const BitString& s) {
    BitString out;
    for (std::size_t i = 0; i + 2 < s.size(); i += 2) {
      if (s[i] != s[i + 1]) out.push_back(s[i + 1]);
    }
    return out;
  };
  return g;
}

}  // namespace

TEST_CASE("expected output length matches brute force") {
  const Generator vn = von_neumann().generator();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    const Rational p = oracle::random_probability(rng);
    const auto src = bernoulli_source(p);
    const Measure mu = Measure::bernoulli(p);
    for (std::size_t n = 1; n <= 10; ++n) {
      CHECK(expected_output_length(vn.eval, mu, n) == brute_expected_length(vn.eval, src, n));
      CHECK(expected_output_length(lagging_vn().eval, mu, n) == brute_expected_length(lagging_vn().eval, src, n));
    }
  }
  CHECK_THROWS_WITH_AS(expected_output_length(vn.eval, Measure::lebesgue(), 25),
                       doctest::Contains("exhaustive enumeration refused"), InvalidInput);
}

TEST_CASE("von Neumann Avg is p(1-p) at even n") {
  const Generator vn = von_neumann().generator();
  for (const auto& p : {make_rational(1, 2), make_rational(3, 10), make_rational(1, 4)}) {
    const Measure mu = Measure::bernoulli(p);
    for (std::size_t n = 2; n <= 12; n += 2) CHECK(avg_oi(vn, mu, n) == p * (1 - p));
  }
  // Four tosses on average per output bit for a fair coin.
  CHECK(avg_oi(vn, Measure::bernoulli(make_rational(1, 2)), 2) == make_rational(1, 4));
}

TEST_CASE("identity, duplication and the alpha functional") {
  const Generator id = identity_generator();
  const Generator dup = duplication_generator();
  const BitString s = BitString::parse("1011");
  CHECK(id(s) == s);
  CHECK(dup(s).to_string() == "11001111");
  CHECK(avg_oi(id, Measure::bernoulli(make_rational(1, 3)), 7) == 1);
  CHECK(avg_oi(dup, Measure::lebesgue(), 30) == 2);
  const Generator tri = alpha_functional([](std::uint64_t i) { return i % 3 + 1; }, "tri");
  for (std::uint64_t n = 0; n <= 20; ++n) {
    CHECK(tri(BitString(std::vector<std::uint8_t>(n, 1))).size() == tri.length_law(n));
  }
}

TEST_CASE("oscillating example: Avg = beta(n)/n") {
  const Generator g = oscillating_generator();
  CHECK(oscillating_beta(0) == 1);
  CHECK(oscillating_beta(1) == 2);
  CHECK(oscillating_beta(5) == 9);
  for (std::uint64_t n = 1; n <= 40; ++n) {
    const BitString x = BitString(std::vector<std::uint8_t>(n, 0));
    CHECK(g(x).size() == oscillating_beta(n));
  }
  for (std::uint64_t k = 0; k <= 16; ++k) CHECK(avg_oi(g, Measure::lebesgue(), std::uint64_t{1} << k) == 2);
  // Just below a power of two the ratio is (3·2^k − 1)/(2^{k+1} − 1).
  CHECK(avg_oi(g, Measure::lebesgue(), 65535) == make_rational(98303, 65535));
}

TEST_CASE("use function is the least sufficient prefix") {
  const Generator vn = von_neumann().generator();
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const BitString bits = oracle::random_string(rng, 400);
    BitStream x = BitStream::from_bits(bits);
    for (std::uint64_t n : {1, 3, 10, 40}) {
      std::uint64_t want = 0;
      while (want <= bits.size() && vn(bits.prefix(want)).size() < n) ++want;
      if (want > bits.size()) {
        CHECK_THROWS_AS(use_function(vn, x, n, 1000), OutputStalled);
      } else {
        CHECK(use_function(vn, x, n, 1000) == want);
      }
    }
  }
  BitStream zeros = BitStream::from_bits(BitString(std::vector<std::uint8_t>(64, 0)));
  CHECK_THROWS_AS(use_function(vn, zeros, 1, 32), OutputStalled);
}

TEST_CASE("OI ratio") {
  const Generator vn = von_neumann().generator();
  CHECK(oi_ratio(vn, BitString::parse("0110")) == make_rational(1, 2));
  CHECK_THROWS_AS(oi_ratio(vn, BitString{}), InvalidInput);
}

TEST_CASE("rate reports") {
  const Generator vn = von_neumann().generator("vn");
  const Measure mu = Measure::bernoulli(make_rational(1, 4));
  BitStream x = measure_stream(mu, 3);
  RateOptions opt;
  opt.mc_samples = 200;
  const RateReport r = rate_report(vn, mu, {2, 4, 8, 16, 64, 256}, &x, opt);
  REQUIRE(r.avg_by_n.size() == 6);
  CHECK(*r.avg_by_n[0].exact == make_rational(3, 16));
  CHECK_FALSE(r.avg_by_n[4].exact.has_value());
  CHECK(r.avg_by_n[4].samples == 200);
  CHECK(r.oi_trace.size() == 6);
  CHECK(r.seed == 1U);
  CHECK(r.limsup_est >= r.liminf_est);
  CHECK_THROWS_AS(rate_report(vn, mu, {4, 2}), InvalidInput);
  CHECK_THROWS_AS(rate_report(vn, mu, {}), InvalidInput);

  // The oscillating example keeps its whole trace.
  std::vector<std::uint64_t> schedule;
  for (std::uint64_t n = 1; n <= 1024; ++n) schedule.push_back(n);
  const RateReport osc = rate_report(oscillating_generator(), Measure::lebesgue(), schedule);
  CHECK(osc.avg_by_n.size() == 1024);
  CHECK(osc.limsup_est == 2.0);
  CHECK(osc.liminf_est == doctest::Approx(1535.0 / 1023.0));
}

TEST_CASE("Monte-Carlo Avg is seeded and close to the exact rate") {
  const Generator vn = von_neumann().generator();
  const Measure mu = Measure::bernoulli(make_rational(1, 4));
  const double a = monte_carlo_avg(vn.eval, mu, 1000, 400, 9);
  CHECK(a == monte_carlo_avg(vn.eval, mu, 1000, 400, 9));
  CHECK(a == doctest::Approx(3.0 / 16).epsilon(0.05));
}

TEST_CASE("bounded OI ratios: Avg converges to the pointwise rate") {
  // OI ≤ 1 for von Neumann and identity, ≤ 2 for duplication; the sampled
  // pointwise ratio at large n and the averaged rate agree.
  const Measure mu = Measure::bernoulli(make_rational(3, 10));
  struct Case {
    Generator g;
    double rate;
  };
  for (const auto& c : {Case{von_neumann().generator(), 0.21}, Case{identity_generator(), 1.0},
                        Case{duplication_generator(), 2.0}}) {
    CHECK(to_double(oi_ratio(c.g, sample(mu, 4, 100000))) == doctest::Approx(c.rate).epsilon(0.02));
    CHECK(monte_carlo_avg(c.g.eval, mu, 2000, 200, 4) == doctest::Approx(c.rate).epsilon(0.02));
  }
}

TEST_CASE("use function and OI agree in the limit") {
  // n / u(X, n) and OI(X↾u(X, n)) describe the same limit.
  const Generator vn = von_neumann().generator();
  BitStream x = measure_stream(Measure::bernoulli(make_rational(1, 4)), 12);
  const std::uint64_t n = 10000;
  const std::uint64_t u = use_function(vn, x, n, 1000000);
  const double ratio = static_cast<double>(n) / static_cast<double>(u);
  CHECK(std::abs(ratio - to_double(oi_ratio(vn, x.prefix(u)))) < 1e-3);
}

TEST_CASE("canonical generators") {
  // Duplication that holds back its last output pair until one more bit arrives.
  Generator lagging;
  lagging.name = "lagging-dup";
  lagging.eval = [](const BitString& s) {
    BitString out;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
      out.push_back(s[i]);
      out.push_back(s[i]);
    }
    return out;
  };
  const Generator canon = canonicalize(lagging, 6);
  CHECK(canon.certificate == std::optional<std::string>("lcp-stable-strict-extension"));
  const Generator dup = duplication_generator();
  for (std::size_t n = 0; n <= 8; ++n) {
    for (const auto& s : oracle::strings(n)) CHECK(canon(s) == dup(s));
  }
  // Canonical output is never shorter than the generator's own output.
  CHECK(canon(BitString::parse("10")).to_string() == "1100");
  CHECK(lagging(BitString::parse("10")).to_string() == "11");
  // A generator that never emits cannot be certified.
  Generator silent;
  silent.name = "silent";
  silent.eval = [](const BitString&) { return BitString{}; };
  CHECK_THROWS_AS(canonicalize(silent, 4)(BitString::parse("01")), CanonicalizationError);
}
