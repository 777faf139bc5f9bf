#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "xrate/bundles.hpp"
#include "xrate/error.hpp"
#include "xrate/levinkautz.hpp"

using namespace xrate;

namespace {

/// Absolute interval bookkeeping with plain rationals: the interval of a
/// string is refined one bit at a time from the measure's conditionals.
struct PlainInterval {
  const Measure* mu;
  Measure::State state;
  Rational lo = 0;
  Rational hi = 1;

  explicit PlainInterval(const Measure& m) : mu(&m), state(m.initial_state()) {}

  void push(bool bit) {
    const Rational split = lo + (hi - lo) * mu->conditional(state, false);
    (bit ? lo : hi) = split;
    state = mu->advance(state, bit);
  }
  PlainInterval child(bool bit) const {
    PlainInterval c = *this;
    c.push(bit);
    return c;
  }
  bool contains(const PlainInterval& other) const { return lo <= other.lo && other.hi <= hi; }
};

/// max{k : (a↾n)_μ ⊆ (τ)_ν for some τ of length k}, searched from the root.
std::uint64_t g_from_scratch(const Measure& mu, const Measure& nu, const BitString& a, BitString& tau) {
  PlainInterval in(mu);
  for (std::size_t i = 0; i < a.size(); ++i) in.push(a[i]);
  PlainInterval out(nu);
  tau = BitString{};
  while (true) {
    const PlainInterval zero = out.child(false);
    const PlainInterval one = out.child(true);
    if (zero.contains(in)) {
      out = zero;
      tau.push_back(false);
    } else if (one.contains(in)) {
      out = one;
      tau.push_back(true);
    } else {
      return tau.size();
    }
  }
}

}  // namespace

TEST_CASE("hand-computed intervals for Bernoulli(P(0)=3/4) to Lebesgue") {
  LkState s(Measure::bernoulli(make_rational(1, 4)), Measure::lebesgue());
  s.step(false);
  s.step(false);
  CHECK(s.input_interval() == RatInterval{0, make_rational(9, 16)});
  CHECK(s.g() == 0);
  s.step(false);
  CHECK(s.input_interval() == RatInterval{0, make_rational(27, 64)});
  CHECK(s.g() == 1);
  CHECK(s.output().to_string() == "0");
  CHECK(s.output_interval() == RatInterval{0, make_rational(1, 2)});
}

TEST_CASE("identical measures copy the input") {
  for (const auto& b : bundled_measures()) {
    if (!b.measure.is_positive()) continue;
    const BitString a = sample(b.measure, 5, 300);
    const LkResult r = lk_run(b.measure, b.measure, a);
    CHECK(r.output == a);
    for (std::size_t n = 0; n < r.g_trace.size(); ++n) CHECK(r.g_trace[n] == n);
  }
}

TEST_CASE("g(n) equals its definition at random checkpoints") {
  std::mt19937_64 rng(77);
  for (const auto& pair : bundled_pairs()) {
    const BitString a = sample(pair.from, 19, 700);
    LkState s(pair.from, pair.to);
    std::vector<std::size_t> checkpoints;
    for (int i = 0; i < 100; ++i) checkpoints.push_back(1 + rng() % a.size());
    std::sort(checkpoints.begin(), checkpoints.end());
    std::size_t next = 0;
    for (std::size_t n = 1; n <= a.size(); ++n) {
      s.step(a[n - 1]);
      while (next < checkpoints.size() && checkpoints[next] == n) {
        BitString tau;
        CHECK(g_from_scratch(pair.from, pair.to, a.prefix(n), tau) == s.g());
        CHECK(tau == s.output());
        ++next;
      }
    }
  }
}

TEST_CASE("state invariants along a run") {
  for (const auto& pair : bundled_pairs()) {
    const BitString a = sample(pair.from, 2, 400);
    LkState s(pair.from, pair.to);
    for (std::size_t n = 1; n <= a.size(); ++n) {
      s.step(a[n - 1]);
      CHECK(s.contained());
      if (n % 40 == 0) {
        CHECK(s.output_interval().contains(s.input_interval()));
        CHECK(s.input_mass() == cylinder_mass(pair.from, s.input()));
        CHECK(s.output_mass() == cylinder_mass(pair.to, s.output()));
        CHECK(s.input_interval().width() == s.input_mass());
      }
    }
    const auto& g = s.g_trace();
    CHECK(g.size() == a.size() + 1);
    CHECK(std::is_sorted(g.begin(), g.end()));
  }
}

TEST_CASE("lk_step is pure") {
  const LkState s(Measure::bernoulli(make_rational(1, 4)), Measure::lebesgue());
  const LkState t = lk_step(lk_step(lk_step(s, false), false), false);
  CHECK(s.n() == 0);
  CHECK(t.n() == 3);
  CHECK(t.g() == 1);
}

TEST_CASE("conversion targets, stalls and traces") {
  const Measure b = Measure::bernoulli(make_rational(1, 4));
  const Measure lambda = Measure::lebesgue();
  BitStream x = measure_stream(b, 1);
  const LkResult r = lk_convert(b, lambda, x, 200, 10000);
  CHECK(r.output.size() == 200);
  CHECK(r.g_trace.back() >= 200);
  CHECK(r.checkpoints.back().n == r.consumed);
  for (const auto& c : r.checkpoints) CHECK(c.mu_mass <= c.nu_mass);

  BitStream y = measure_stream(b, 1);
  try {
    lk_convert(b, lambda, y, 100, 10);
    FAIL("expected a stall");
  } catch (const ConversionStalled& e) {
    CHECK(e.partial.consumed == 10);
    CHECK(e.partial.output.size() < 100);
    CHECK(std::string(e.what()).find("conversion stalled") != std::string::npos);
  }
  // The μ-code of 1/2 sits on the first λ boundary forever.
  PlainInterval half(b);
  BitString code;
  for (int i = 0; i < 200; ++i) {
    const PlainInterval zero = half.child(false);
    REQUIRE(zero.hi != make_rational(1, 2));
    const bool bit = zero.hi < make_rational(1, 2);
    half.push(bit);
    code.push_back(bit);
  }
  BitStream boundary = BitStream::from_bits(code);
  CHECK_THROWS_AS(lk_convert(b, lambda, boundary, 1, 1000), ConversionStalled);
  CHECK_THROWS_AS(LkState(b, Measure::step_bernoulli(2, {0, make_rational(1, 2), make_rational(1, 4), make_rational(1, 4)})),
                  InvalidInput);
}

TEST_CASE("Kautz bounds") {
  for (const auto& pair : bundled_pairs()) {
    BitStream x = measure_stream(pair.from, 4);
    const KautzReport k = kautz_check(pair.from, pair.to, x, 2000);
    CHECK(k.violations == 0);
    CHECK(k.witnesses >= 1);
    CHECK_FALSE(k.warning);
  }
  BitStream x = measure_stream(Measure::lebesgue(), 1);
  const KautzReport same = kautz_check(Measure::lebesgue(), Measure::lebesgue(), x, 500);
  CHECK(same.witnesses == 500);
  CHECK(same.delta == make_rational(1, 2));
}

TEST_CASE("round trips recover the input") {
  for (const auto& pair : bundled_pairs()) {
    BitStream x = measure_stream(pair.from, 8);
    const RoundTrip rt = lk_roundtrip(pair.from, pair.to, x, 500, 3000, 3000);
    CHECK(rt.agreement >= 500);
    CHECK(rt.agreement <= 3000);
  }
  BitStream x = measure_stream(Measure::lebesgue(), 8);
  CHECK_THROWS_AS(lk_roundtrip(Measure::lebesgue(), bundled_markov(), x, 500, 100, 100), ContractViolation);
}

TEST_CASE("rate traces") {
  const Measure b = Measure::bernoulli(make_rational(1, 4));
  BitStream x = measure_stream(b, 1);
  LkRateOptions opt;
  opt.mc_samples = 20;
  opt.mc_limit = 256;
  const RateReport r = lk_rate(b, Measure::lebesgue(), x, 20000, opt);
  REQUIRE(r.theoretical.has_value());
  CHECK(*r.theoretical == doctest::Approx(0.811278).epsilon(1e-5));
  CHECK(r.schedule.back() == 20000);
  CHECK(r.oi_trace.size() == r.schedule.size());
  CHECK(std::abs(to_double(r.oi_trace.back().value) - *r.theoretical) < 0.03);
  CHECK(r.avg_by_n.size() == 9);
  CHECK(geometric_schedule(5) == std::vector<std::uint64_t>{1, 2, 4, 5});
}
