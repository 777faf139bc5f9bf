#include "xrate/levinkautz.hpp"

#include <algorithm>
#include <cassert>
#include <climits>

namespace xrate {

namespace {

void require_positive(const Measure& m, const char* role) {
  if (!m.is_positive()) throw InvalidInput(std::string(role) + " measure " + m.config() + " is not positive");
}

std::size_t twos(const Natural& v) {
  return v == 0 ? SIZE_MAX : mpz_scan1(v.get_mpz_t(), 0);
}

}  // namespace

LkState::LkState(Measure mu, Measure nu)
    : mu_(std::move(mu)),
      nu_(std::move(nu)),
      mu_state_(mu_.initial_state()),
      nu_state_(nu_.initial_state()),
      lo_(0),
      hi_(1),
      width_(1),
      den_(1),
      g_{0} {
  require_positive(mu_, "input");
  require_positive(nu_, "output");
}

void LkState::step(bool bit) {
  // Split the input interval at μ(σ0|σ).
  const Rational& p0 = mu_.conditional(mu_state_, false);
  const Natural& a = p0.get_num();
  const Natural& b = p0.get_den();
  if (bit) {
    lo_ = lo_ * b + (hi_ - lo_) * a;
    hi_ *= b;
  } else {
    hi_ = lo_ * b + (hi_ - lo_) * a;
    lo_ *= b;
  }
  width_ *= b;
  den_ *= b;
  mu_state_ = mu_.advance(mu_state_, bit);
  input_.push_back(bit);

  Natural cut;
  Natural lo_d;
  Natural hi_d;
  while (true) {
    const Rational& q0 = nu_.conditional(nu_state_, false);
    const Natural& c = q0.get_num();
    const Natural& d = q0.get_den();
    cut = width_ * c;
    hi_d = hi_ * d;
    if (hi_d <= cut) {
      lo_ *= d;
      hi_.swap(hi_d);
      width_.swap(cut);
      den_ *= d;
      output_.push_back(false);
      nu_state_ = nu_.advance(nu_state_, false);
      continue;
    }
    lo_d = lo_ * d;
    if (lo_d >= cut) {
      lo_ = lo_d - cut;
      hi_ = hi_d - cut;
      width_ = width_ * d - cut;
      den_ *= d;
      output_.push_back(true);
      nu_state_ = nu_.advance(nu_state_, true);
      continue;
    }
    break;
  }

  const std::size_t k = std::min({twos(lo_), twos(hi_), twos(width_), twos(den_)});
  if (k > 0 && k != SIZE_MAX) {
    mpz_tdiv_q_2exp(lo_.get_mpz_t(), lo_.get_mpz_t(), k);
    mpz_tdiv_q_2exp(hi_.get_mpz_t(), hi_.get_mpz_t(), k);
    mpz_tdiv_q_2exp(width_.get_mpz_t(), width_.get_mpz_t(), k);
    mpz_tdiv_q_2exp(den_.get_mpz_t(), den_.get_mpz_t(), k);
  }
  g_.push_back(output_.size());
  assert(contained());
}

RatInterval LkState::input_interval() const { return measure_interval(mu_, input_); }
RatInterval LkState::output_interval() const { return measure_interval(nu_, output_); }

Rational LkState::input_mass() const {
  Rational q(hi_ - lo_, den_);
  q.canonicalize();
  return q;
}

Rational LkState::output_mass() const {
  Rational q(width_, den_);
  q.canonicalize();
  return q;
}

bool LkState::contained() const { return lo_ >= 0 && lo_ < hi_ && hi_ <= width_; }

LkState lk_step(LkState state, bool bit) {
  state.step(bit);
  return state;
}

// ---------------------------------------------------------------------------

namespace {

bool is_checkpoint(std::uint64_t n) { return (n & (n - 1)) == 0; }

LkCheckpoint checkpoint(const LkState& s) {
  if (!s.contained()) {
    throw ContractViolation("containment lost at n=" + std::to_string(s.n()));
  }
  return {s.n(), s.g(), s.input_mass(), s.output_mass()};
}

LkResult finish(LkState& s) {
  LkResult r;
  r.consumed = s.n();
  r.output = s.output();
  r.g_trace = s.g_trace();
  return r;
}

}  // namespace

ConversionStalled::ConversionStalled(LkResult partial_, std::string what)
    : ContractViolation(std::move(what)), partial(std::move(partial_)) {}

LkResult lk_convert(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t out_len,
                    std::uint64_t input_cap) {
  if (out_len == 0 || input_cap == 0) throw InvalidInput("conversion needs positive output length and cap");
  LkState s(mu, nu);
  std::vector<LkCheckpoint> checkpoints;
  while (s.g() < out_len) {
    if (s.n() >= input_cap) {
      if (checkpoints.empty() || checkpoints.back().n != s.n()) checkpoints.push_back(checkpoint(s));
      LkResult partial = finish(s);
      partial.checkpoints = std::move(checkpoints);
      throw ConversionStalled(std::move(partial), "conversion stalled: " + std::to_string(s.g()) + " of " +
                                                      std::to_string(out_len) + " output bits after cap " +
                                                      std::to_string(input_cap) + " input bits");
    }
    const auto bit = a.next();
    if (!bit) {
      LkResult partial = finish(s);
      partial.checkpoints = std::move(checkpoints);
      throw ConversionStalled(std::move(partial), "conversion stalled: input ended after " +
                                                      std::to_string(s.n()) + " bits with " +
                                                      std::to_string(s.g()) + " output bits");
    }
    s.step(*bit);
    if (is_checkpoint(s.n())) checkpoints.push_back(checkpoint(s));
  }
  if (checkpoints.empty() || checkpoints.back().n != s.n()) checkpoints.push_back(checkpoint(s));
  LkResult r = finish(s);
  r.output.truncate(out_len);
  r.checkpoints = std::move(checkpoints);
  return r;
}

LkResult lk_run(const Measure& mu, const Measure& nu, const BitString& input) {
  LkState s(mu, nu);
  std::vector<LkCheckpoint> checkpoints;
  for (std::size_t i = 0; i < input.size(); ++i) {
    s.step(input[i]);
    if (is_checkpoint(s.n())) checkpoints.push_back(checkpoint(s));
  }
  if (s.n() > 0 && (checkpoints.empty() || checkpoints.back().n != s.n())) checkpoints.push_back(checkpoint(s));
  LkResult r = finish(s);
  r.checkpoints = std::move(checkpoints);
  return r;
}

// ---------------------------------------------------------------------------

KautzViolation::KautzViolation(KautzReport report_, std::string what)
    : ContractViolation(std::move(what)), report(std::move(report_)) {}

KautzReport kautz_check(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t horizon) {
  const auto dmu = positivity_delta(mu);
  const auto dnu = positivity_delta(nu);
  if (!dmu || !dnu) throw InvalidInput("Kautz check needs strongly positive measures");
  KautzReport report;
  report.horizon = horizon;
  report.delta = std::min(*dmu, *dnu);
  const Rational delta_sq = report.delta * report.delta;

  LkState s(mu, nu);
  Measure::State ms = mu.initial_state();
  Measure::State ns = nu.initial_state();
  Rational mu_mass = 1;
  Rational nu_mass = 1;
  std::uint64_t gap = 0;
  for (std::uint64_t n = 1; n <= horizon; ++n) {
    const auto bit = a.next();
    if (!bit) throw ContractViolation("Kautz check: input ended at n=" + std::to_string(n));
    const std::uint64_t before = s.g();
    s.step(*bit);
    mu_mass *= mu.conditional(ms, *bit);
    ms = mu.advance(ms, *bit);
    for (std::uint64_t k = before; k < s.g(); ++k) {
      const bool b = s.output()[k];
      nu_mass *= nu.conditional(ns, b);
      ns = nu.advance(ns, b);
    }
    if (mu_mass > nu_mass) {
      ++report.violations;
      if (!report.first_violation) report.first_violation = n;
    }
    if (delta_sq * nu_mass <= mu_mass) {
      ++report.witnesses;
      gap = 0;
    } else {
      report.largest_witness_gap = std::max(report.largest_witness_gap, ++gap);
    }
  }
  report.warning = report.witnesses == 0;
  if (report.violations > 0) {
    const auto first = *report.first_violation;
    throw KautzViolation(std::move(report), "Kautz bound (i) violated first at n=" + std::to_string(first));
  }
  return report;
}

RoundTrip lk_roundtrip(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t n,
                       std::uint64_t forward_cap, std::uint64_t backward_cap) {
  const BitString input = a.prefix(forward_cap);
  if (input.size() < forward_cap) {
    throw ConversionStalled(LkResult{}, "round trip: input ended after " + std::to_string(input.size()) + " bits");
  }
  const LkResult forward = lk_run(mu, nu, input);
  BitString middle = forward.output;
  if (middle.size() > backward_cap) middle.truncate(backward_cap);
  const LkResult backward = lk_run(nu, mu, middle);
  RoundTrip rt;
  rt.forward_bits = forward.output.size();
  rt.backward_bits = backward.output.size();
  rt.agreement = common_prefix_length(backward.output, input);
  if (rt.agreement < n) {
    throw ContractViolation("round trip agreement " + std::to_string(rt.agreement) + " below " +
                            std::to_string(n) + " (forward " + std::to_string(rt.forward_bits) +
                            " bits, backward " + std::to_string(rt.backward_bits) + " bits)");
  }
  return rt;
}

std::vector<std::uint64_t> geometric_schedule(std::uint64_t horizon) {
  if (horizon == 0) throw InvalidInput("schedule horizon must be positive");
  std::vector<std::uint64_t> out;
  for (std::uint64_t n = 1; n < horizon; n *= 2) out.push_back(n);
  out.push_back(horizon);
  return out;
}

RateReport lk_rate(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t horizon,
                   const LkRateOptions& options) {
  RateReport report;
  report.generator = "levin-kautz->" + nu.config();
  report.measure = mu.config();
  report.schedule = geometric_schedule(horizon);
  report.stream_id = a.id();
  const double h_nu = entropy_rate(nu);
  if (h_nu > 0) report.theoretical = entropy_rate(mu) / h_nu;

  LkState s(mu, nu);
  std::size_t next = 0;
  while (next < report.schedule.size()) {
    const auto bit = a.next();
    if (!bit) {
      throw ConversionStalled(finish(s), "rate trace: input ended after " + std::to_string(s.n()) + " bits");
    }
    s.step(*bit);
    if (s.n() == report.schedule[next]) {
      if (!s.contained()) throw ContractViolation("containment lost at n=" + std::to_string(s.n()));
      report.oi_trace.push_back({s.n(), make_rational(static_cast<long>(s.g()), static_cast<long>(s.n()))});
      ++next;
    }
  }

  if (options.mc_samples > 0) {
    report.seed = options.mc_seed;
    for (const auto n : report.schedule) {
      if (n > options.mc_limit) break;
      double total = 0.0;
      for (std::uint64_t i = 0; i < options.mc_samples; ++i) {
        const auto r = lk_run(mu, nu, sample(mu, derive_seed(options.mc_seed, i), n));
        total += static_cast<double>(r.output.size());
      }
      AvgPoint p;
      p.n = n;
      p.samples = options.mc_samples;
      p.value = total / (static_cast<double>(options.mc_samples) * static_cast<double>(n));
      report.avg_by_n.push_back(p);
    }
  }
  // limsup/liminf always describe the pointwise trace here.
  RateReport pointwise = report;
  pointwise.avg_by_n.clear();
  summarize_tail(pointwise);
  report.limsup_est = pointwise.limsup_est;
  report.liminf_est = pointwise.liminf_est;
  return report;
}

}  // namespace xrate
