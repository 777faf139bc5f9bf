#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/error.hpp"
#include "xrate/generators.hpp"
#include "xrate/measures.hpp"

namespace xrate {

/// State of the interval conversion from μ-coded input to ν-coded output.
///
/// After n input bits the input interval (A↾n)_μ sits inside the output
/// interval (B↾g(n))_ν, and B is extended greedily whenever the input
/// interval fits inside exactly one child of the current output interval.
///
/// Internally the input endpoints and the output width are integers
/// relative to the output interval's left end over a shared denominator, so
/// a step costs a few big-integer multiplications instead of rational
/// arithmetic with gcds.
class LkState {
 public:
  LkState(Measure mu, Measure nu);

  void step(bool bit);

  const Measure& mu() const noexcept { return mu_; }
  const Measure& nu() const noexcept { return nu_; }
  std::uint64_t n() const noexcept { return input_.size(); }
  std::uint64_t g() const noexcept { return output_.size(); }
  const BitString& input() const noexcept { return input_; }
  const BitString& output() const noexcept { return output_; }
  /// Entry n is g(n); entry 0 is 0.
  const std::vector<std::uint64_t>& g_trace() const noexcept { return g_; }

  /// (A↾n)_μ and (B↾g(n))_ν in absolute coordinates, rebuilt from the bits.
  RatInterval input_interval() const;
  RatInterval output_interval() const;
  /// μ(A↾n) and ν(B↾g(n)) read off the internal representation.
  Rational input_mass() const;
  Rational output_mass() const;
  /// input_interval ⊆ output_interval, checked on the internal representation.
  bool contained() const;

 private:
  Measure mu_;
  Measure nu_;
  Measure::State mu_state_;
  Measure::State nu_state_;
  // Relative coordinates over the common denominator den_: the input
  // interval is [lo_, hi_] and the output interval is [0, width_].
  Natural lo_;
  Natural hi_;
  Natural width_;
  Natural den_;
  BitString input_;
  BitString output_;
  std::vector<std::uint64_t> g_;
};

/// Pure form of LkState::step.
LkState lk_step(LkState state, bool bit);

struct LkCheckpoint {
  std::uint64_t n = 0;
  std::uint64_t g = 0;
  Rational mu_mass;
  Rational nu_mass;
};

struct LkResult {
  BitString output;
  std::uint64_t consumed = 0;
  /// g(n) for n = 0..consumed.
  std::vector<std::uint64_t> g_trace;
  /// Masses at n = 1, 2, 4, … and at the last n.
  std::vector<LkCheckpoint> checkpoints;
};

class ConversionStalled : public ContractViolation {
 public:
  ConversionStalled(LkResult partial, std::string what);
  LkResult partial;
};

/// Runs until out_len output bits exist or input_cap input bits are used.
/// Throws ConversionStalled carrying the partial output and trace otherwise.
LkResult lk_convert(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t out_len,
                    std::uint64_t input_cap);

/// Converts every bit of input, with no output target.
LkResult lk_run(const Measure& mu, const Measure& nu, const BitString& input);

struct KautzReport {
  std::uint64_t horizon = 0;
  Rational delta;
  /// n with μ(A↾n) > ν(B↾g(n)); always 0 unless the engine is broken.
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> first_violation;
  /// n with δ²·ν(B↾g(n)) ≤ μ(A↾n).
  std::uint64_t witnesses = 0;
  /// Longest run of consecutive n without a witness.
  std::uint64_t largest_witness_gap = 0;
  /// Set when no witness was seen; not a failure.
  bool warning = false;
};

class KautzViolation : public ContractViolation {
 public:
  KautzViolation(KautzReport report, std::string what);
  KautzReport report;
};

/// Checks both Kautz bounds for n = 1..horizon using masses multiplied up
/// bit by bit, independently of the conversion's interval arithmetic.
/// Throws KautzViolation if bound (i) fails anywhere.
KautzReport kautz_check(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t horizon);

struct RoundTrip {
  std::uint64_t agreement = 0;
  std::uint64_t forward_bits = 0;
  std::uint64_t backward_bits = 0;
};

/// Converts a↾forward_cap to ν-coding, converts the result (at most
/// backward_cap bits of it) back to μ-coding, and measures agreement with a.
/// Throws ContractViolation when the agreement is below n.
RoundTrip lk_roundtrip(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t n,
                       std::uint64_t forward_cap, std::uint64_t backward_cap);

struct LkRateOptions {
  /// Monte-Carlo samples of g(n)/n at each schedule point (0 disables).
  std::uint64_t mc_samples = 0;
  std::uint64_t mc_seed = 1;
  /// Largest n for Monte-Carlo samples.
  std::uint64_t mc_limit = 4096;
};

/// g(n)/n at n = 1, 2, 4, …, and N, with theoretical target h(μ)/h(ν).
RateReport lk_rate(const Measure& mu, const Measure& nu, BitStream& a, std::uint64_t horizon,
                   const LkRateOptions& options = {});

/// Geometric schedule 1, 2, 4, … < horizon, then horizon.
std::vector<std::uint64_t> geometric_schedule(std::uint64_t horizon);

}  // namespace xrate
