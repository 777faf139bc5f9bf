#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/error.hpp"
#include "xrate/measures.hpp"
#include "xrate/rational.hpp"

namespace xrate {

using StringMap = std::function<BitString(const BitString&)>;
using LengthLaw = std::function<std::uint64_t(std::uint64_t)>;

/// A monotone map on finite strings inducing a (partial) functional on
/// Cantor space: σ ⪯ τ implies eval(σ) ⪯ eval(τ).
struct Generator {
  std::string name;
  StringMap eval;
  /// Set for n-block maps.
  std::optional<std::size_t> block_size;
  /// Set when every length-n input yields exactly length_law(n) output bits.
  LengthLaw length_law;
  /// Describes how the generator was certified, when it was derived.
  std::optional<std::string> certificate;

  BitString operator()(const BitString& sigma) const { return eval(sigma); }
};

Generator identity_generator();
/// σ ↦ σ ⊕ σ, every bit written twice.
Generator duplication_generator();

/// σ ↦ σ(0)^α(0) σ(1)^α(1) …, with |eval(σ)| = Σ_{i<|σ|} α(i).
/// α must be positive on every queried index.
Generator alpha_functional(std::function<std::uint64_t(std::uint64_t)> alpha, std::string name = "alpha");

/// β(0) = 1 and β(2^k + i) = 2^(k+1) + i for i < 2^k.
std::uint64_t oscillating_beta(std::uint64_t n);
/// The α-functional whose cumulative length is β on every n ≥ 1.
Generator oscillating_generator();

/// Raised when the input cap is reached before the output is long enough.
class OutputStalled : public ContractViolation {
 public:
  OutputStalled(std::uint64_t consumed, std::uint64_t produced, std::uint64_t wanted);
  std::uint64_t consumed;
  std::uint64_t produced;
};

/// Least m with |eval(x↾m)| ≥ n, searching m ≤ input_cap.
std::uint64_t use_function(const Generator& phi, BitStream& x, std::uint64_t n, std::uint64_t input_cap);

/// |eval(σ)| / |σ|.
Rational oi_ratio(const Generator& phi, const BitString& sigma);

constexpr std::size_t kMaxExhaustiveLength = 24;

/// Σ_{σ∈2^n} μ(σ)|f(σ)|, by exhaustive enumeration (n ≤ kMaxExhaustiveLength).
Rational expected_output_length(const StringMap& f, const Measure& mu, std::size_t n);

/// Avg(φ, μ, n) exactly: from the length law when present, else by enumeration.
Rational avg_oi(const Generator& phi, const Measure& mu, std::size_t n);

/// Sample-mean estimate of Avg(φ, μ, n) over independently seeded μ-samples.
double monte_carlo_avg(const StringMap& f, const Measure& mu, std::uint64_t n, std::uint64_t samples,
                       std::uint64_t seed);

/// Per-sample seed used by every Monte-Carlo routine.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

struct AvgPoint {
  std::uint64_t n = 0;
  std::optional<Rational> exact;
  double value = 0.0;
  std::uint64_t samples = 0;  // 0 when exact
};

struct OiPoint {
  std::uint64_t n = 0;
  Rational value;
};

/// Rate(φ,μ) and OI_φ(X) estimates over a schedule of lengths.
struct RateReport {
  std::string generator;
  std::string measure;
  std::vector<std::uint64_t> schedule;
  std::vector<AvgPoint> avg_by_n;
  std::vector<OiPoint> oi_trace;
  double limsup_est = 0.0;
  double liminf_est = 0.0;
  std::optional<double> theoretical;
  std::optional<std::uint64_t> seed;
  std::string stream_id;
};

struct RateOptions {
  /// Largest n evaluated by exhaustive enumeration.
  std::size_t exact_limit = 16;
  std::uint64_t mc_samples = 1000;
  std::uint64_t mc_seed = 1;
};

/// Fills limsup_est / liminf_est as the max / min over the tail half of the
/// Avg trace, or of the OI trace when no Avg values were recorded.
void summarize_tail(RateReport& report);

RateReport rate_report(const Generator& phi, const Measure& mu, const std::vector<std::uint64_t>& schedule,
                       BitStream* x = nullptr, const RateOptions& options = {});

class CanonicalizationError : public ContractViolation {
 public:
  using ContractViolation::ContractViolation;
};

/// Canonical generator of the functional induced by psi: φ(σ) is the longest
/// common prefix of psi over the depth-d extensions of σ, accepted once it is
/// unchanged from depth d−1 and every depth-d output strictly extends it.
/// Evaluation throws CanonicalizationError when no depth ≤ depth_cap passes.
Generator canonicalize(Generator psi, std::size_t depth_cap);

}  // namespace xrate
