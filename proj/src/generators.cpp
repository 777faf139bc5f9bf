#include "xrate/generators.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <memory>
#include <mutex>

namespace xrate {

Generator identity_generator() {
  Generator g;
  g.name = "identity";
  g.eval = [](const BitString& s) { return s; };
  g.block_size = 1;
  g.length_law = [](std::uint64_t n) { return n; };
  return g;
}

Generator duplication_generator() {
  Generator g;
  g.name = "duplication";
  g.eval = [](const BitString& s) {
    BitString out;
    out.reserve(2 * s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(s[i]);
      out.push_back(s[i]);
    }
    return out;
  };
  g.block_size = 1;
  g.length_law = [](std::uint64_t n) { return 2 * n; };
  return g;
}

namespace {

/// Memoized prefix sums of α, shared by copies of one generator.
struct AlphaTable {
  std::function<std::uint64_t(std::uint64_t)> alpha;
  std::mutex mutex;
  std::vector<std::uint64_t> cumulative{0};

  std::uint64_t total(std::uint64_t n) {
    std::lock_guard lock(mutex);
    while (cumulative.size() <= n) {
      const std::uint64_t i = cumulative.size() - 1;
      const std::uint64_t a = alpha(i);
      if (a == 0) throw InvalidInput("alpha must be positive, alpha(" + std::to_string(i) + ") = 0");
      cumulative.push_back(cumulative.back() + a);
    }
    return cumulative[n];
  }
};

}  // namespace

Generator alpha_functional(std::function<std::uint64_t(std::uint64_t)> alpha, std::string name) {
  auto table = std::make_shared<AlphaTable>();
  table->alpha = alpha;
  Generator g;
  g.name = std::move(name);
  g.eval = [alpha](const BitString& s) {
    BitString out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::uint64_t a = alpha(i);
      if (a == 0) throw InvalidInput("alpha must be positive, alpha(" + std::to_string(i) + ") = 0");
      for (std::uint64_t r = 0; r < a; ++r) out.push_back(s[i]);
    }
    return out;
  };
  g.length_law = [table](std::uint64_t n) { return table->total(n); };
  return g;
}

std::uint64_t oscillating_beta(std::uint64_t n) {
  if (n == 0) return 1;
  const std::uint64_t top = std::bit_floor(n);
  return 2 * top + (n - top);
}

Generator oscillating_generator() {
  auto alpha = [](std::uint64_t i) -> std::uint64_t {
    if (i == 0) return oscillating_beta(1);
    return oscillating_beta(i + 1) - oscillating_beta(i);
  };
  Generator g = alpha_functional(alpha, "oscillating-beta");
  g.length_law = [](std::uint64_t n) { return n == 0 ? 0 : oscillating_beta(n); };
  return g;
}

// ---------------------------------------------------------------------------

OutputStalled::OutputStalled(std::uint64_t consumed_, std::uint64_t produced_, std::uint64_t wanted)
    : ContractViolation("output stalled: " + std::to_string(consumed_) + " input bits produced " +
                        std::to_string(produced_) + " of " + std::to_string(wanted) + " output bits"),
      consumed(consumed_),
      produced(produced_) {}

std::uint64_t use_function(const Generator& phi, BitStream& x, std::uint64_t n, std::uint64_t input_cap) {
  auto length_at = [&](std::uint64_t m) { return static_cast<std::uint64_t>(phi(x.prefix(m)).size()); };
  if (length_at(0) >= n) return 0;

  // Output length is non-decreasing in m, so gallop then bisect.
  std::uint64_t lo = 0;  // length_at(lo) < n
  std::uint64_t hi = 1;
  while (true) {
    if (hi > input_cap) hi = input_cap;
    const BitString avail = x.prefix(hi);
    const std::uint64_t m = avail.size();
    const std::uint64_t len = phi(avail).size();
    if (len >= n) {
      hi = m;
      break;
    }
    if (m < hi || hi == input_cap) throw OutputStalled(m, len, n);
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (length_at(mid) >= n) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

Rational oi_ratio(const Generator& phi, const BitString& sigma) {
  if (sigma.empty()) throw InvalidInput("output/input ratio of the empty string divides by zero");
  return make_rational(static_cast<long>(phi(sigma).size()), static_cast<long>(sigma.size()));
}

Rational expected_output_length(const StringMap& f, const Measure& mu, std::size_t n) {
  if (n > kMaxExhaustiveLength) {
    throw InvalidInput("exhaustive enumeration refused: 2^" + std::to_string(n) + " strings");
  }
  // Depth-first over 2^n with incremental masses; group leaves by output length.
  std::map<std::size_t, Rational> by_length;
  BitString sigma;
  sigma.reserve(n);
  struct Frame {
    Measure::State state;
    Rational mass;
  };
  std::vector<Frame> frames;
  frames.reserve(n + 1);
  frames.push_back({mu.initial_state(), Rational(1)});

  auto recurse = [&](auto&& self) -> void {
    const Frame& top = frames.back();
    if (top.mass == 0) return;
    if (sigma.size() == n) {
      by_length[f(sigma).size()] += top.mass;
      return;
    }
    for (int b = 0; b < 2; ++b) {
      const Frame& parent = frames.back();
      Frame child{mu.advance(parent.state, b != 0), parent.mass * mu.conditional(parent.state, b != 0)};
      frames.push_back(std::move(child));
      sigma.push_back(b != 0);
      self(self);
      sigma.truncate(sigma.size() - 1);
      frames.pop_back();
    }
  };
  recurse(recurse);

  Rational total = 0;
  for (const auto& [len, mass] : by_length) total += mass * static_cast<unsigned long>(len);
  return total;
}

Rational avg_oi(const Generator& phi, const Measure& mu, std::size_t n) {
  if (n == 0) throw InvalidInput("Avg needs n >= 1");
  if (phi.length_law) {
    return make_rational(static_cast<long>(phi.length_law(n)), static_cast<long>(n));
  }
  Rational total = expected_output_length(phi.eval, mu, n);
  total /= static_cast<unsigned long>(n);
  return total;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 over (seed, index)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double monte_carlo_avg(const StringMap& f, const Measure& mu, std::uint64_t n, std::uint64_t samples,
                       std::uint64_t seed) {
  if (n == 0 || samples == 0) throw InvalidInput("Monte-Carlo Avg needs n >= 1 and samples >= 1");
  double total = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    total += static_cast<double>(f(sample(mu, derive_seed(seed, i), n)).size());
  }
  return total / (static_cast<double>(samples) * static_cast<double>(n));
}

void summarize_tail(RateReport& report) {
  std::vector<double> values;
  if (!report.avg_by_n.empty()) {
    for (const auto& p : report.avg_by_n) values.push_back(p.value);
  } else {
    for (const auto& p : report.oi_trace) values.push_back(to_double(p.value));
  }
  if (values.empty()) return;
  const auto tail = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  report.limsup_est = *std::max_element(tail, values.end());
  report.liminf_est = *std::min_element(tail, values.end());
}

RateReport rate_report(const Generator& phi, const Measure& mu, const std::vector<std::uint64_t>& schedule,
                       BitStream* x, const RateOptions& options) {
  if (schedule.empty()) throw InvalidInput("rate schedule is empty");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] == 0 || (i > 0 && schedule[i] <= schedule[i - 1])) {
      throw InvalidInput("rate schedule must be positive and strictly increasing");
    }
  }
  RateReport report;
  report.generator = phi.name;
  report.measure = mu.config();
  report.schedule = schedule;
  for (const auto n : schedule) {
    AvgPoint p;
    p.n = n;
    if (phi.length_law || n <= options.exact_limit) {
      p.exact = avg_oi(phi, mu, n);
      p.value = to_double(*p.exact);
    } else {
      p.samples = options.mc_samples;
      p.value = monte_carlo_avg(phi.eval, mu, n, options.mc_samples, options.mc_seed);
    }
    report.avg_by_n.push_back(std::move(p));
  }
  if (x != nullptr) {
    report.stream_id = x->id();
    for (const auto n : schedule) {
      const BitString prefix = x->prefix(n);
      if (prefix.size() < n) break;
      report.oi_trace.push_back({n, oi_ratio(phi, prefix)});
    }
  }
  if (!phi.length_law && schedule.back() > options.exact_limit) report.seed = options.mc_seed;
  summarize_tail(report);
  return report;
}

// ---------------------------------------------------------------------------

Generator canonicalize(Generator psi, std::size_t depth_cap) {
  if (depth_cap > kMaxExhaustiveLength) {
    throw InvalidInput("canonicalization depth cap above " + std::to_string(kMaxExhaustiveLength));
  }
  Generator g;
  g.name = "canonical(" + psi.name + ")";
  g.block_size = psi.block_size;
  g.certificate = "lcp-stable-strict-extension";
  g.eval = [psi = std::move(psi), depth_cap](const BitString& sigma) {
    std::optional<BitString> previous;
    for (std::size_t d = 0; d <= depth_cap; ++d) {
      std::optional<BitString> common;
      std::size_t shortest = SIZE_MAX;
      for (std::uint64_t r = 0; r < (std::uint64_t{1} << d); ++r) {
        BitString out = psi(sigma.concat(from_rank(r, d)));
        shortest = std::min(shortest, out.size());
        if (!common) {
          common = std::move(out);
        } else {
          common->truncate(common_prefix_length(*common, out));
        }
      }
      const bool strict = shortest > common->size();
      if (d > 0 && strict && previous && *previous == *common) return *common;
      previous = std::move(common);
    }
    throw CanonicalizationError("canonicalization depth exceeded at sigma='" + sigma.to_string() +
                                "' (cap " + std::to_string(depth_cap) + ")");
  };
  return g;
}

}  // namespace xrate
