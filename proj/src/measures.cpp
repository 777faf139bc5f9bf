#include "xrate/measures.hpp"

#include <cctype>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "xrate/error.hpp"

namespace xrate {

namespace {

Rational rat_pow(const Rational& q, unsigned long e) {
  Natural num, den;
  mpz_pow_ui(num.get_mpz_t(), q.get_num_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), q.get_den_mpz_t(), e);
  return Rational(num, den);  // coprime powers stay coprime
}

std::size_t marginal_index(std::size_t len, std::uint64_t rank) { return (std::size_t{1} << len) - 1 + rank; }

std::uint64_t small_rank(const BitString& s) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < s.size(); ++i) r = (r << 1) | (s[i] ? 1U : 0U);
  return r;
}

double plogp(double p) { return p > 0.0 ? -p * std::log2(p) : 0.0; }

}  // namespace

Measure Measure::lebesgue() {
  Measure m;
  m.kind_ = MeasureKind::lebesgue;
  m.cond_ = {{make_rational(1, 2), make_rational(1, 2)}};
  m.next_ = {{0, 0}};
  m.finish();
  return m;
}

Measure Measure::bernoulli(const Rational& p) {
  if (p <= 0 || p >= 1) throw InvalidInput("Bernoulli parameter must lie in (0,1), got " + to_string(p));
  Measure m;
  m.kind_ = MeasureKind::bernoulli;
  m.p_ = p;
  m.cond_ = {{Rational(1 - p), p}};
  m.next_ = {{0, 0}};
  m.finish();
  return m;
}

Measure Measure::step_bernoulli(std::size_t n, std::vector<Rational> table) {
  if (n == 0 || n > 16) throw InvalidInput("step-Bernoulli block length must be in 1..16");
  if (table.size() != (std::size_t{1} << n)) {
    throw InvalidInput("step-Bernoulli table needs " + std::to_string(std::size_t{1} << n) + " entries, got " +
                       std::to_string(table.size()));
  }
  Rational total = 0;
  for (const auto& t : table) {
    if (t < 0) throw InvalidInput("step-Bernoulli table entries must be non-negative");
    total += t;
  }
  if (total != 1) throw InvalidInput("step-Bernoulli table sums to " + to_string(total) + ", not 1");

  Measure m;
  m.kind_ = MeasureKind::step_bernoulli;
  m.n_ = n;
  m.table_ = std::move(table);
  m.marginal_.assign((std::size_t{1} << (n + 1)) - 1, Rational(0));
  for (std::uint64_t r = 0; r < m.table_.size(); ++r) m.marginal_[marginal_index(n, r)] = m.table_[r];
  for (std::size_t len = n; len-- > 0;) {
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << len); ++r) {
      m.marginal_[marginal_index(len, r)] =
          m.marginal_[marginal_index(len + 1, 2 * r)] + m.marginal_[marginal_index(len + 1, 2 * r + 1)];
    }
  }
  const std::size_t states = (std::size_t{1} << n) - 1;
  m.cond_.resize(states);
  m.next_.resize(states);
  for (std::size_t len = 0; len < n; ++len) {
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << len); ++r) {
      const std::size_t s = marginal_index(len, r);
      const Rational& here = m.marginal_[s];
      for (int b = 0; b < 2; ++b) {
        const std::size_t child = marginal_index(len + 1, 2 * r + static_cast<std::uint64_t>(b));
        if (here == 0) {
          m.cond_[s][b] = 0;
        } else {
          m.cond_[s][b] = m.marginal_[child] / here;
        }
        m.next_[s][b] = static_cast<State>(len + 1 == n ? 0 : child);
      }
    }
  }
  m.finish();
  return m;
}

Measure Measure::markov(const Transition& transition) {
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      if (transition[i][j] <= 0 || transition[i][j] >= 1) {
        throw InvalidInput("Markov transition entries must lie in (0,1)");
      }
    }
    if (transition[i][0] + transition[i][1] != 1) {
      throw InvalidInput("Markov transition row " + std::to_string(i) + " does not sum to 1");
    }
  }
  Measure m;
  m.kind_ = MeasureKind::markov;
  m.transition_ = transition;
  // π0 P01 = π1 P10 with π0 + π1 = 1.
  const Rational flow = transition[0][1] + transition[1][0];
  m.stationary_ = {Rational(transition[1][0] / flow), Rational(transition[0][1] / flow)};
  m.cond_ = {m.stationary_, transition[0], transition[1]};
  m.next_ = {{1, 2}, {1, 2}, {1, 2}};
  m.finish();
  return m;
}

void Measure::finish() {
  threshold_.resize(cond_.size());
  always_one_.resize(cond_.size());
  positive_ = true;
  for (std::size_t s = 0; s < cond_.size(); ++s) {
    const Rational& one = cond_[s][1];
    if (cond_[s][0] == 0 || one == 0) positive_ = false;
    always_one_[s] = (one == 1);
    if (one >= 1) {
      threshold_[s] = 0;
    } else {
      Natural scaled = one.get_num();
      scaled <<= 64;
      scaled /= one.get_den();
      threshold_[s] = scaled.get_ui();
    }
  }
}

std::optional<std::size_t> Measure::step() const {
  switch (kind_) {
    case MeasureKind::lebesgue:
    case MeasureKind::bernoulli:
      return 1;
    case MeasureKind::step_bernoulli:
      return n_;
    case MeasureKind::markov:
      return std::nullopt;
  }
  return std::nullopt;
}

const Rational& Measure::block_marginal(const BitString& rho) const {
  if (kind_ != MeasureKind::step_bernoulli || rho.size() > n_) {
    throw InvalidInput("block marginal needs a step-Bernoulli measure and a within-block prefix");
  }
  return marginal_[marginal_index(rho.size(), small_rank(rho))];
}

std::string Measure::config() const {
  std::ostringstream os;
  switch (kind_) {
    case MeasureKind::lebesgue:
      os << "lebesgue";
      break;
    case MeasureKind::bernoulli:
      os << "bernoulli:" << to_string(p_);
      break;
    case MeasureKind::step_bernoulli:
      os << "step:" << n_ << ":";
      for (std::size_t i = 0; i < table_.size(); ++i) os << (i ? "," : "") << to_string(table_[i]);
      break;
    case MeasureKind::markov:
      os << "markov:" << to_string(transition_[0][0]) << "," << to_string(transition_[0][1]) << ";"
         << to_string(transition_[1][0]) << "," << to_string(transition_[1][1]);
      break;
  }
  return os.str();
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

Rational json_rational(const nlohmann::json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return make_rational(v.get<long>());
  throw InvalidInput("expected a \"num/den\" string in measure config");
}

Measure parse_measure_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "lebesgue") return Measure::lebesgue();
  if (kind == "bernoulli") return Measure::bernoulli(json_rational(j.at("p")));
  if (kind == "markov") {
    const auto& t = j.at("transition");
    Transition tr;
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t k = 0; k < 2; ++k) tr[i][k] = json_rational(t.at(i).at(k));
    return Measure::markov(tr);
  }
  if (kind == "step_bernoulli" || kind == "step") {
    const std::size_t n = j.at("n").get<std::size_t>();
    if (n == 0 || n > 16) throw InvalidInput("step-Bernoulli block length must be in 1..16");
    std::vector<Rational> table(std::size_t{1} << n);
    const auto& t = j.at("table");
    if (t.is_array()) {
      if (t.size() != table.size()) throw InvalidInput("step-Bernoulli table has the wrong number of entries");
      for (std::size_t i = 0; i < table.size(); ++i) table[i] = json_rational(t[i]);
    } else {
      std::vector<bool> seen(table.size(), false);
      for (const auto& [key, val] : t.items()) {
        const BitString s = BitString::parse(key);
        if (s.size() != n) throw InvalidInput("step-Bernoulli table key '" + key + "' has the wrong length");
        const auto r = small_rank(s);
        table[r] = json_rational(val);
        seen[r] = true;
      }
      for (bool b : seen)
        if (!b) throw InvalidInput("step-Bernoulli table is missing entries");
    }
    return Measure::step_bernoulli(n, std::move(table));
  }
  throw InvalidInput("unknown measure kind '" + kind + "'");
}

}  // namespace

Measure parse_measure(std::string_view config) {
  while (!config.empty() && std::isspace(static_cast<unsigned char>(config.front()))) config.remove_prefix(1);
  while (!config.empty() && std::isspace(static_cast<unsigned char>(config.back()))) config.remove_suffix(1);
  if (!config.empty() && config.front() == '{') {
    try {
      return parse_measure_json(nlohmann::json::parse(config));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidInput(std::string("bad measure JSON: ") + e.what());
    }
  }
  const auto colon = config.find(':');
  const std::string kind(config.substr(0, colon));
  const std::string_view rest = colon == std::string_view::npos ? std::string_view{} : config.substr(colon + 1);
  if (kind == "lebesgue" || kind == "uniform") {
    if (!rest.empty()) throw InvalidInput("lebesgue takes no parameters");
    return Measure::lebesgue();
  }
  if (kind == "bernoulli") return Measure::bernoulli(parse_rational(rest));
  if (kind == "markov") {
    const auto rows = split(rest, ';');
    if (rows.size() != 2) throw InvalidInput("markov config needs two rows 'P00,P01;P10,P11'");
    Transition tr;
    for (std::size_t i = 0; i < 2; ++i) {
      const auto cells = split(rows[i], ',');
      if (cells.size() != 2) throw InvalidInput("markov rows need two entries");
      tr[i][0] = parse_rational(cells[0]);
      tr[i][1] = parse_rational(cells[1]);
    }
    return Measure::markov(tr);
  }
  if (kind == "step") {
    const auto colon2 = rest.find(':');
    if (colon2 == std::string_view::npos) throw InvalidInput("step config is 'step:N:m0,m1,...'");
    const auto n_text = std::string(rest.substr(0, colon2));
    std::size_t n = 0;
    try {
      n = std::stoul(n_text);
    } catch (const std::exception&) {
      throw InvalidInput("bad step length '" + n_text + "'");
    }
    std::vector<Rational> table;
    for (const auto& cell : split(rest.substr(colon2 + 1), ',')) table.push_back(parse_rational(cell));
    return Measure::step_bernoulli(n, std::move(table));
  }
  throw InvalidInput("unknown measure config '" + std::string(config) + "'");
}

// ---------------------------------------------------------------------------

Rational cylinder_mass(const Measure& mu, const BitString& sigma) {
  switch (mu.kind()) {
    case MeasureKind::lebesgue:
      return pow2_inv(sigma.size());
    case MeasureKind::bernoulli: {
      const auto ones = sigma.count_ones();
      const Rational p = mu.p();
      return rat_pow(p, ones) * rat_pow(Rational(1 - p), sigma.size() - ones);
    }
    case MeasureKind::step_bernoulli: {
      const std::size_t n = *mu.step();
      const std::size_t full = sigma.size() / n;
      // Multiply equal blocks together through exponent counts.
      std::vector<unsigned long> counts(mu.table().size(), 0);
      for (std::size_t b = 0; b < full; ++b) ++counts[small_rank(sigma.slice(b * n, (b + 1) * n))];
      Rational mass = mu.block_marginal(sigma.slice(full * n, sigma.size()));
      for (std::size_t r = 0; r < counts.size(); ++r) {
        if (counts[r] != 0) mass *= rat_pow(mu.table()[r], counts[r]);
      }
      return mass;
    }
    case MeasureKind::markov: {
      if (sigma.empty()) return Rational(1);
      std::array<std::array<unsigned long, 2>, 2> counts{};
      for (std::size_t i = 1; i < sigma.size(); ++i) ++counts[sigma[i - 1]][sigma[i]];
      Rational mass = mu.stationary()[sigma[0] ? 1 : 0];
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if (counts[a][b] != 0) mass *= rat_pow(mu.transition()[a][b], counts[a][b]);
      return mass;
    }
  }
  return Rational(0);
}

RatInterval measure_interval(const Measure& mu, const BitString& sigma) {
  if (!mu.is_positive()) throw InvalidInput("measure intervals need a positive measure");
  Rational lo = 0;
  Rational width = 1;
  auto s = mu.initial_state();
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    Rational left = width * mu.conditional(s, false);
    if (sigma[i]) {
      lo += left;
      width -= left;
    } else {
      width = left;
    }
    s = mu.advance(s, sigma[i]);
  }
  Rational hi = lo + width;
  return {lo, hi};
}

Rational pattern_mass(const Measure& mu, const std::vector<int>& pattern) {
  std::vector<Rational> weight(mu.state_count(), Rational(0));
  std::vector<Rational> next(mu.state_count());
  weight[mu.initial_state()] = 1;
  for (int symbol : pattern) {
    for (auto& w : next) w = 0;
    for (Measure::State s = 0; s < weight.size(); ++s) {
      if (weight[s] == 0) continue;
      for (int b = 0; b < 2; ++b) {
        if (symbol != -1 && symbol != b) continue;
        next[mu.advance(s, b != 0)] += weight[s] * mu.conditional(s, b != 0);
      }
    }
    std::swap(weight, next);
  }
  Rational total = 0;
  for (const auto& w : weight) total += w;
  return total;
}

double entropy_rate(const Measure& mu) {
  switch (mu.kind()) {
    case MeasureKind::lebesgue:
      return 1.0;
    case MeasureKind::bernoulli: {
      const double p = mu.p().get_d();
      return plogp(p) + plogp(1.0 - p);
    }
    case MeasureKind::step_bernoulli: {
      double h = 0.0;
      for (const auto& t : mu.table()) h += plogp(t.get_d());
      return h / static_cast<double>(*mu.step());
    }
    case MeasureKind::markov: {
      double h = 0.0;
      for (int i = 0; i < 2; ++i) {
        double row = 0.0;
        for (int j = 0; j < 2; ++j) row += plogp(mu.transition()[i][j].get_d());
        h += mu.stationary()[i].get_d() * row;
      }
      return h;
    }
  }
  throw InvalidInput("no closed-form entropy");
}

double smb_entropy_estimate(const Measure& mu, BitStream& x, std::uint64_t n) {
  if (n == 0) throw InvalidInput("entropy estimate needs n >= 1");
  const BitString prefix = x.prefix(n);
  if (prefix.size() < n) throw InvalidInput("stream ended before " + std::to_string(n) + " bits");
  const Rational mass = cylinder_mass(mu, prefix);
  if (mass == 0) throw InvalidInput("prefix has zero mass under " + mu.config());
  return -log2(mass) / static_cast<double>(n);
}

std::optional<Rational> positivity_delta(const Measure& mu) {
  Rational delta = make_rational(1, 2);
  for (Measure::State s = 0; s < mu.state_count(); ++s) {
    for (int b = 0; b < 2; ++b) {
      const Rational& c = mu.conditional(s, b != 0);
      if (c == 0 || c == 1) return std::nullopt;
      if (c < delta) delta = c;
    }
  }
  return delta;
}

// ---------------------------------------------------------------------------

namespace {

class MeasureTape final : public detail::Tape {
 public:
  MeasureTape(Measure mu, std::uint64_t seed) : mu_(std::move(mu)), seed_(seed), rng_(seed) {}

  std::string id() const override { return mu_.config() + "@seed=" + std::to_string(seed_); }

 protected:
  bool produce() override {
    const std::uint64_t u = rng_();
    const bool bit = mu_.always_one(state_) || u < mu_.one_threshold(state_);
    bits_.push_back(bit ? 1 : 0);
    state_ = mu_.advance(state_, bit);
    return true;
  }

 private:
  Measure mu_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
  Measure::State state_ = 0;
};

}  // namespace

BitStream measure_stream(const Measure& mu, std::uint64_t seed) {
  return BitStream(std::make_shared<MeasureTape>(mu, seed));
}

BitString sample(const Measure& mu, std::uint64_t seed, std::uint64_t n) {
  auto stream = measure_stream(mu, seed);
  return stream.prefix(n);
}

}  // namespace xrate
