#include "xrate/selftest.hpp"

#include <functional>

#include "xrate/blockmap.hpp"
#include "xrate/bundles.hpp"
#include "xrate/ddg.hpp"
#include "xrate/ergodic.hpp"
#include "xrate/generators.hpp"
#include "xrate/levinkautz.hpp"
#include "xrate/measures.hpp"

namespace xrate {

namespace {

using Check = std::function<std::string()>;  // empty string on success

std::string expect_eq(const Rational& got, const Rational& want, const std::string& what) {
  if (got == want) return {};
  return what + ": got " + to_string(got) + ", want " + to_string(want);
}

std::string check_rank_roundtrip() {
  for (std::size_t n = 0; n <= 10; ++n) {
    for (std::uint64_t r = 0; r < (std::uint64_t{1} << n); ++r) {
      const BitString s = from_rank(r, n);
      if (s.size() != n || lex_rank(s) != Natural(static_cast<unsigned long>(r))) {
        return "rank mismatch at n=" + std::to_string(n) + " r=" + std::to_string(r);
      }
    }
  }
  return {};
}

std::string check_interval_literal() {
  for (const auto& [name, mu] : bundled_measures()) {
    for (std::size_t n = 1; n <= 6; ++n) {
      Rational left = 0;
      for (const auto& sigma : all_strings(n)) {
        const RatInterval iv = measure_interval(mu, sigma);
        const Rational mass = cylinder_mass(mu, sigma);
        if (iv.lo != left || iv.width() != mass) return name + ": interval of " + sigma.to_string() + " is " + to_string(iv);
        left += mass;
      }
      if (left != 1) return name + ": level " + std::to_string(n) + " masses sum to " + to_string(left);
    }
  }
  return {};
}

std::string check_conditionals() {
  for (const auto& [name, mu] : bundled_measures()) {
    for (const auto& sigma : all_strings(7)) {
      auto state = mu.initial_state();
      Rational mass = 1;
      for (std::size_t i = 0; i < sigma.size(); ++i) {
        mass *= mu.conditional(state, sigma[i]);
        state = mu.advance(state, sigma[i]);
      }
      if (mass != cylinder_mass(mu, sigma)) return name + ": chain rule fails at " + sigma.to_string();
    }
  }
  return {};
}

std::string check_vn_fair() {
  const Generator vn = von_neumann().generator("vn");
  return expect_eq(avg_oi(vn, Measure::bernoulli(make_rational(1, 2)), 2), make_rational(1, 4), "Avg(vn, 1/2, 2)");
}

std::string check_oscillating_law() {
  const Generator g = oscillating_generator();
  for (std::uint64_t n = 1; n <= 64; ++n) {
    const auto len = g(BitString(std::vector<std::uint8_t>(n, 0))).size();
    if (len != g.length_law(n) || len != oscillating_beta(n)) return "length law differs at n=" + std::to_string(n);
  }
  return {};
}

std::string check_block_rate() {
  const BlockMap vn = von_neumann();
  const Generator g = vn.generator("vn");
  for (const auto& mu : {Measure::bernoulli(make_rational(3, 10)), bundled_step2()}) {
    const Rational rate = block_rate(vn, mu);
    for (std::size_t k = 1; k <= 4; ++k) {
      if (auto err = expect_eq(avg_oi(g, mu, 2 * k), rate, mu.config() + " n=" + std::to_string(2 * k)); !err.empty()) {
        return err;
      }
    }
  }
  return {};
}

std::string check_avg_rt() {
  const AvgRt three = avg_rt(bundled_three_leaf_tree());
  if (!three.exact) return "finite tree AvgRT not exact";
  if (auto err = expect_eq(three.value, make_rational(3, 2), "AvgRT(1/2,1/4,1/4)"); !err.empty()) return err;
  const DdgTree ky = knuth_yao({make_rational(2, 3), make_rational(1, 3)});
  const AvgRt at40 = avg_rt(ky, 40);
  Rational diff = at40.value - 2;
  if (abs(diff) > at40.tail_bound || at40.tail_bound >= make_rational(1, 1000000000)) {
    return "Knuth-Yao AvgRT at level 40 is " + to_string(at40.value) + " with bound " + to_string(at40.tail_bound);
  }
  return {};
}

std::string check_ky_walk() {
  const DdgTree ky = knuth_yao({make_rational(2, 3), make_rational(1, 3)});
  Rational mass = 0;
  for (const auto& [node, label] : ky.terminals_up_to(16)) {
    if (ky.label_of(node) != label) return "walk disagrees with layout at " + node.to_string();
    mass += pow2_inv(node.size());
  }
  const auto [certified, bound] = certified_mass(ky, 16);
  if (mass != certified || 1 - mass > bound) return "level-16 mass " + to_string(mass) + " not certified";
  return {};
}

std::string check_lk_hand_example() {
  const Measure mu = Measure::bernoulli(make_rational(1, 4));  // P(0) = 3/4
  LkState s(mu, Measure::lebesgue());
  s.step(false);
  s.step(false);
  if (s.g() != 0) return "g(2) = " + std::to_string(s.g());
  if (s.input_interval() != RatInterval{0, make_rational(9, 16)}) return "(00) = " + to_string(s.input_interval());
  s.step(false);
  if (s.g() != 1 || s.output()[0]) return "g(3) = " + std::to_string(s.g());
  return expect_eq(s.input_mass(), make_rational(27, 64), "mu(000)");
}

std::string check_lk_identity() {
  const Measure lambda = Measure::lebesgue();
  const BitString a = sample(lambda, 7, 512);
  const LkResult r = lk_run(lambda, lambda, a);
  if (r.output != a) return "identity conversion changed the input";
  return {};
}

std::string check_lk_scratch() {
  const auto pairs = bundled_pairs();
  for (const auto& pair : pairs) {
    const BitString a = sample(pair.from, 3, 200);
    LkState s(pair.from, pair.to);
    for (std::size_t n = 1; n <= a.size(); ++n) {
      s.step(a[n - 1]);
      if (n % 50 != 0) continue;
      const RatInterval in = measure_interval(pair.from, a.prefix(n));
      const BitString& out = s.output();
      if (!measure_interval(pair.to, out).contains(in)) {
        return pair.name + ": lost containment at n=" + std::to_string(n);
      }
      for (int b = 0; b < 2; ++b) {
        if (measure_interval(pair.to, out.with(b != 0)).contains(in)) {
          return pair.name + ": output could extend at n=" + std::to_string(n);
        }
      }
    }
  }
  return {};
}

std::string check_mixing() {
  const Measure step2 = bundled_step2();
  const BitString s01{0, 1};
  const auto seq = mixing_average(ShiftSpec::n_shift(2), step2, s01, s01, 6);
  const Rational m = cylinder_mass(step2, s01);
  for (std::size_t i = 2; i < seq.size(); ++i) {
    if (auto err = expect_eq(seq[i], m * m, "2-shift i=" + std::to_string(i)); !err.empty()) return err;
  }
  const auto tree = ShiftSpec::tree_shift(bundled_three_leaf_tree());
  const Measure lambda = Measure::lebesgue();
  for (std::size_t ls = 0; ls <= 3; ++ls) {
    for (std::size_t lt = 0; lt <= 3; ++lt) {
      for (const auto& sigma : all_strings(ls)) {
        for (const auto& tau : all_strings(lt)) {
          const auto vals = mixing_average(tree, lambda, sigma, tau, 5);
          const Rational want = pow2_inv(ls + lt);
          for (std::size_t i = mixing_threshold(tree, tau); i < vals.size(); ++i) {
            if (vals[i] != want) return "tree-shift at sigma=" + sigma.to_string() + " tau=" + tau.to_string();
          }
        }
      }
    }
  }
  return {};
}

struct Entry {
  const char* module;
  const char* name;
  Check check;
};

}  // namespace

std::vector<SelfCheck> run_selftest() {
  const std::vector<Entry> entries = {
      {"bitseq", "lex rank round trip", check_rank_roundtrip},
      {"measures", "interval equals literal lex sum", check_interval_literal},
      {"measures", "chain rule over conditionals", check_conditionals},
      {"generators", "von Neumann fair-coin Avg", check_vn_fair},
      {"generators", "oscillating length law", check_oscillating_law},
      {"blockmap", "block rate equals Avg at multiples", check_block_rate},
      {"ddg", "AvgRT exact and truncated", check_avg_rt},
      {"ddg", "Knuth-Yao walk and certified mass", check_ky_walk},
      {"levinkautz", "hand-computed intervals", check_lk_hand_example},
      {"levinkautz", "identity conversion", check_lk_identity},
      {"levinkautz", "g(n) against definition", check_lk_scratch},
      {"ergodic", "exact mixing thresholds", check_mixing},
  };
  std::vector<SelfCheck> out;
  for (const auto& e : entries) {
    SelfCheck c{e.module, e.name, false, {}};
    try {
      c.detail = e.check();
      c.passed = c.detail.empty();
    } catch (const std::exception& ex) {
      c.detail = std::string("exception: ") + ex.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace xrate
