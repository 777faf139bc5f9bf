#include "xrate/ergodic.hpp"

#include <cmath>

namespace xrate {

ShiftSpec ShiftSpec::n_shift(std::size_t n) {
  if (n == 0) throw InvalidInput("n-shift needs n >= 1");
  ShiftSpec s;
  s.n_ = n;
  return s;
}

ShiftSpec ShiftSpec::tree_shift(DdgTree tree) {
  ShiftSpec s;
  s.tree_ = std::move(tree);
  return s;
}

const DdgTree& ShiftSpec::tree() const {
  if (!tree_) throw InvalidInput("not a tree-shift");
  return *tree_;
}

std::string ShiftSpec::name() const {
  if (tree_) return "tree-shift";
  return std::to_string(n_) + "-shift";
}

BitStream ShiftSpec::apply(const BitStream& x, std::uint64_t input_cap) const {
  if (tree_) return xrate::tree_shift(*tree_, x, input_cap);
  return xrate::n_shift(n_, x);
}

Observable block_oi_observable(const BlockMap& bm) {
  Observable f;
  f.name = "block-oi";
  std::size_t longest = 0;
  for (const auto& img : bm.table()) longest = std::max(longest, img.size());
  f.bound = static_cast<double>(longest) / static_cast<double>(bm.n());
  f.prefix_need = bm.n();
  f.eval = [bm](const BitStream& x) {
    BitStream view = x;
    const BitString block = view.prefix(bm.n());
    if (block.size() < bm.n()) throw ContractViolation("observable: stream ended inside a block");
    return static_cast<double>(bm.image(block).size()) / static_cast<double>(bm.n());
  };
  return f;
}

Observable block_length_observable(const DdgTree& tree, std::uint64_t input_cap) {
  Observable f;
  f.name = "block-length";
  f.bound = static_cast<double>(tree.is_finite() ? tree.depth() : input_cap);
  f.eval = [tree, input_cap](const BitStream& x) {
    return static_cast<double>(leading_block_length(tree, x, input_cap));
  };
  return f;
}

Observable constant_observable(double c) {
  Observable f;
  f.name = "constant";
  f.bound = std::abs(c);
  f.prefix_need = 0;
  f.eval = [c](const BitStream&) { return c; };
  return f;
}

// ---------------------------------------------------------------------------

namespace {

Rational joint_mass(const Measure& mu, const BitString& a, const BitString& b) {
  const BitString& longer = a.size() >= b.size() ? a : b;
  const BitString& shorter = a.size() >= b.size() ? b : a;
  if (!shorter.is_prefix_of(longer)) return 0;
  return cylinder_mass(mu, longer);
}

/// Σ over ρ ∈ D^remaining of μ(prefix·ρ·σ ∧ τ), depth first.
void tree_preimage(const DdgTree& tree, const Measure& mu, const BitString& prefix, std::size_t remaining,
                   const BitString& sigma, const BitString& tau, Rational& total) {
  const std::size_t common = std::min(prefix.size(), tau.size());
  for (std::size_t i = 0; i < common; ++i) {
    if (prefix[i] != tau[i]) return;
  }
  if (remaining == 0) {
    total += joint_mass(mu, prefix.concat(sigma), tau);
    return;
  }
  if (prefix.size() >= tau.size() && mu.kind() == MeasureKind::lebesgue) {
    // D^remaining has full λ-mass, so the rest factorises.
    total += pow2_inv(prefix.size() + sigma.size());
    return;
  }
  for (const auto& [rho, label] : tree.terminals()) {
    (void)label;
    tree_preimage(tree, mu, prefix.concat(rho), remaining - 1, sigma, tau, total);
  }
}

}  // namespace

std::vector<Rational> mixing_average(const ShiftSpec& shift, const Measure& mu, const BitString& sigma,
                                     const BitString& tau, std::size_t steps) {
  if (sigma.size() + tau.size() > kMaxMixingLength || steps > kMaxMixingSteps) {
    throw InvalidInput("mixing expansion infeasible: needs |sigma|+|tau| <= " + std::to_string(kMaxMixingLength) +
                       " and K <= " + std::to_string(kMaxMixingSteps));
  }
  std::vector<Rational> out;
  out.reserve(steps + 1);
  if (!shift.is_tree()) {
    const std::size_t n = shift.n();
    for (std::size_t i = 0; i <= steps; ++i) {
      const std::size_t start = i * n;
      std::vector<int> pattern(std::max(tau.size(), start + sigma.size()), -1);
      for (std::size_t j = 0; j < tau.size(); ++j) pattern[j] = tau[j] ? 1 : 0;
      bool clash = false;
      for (std::size_t j = 0; j < sigma.size(); ++j) {
        const int b = sigma[j] ? 1 : 0;
        int& slot = pattern[start + j];
        if (slot >= 0 && slot != b) clash = true;
        slot = b;
      }
      out.push_back(clash ? Rational(0) : pattern_mass(mu, pattern));
    }
    return out;
  }
  const DdgTree& tree = shift.tree();
  if (!tree.is_finite()) throw InvalidInput("mixing expansion infeasible: tree is infinite");
  for (std::size_t i = 0; i <= steps; ++i) {
    Rational total = 0;
    tree_preimage(tree, mu, BitString{}, i, sigma, tau, total);
    out.push_back(total);
  }
  return out;
}

std::size_t mixing_threshold(const ShiftSpec& shift, const BitString& tau) {
  const std::size_t step = shift.is_tree() ? shift.tree().min_terminal_length() : shift.n();
  return (tau.size() + step - 1) / step;
}

double birkhoff_average(const ShiftSpec& shift, const Observable& f, const BitStream& x, std::uint64_t steps) {
  if (steps == 0) throw InvalidInput("Birkhoff average needs K >= 1");
  BitStream y = x;
  y.reset();
  double total = 0.0;
  for (std::uint64_t i = 0; i < steps; ++i) {
    if (i > 0) y = shift.apply(y);
    const double v = f.eval(y);
    if (std::abs(v) > f.bound) {
      throw ContractViolation("observable " + f.name + " exceeded its bound at step " + std::to_string(i));
    }
    total += v;
  }
  return total / static_cast<double>(steps);
}

}  // namespace xrate
