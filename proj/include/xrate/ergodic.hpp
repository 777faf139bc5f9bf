#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/blockmap.hpp"
#include "xrate/ddg.hpp"
#include "xrate/measures.hpp"

namespace xrate {

/// Either the n-shift (drop n bits) or the tree-shift of a DDG tree.
class ShiftSpec {
 public:
  static ShiftSpec n_shift(std::size_t n);
  static ShiftSpec tree_shift(DdgTree tree);

  bool is_tree() const noexcept { return tree_.has_value(); }
  std::size_t n() const noexcept { return n_; }
  const DdgTree& tree() const;
  std::string name() const;

  BitStream apply(const BitStream& x, std::uint64_t input_cap = 1u << 20) const;

 private:
  ShiftSpec() = default;
  std::size_t n_ = 0;
  std::optional<DdgTree> tree_;
};

/// A bounded function of a stream, evaluated on a view starting at the
/// stream's first bit.
struct Observable {
  std::string name;
  std::function<double(const BitStream&)> eval;
  double bound = 0.0;
  /// Bits that determine the value; nullopt when it is terminal-delimited.
  std::optional<std::uint64_t> prefix_need;
};

/// |φ(X↾n)|/n for an n-block map φ.
Observable block_oi_observable(const BlockMap& bm);
/// Length of the leading S-block, bounded by the tree depth (finite trees)
/// or by the cap.
Observable block_length_observable(const DdgTree& tree, std::uint64_t input_cap = 1u << 20);
Observable constant_observable(double c);

/// Limits for exact preimage expansion.
inline constexpr std::size_t kMaxMixingLength = 12;
inline constexpr std::size_t kMaxMixingSteps = 8;

/// μ(T^{-i}⟦σ⟧ ∩ ⟦τ⟧) for i = 0..K, exactly.
std::vector<Rational> mixing_average(const ShiftSpec& shift, const Measure& mu, const BitString& sigma,
                                     const BitString& tau, std::size_t steps);

/// Smallest i from which the mixing sequence is guaranteed to equal μ(σ)μ(τ):
/// ⌈|τ|/n⌉ for the n-shift, ⌈|τ|/ℓ_min⌉ for a tree-shift with shortest
/// terminal length ℓ_min.
std::size_t mixing_threshold(const ShiftSpec& shift, const BitString& tau);

/// (1/K) Σ_{i<K} f(T^i x).
double birkhoff_average(const ShiftSpec& shift, const Observable& f, const BitStream& x, std::uint64_t steps);

}  // namespace xrate
