#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/generators.hpp"
#include "xrate/measures.hpp"

namespace xrate {

/// An n-block map: σ₁…σ_k·τ ↦ table(σ₁)…table(σ_k) for |σᵢ| = n, |τ| < n.
class BlockMap {
 public:
  /// table[r] is the image of the length-n block with lex rank r.
  /// Throws InvalidInput("partial table") or InvalidInput("trivial block map").
  BlockMap(std::size_t n, std::vector<BitString> table);

  std::size_t n() const noexcept { return n_; }
  const std::vector<BitString>& table() const noexcept { return table_; }
  const BitString& image(const BitString& block) const;

  BitString apply(const BitString& sigma) const;
  Generator generator(std::string name = {}) const;

  friend bool operator==(const BlockMap&, const BlockMap&) = default;

 private:
  std::size_t n_;
  std::vector<BitString> table_;
};

/// φ(10)=0, φ(01)=1, φ(00)=φ(11)=ε.
BlockMap von_neumann();

/// Builds a block map from (input, output) pairs covering all of 2^n.
BlockMap make_block_map(std::size_t n, const std::vector<std::pair<BitString, BitString>>& entries);

/// Table file: one "input<TAB>output" line per length-n input, ε written "-".
BlockMap read_block_map_file(const std::filesystem::path& path);
void write_block_map_file(const std::filesystem::path& path, const BlockMap& bm);

/// Exact extraction rate Avg(φ, μ, n) = (1/n) Σ μ(σ)|table(σ)|, valid when μ is
/// a positive step-Bernoulli measure whose step is 1 or bm.n().
Rational block_rate(const BlockMap& bm, const Measure& mu);

/// True when no proper divisor d of n reproduces the table as a d-block map.
/// Exhaustive; n ≤ 8.
bool is_minimal(const BlockMap& bm);

/// Iterated von Neumann extraction of depth k.
///
/// φ₁ is von Neumann on consecutive pairs; φ_{k+1}(x) = φ₁(x)·φ_k(u)·φ_k(v)
/// with u the pairwise XORs and v the second bits of equal pairs. An odd
/// trailing bit is ignored at every level. The output is not a prefix-monotone
/// generator; only its length statistics are rate-relevant.
class PeresExtractor {
 public:
  explicit PeresExtractor(std::size_t k);
  std::size_t depth() const noexcept { return k_; }
  BitString operator()(const BitString& x) const;
  StringMap as_map() const;

 private:
  std::size_t k_;
};

PeresExtractor peres(std::size_t k);

/// The stream with the first n bits dropped.
BitStream n_shift(std::size_t n, const BitStream& x);

}  // namespace xrate
