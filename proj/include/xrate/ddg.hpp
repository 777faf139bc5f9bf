#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xrate/bitseq.hpp"
#include "xrate/error.hpp"
#include "xrate/generators.hpp"
#include "xrate/rational.hpp"

namespace xrate {

/// Discrete distribution generating tree: a prefix-free terminal set D(S)
/// labelled by an alphabet {a₁,…,a_k}, walked with fair coin flips.
///
/// Finite trees store their terminals in a trie. Knuth–Yao trees for
/// non-dyadic distributions are infinite and are expanded level by level on
/// demand; at most k terminals sit on any level.
class DdgTree {
 public:
  /// Position of a walk: the current node as (level, index). Finite trees use
  /// the trie node id as index; lazy trees use the node's lex position among
  /// the nodes of its level.
  struct Cursor {
    std::uint64_t level = 0;
    std::uint64_t index = 0;
  };

  bool is_finite() const noexcept;
  std::size_t alphabet_size() const noexcept;
  const std::vector<std::string>& labels() const noexcept;
  /// Induced label masses p_i (exact; for lazy trees the target distribution).
  const std::vector<Rational>& distribution() const noexcept;
  const Rational& tail_tol() const noexcept;

  /// Advances the walk by one bit; returns the label index on reaching a terminal.
  std::optional<std::size_t> step(Cursor& cursor, bool bit) const;
  /// |D(S) ∩ 2^level|.
  std::uint64_t terminals_at_level(std::size_t level) const;
  /// Terminals of length ≤ max_level with their label indices, shortest first.
  std::vector<std::pair<BitString, std::size_t>> terminals_up_to(std::size_t max_level) const;
  /// All terminals of a finite tree.
  const std::vector<std::pair<BitString, std::size_t>>& terminals() const;
  /// Label of σ when σ ∈ D(S).
  std::optional<std::size_t> label_of(const BitString& sigma) const;
  std::size_t min_terminal_length() const;
  /// Deepest terminal of a finite tree.
  std::size_t depth() const;

  struct Impl;

 private:
  friend DdgTree make_ddg(const std::vector<std::pair<BitString, std::string>>& terminals);
  friend DdgTree knuth_yao(const std::vector<Rational>& dist, const Rational& tail_tol);
  explicit DdgTree(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Validated finite tree. Labels are numbered in order of first appearance.
/// Throws on a non-prefix-free set or when Σ p_i ≠ 1 (reporting the exact gap).
DdgTree make_ddg(const std::vector<std::pair<BitString, std::string>>& terminals);

/// Knuth–Yao tree: one terminal labelled a_j at level i iff bit i of p_j is 1.
/// At each level terminals take the lexicographically smallest slots in label
/// order and the remaining slots are internal. Dyadic distributions give
/// finite trees. Labels are "a1", "a2", ….
DdgTree knuth_yao(const std::vector<Rational>& dist, const Rational& tail_tol = make_rational(1, 1000000000));

/// Parses "ky:2/3,1/3" (Knuth–Yao) or reads a tree file.
DdgTree parse_tree(std::string_view config, const Rational& tail_tol = make_rational(1, 1000000000));

/// Tree file: one "node<TAB>label" line per terminal.
DdgTree read_ddg_file(const std::filesystem::path& path);
void write_ddg_file(const std::filesystem::path& path, const DdgTree& tree);

/// AvgRT(S) = Σ_i i·2^-i·|D(S) ∩ 2^i|, exact or truncated with a certified remainder.
struct AvgRt {
  Rational value;       // exact sum over levels ≤ level
  Rational tail_bound;  // 0 for finite trees
  std::size_t level = 0;
  bool exact = false;
};

/// Exact for finite trees; for lazy trees truncated at the first level whose
/// certified remainder is ≤ tail_tol.
AvgRt avg_rt(const DdgTree& tree);
/// Truncated at a given level (exact when the tree has no deeper terminals).
AvgRt avg_rt(const DdgTree& tree, std::size_t level);

/// λ-mass of terminals up to a level, and the certified bound on the rest.
std::pair<Rational, Rational> certified_mass(const DdgTree& tree, std::size_t level);

struct DdgExtraction {
  std::vector<std::size_t> labels;
  std::uint64_t consumed = 0;
  /// End positions n_0 < n_1 < … of the S-blocks.
  std::vector<std::uint64_t> boundaries;
};

class ExtractionStalled : public ContractViolation {
 public:
  ExtractionStalled(DdgExtraction partial, std::string what);
  DdgExtraction partial;
};

/// Reads x from its current position, emitting a label at each terminal.
DdgExtraction ddg_extract(const DdgTree& tree, BitStream& x, std::uint64_t count, std::uint64_t input_cap);

/// Length of the leading S-block of x (read from the start of the view).
std::uint64_t leading_block_length(const DdgTree& tree, BitStream x, std::uint64_t input_cap);

/// T_S(x): x with its leading S-block removed.
BitStream tree_shift(const DdgTree& tree, const BitStream& x, std::uint64_t input_cap = 1u << 20);

/// Number of complete S-blocks in σ, i.e. |φ_S(σ)|.
std::size_t symbols_in(const DdgTree& tree, const BitString& sigma);

/// φ_S as a generator: one output bit per completed S-block (the low bit of
/// the label index), so output length counts emitted symbols.
Generator ddg_generator(const DdgTree& tree);

}  // namespace xrate
