#include "xrate/ddg.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace xrate {

namespace {

struct TrieNode {
  std::array<std::int64_t, 2> child{-1, -1};
  std::int64_t label = -1;
};

/// Per-level layout of a Knuth–Yao tree: labels of the terminals (in slot
/// order) and the number of internal nodes left on the level.
struct KyLevel {
  std::vector<std::size_t> terminal_labels;
  std::uint64_t internal = 0;
};

}  // namespace

struct DdgTree::Impl {
  std::vector<std::string> labels;
  std::vector<Rational> distribution;
  Rational tail_tol;

  // Finite representation.
  bool finite = true;
  std::vector<TrieNode> trie;
  std::vector<std::pair<BitString, std::size_t>> terminals;
  std::vector<std::uint64_t> level_counts;

  // Lazy Knuth–Yao representation; level 0 is the root.
  mutable std::mutex mutex;
  mutable std::vector<KyLevel> levels;
  mutable std::vector<Rational> fractions;

  const KyLevel& level(std::size_t i) const {
    std::lock_guard lock(mutex);
    while (levels.size() <= i) {
      const std::uint64_t nodes = 2 * levels.back().internal;
      KyLevel next;
      for (std::size_t j = 0; j < fractions.size(); ++j) {
        fractions[j] *= 2;
        if (fractions[j] >= 1) {
          fractions[j] -= 1;
          next.terminal_labels.push_back(j);
        }
      }
      if (next.terminal_labels.size() > nodes) {
        throw ContractViolation("Knuth-Yao layout overflow at level " + std::to_string(levels.size()));
      }
      next.internal = nodes - next.terminal_labels.size();
      levels.push_back(std::move(next));
    }
    return levels[i];
  }
};

bool DdgTree::is_finite() const noexcept { return impl_->finite; }
std::size_t DdgTree::alphabet_size() const noexcept { return impl_->labels.size(); }
const std::vector<std::string>& DdgTree::labels() const noexcept { return impl_->labels; }
const std::vector<Rational>& DdgTree::distribution() const noexcept { return impl_->distribution; }
const Rational& DdgTree::tail_tol() const noexcept { return impl_->tail_tol; }

std::optional<std::size_t> DdgTree::step(Cursor& cursor, bool bit) const {
  const auto b = bit ? 1 : 0;
  if (impl_->finite) {
    const auto next = impl_->trie[cursor.index].child[b];
    if (next < 0) throw ContractViolation("walk left the tree");
    ++cursor.level;
    const auto& node = impl_->trie[static_cast<std::size_t>(next)];
    if (node.label >= 0) {
      cursor = {};
      return static_cast<std::size_t>(node.label);
    }
    cursor.index = static_cast<std::uint64_t>(next);
    return std::nullopt;
  }
  const KyLevel& here = impl_->level(cursor.level);
  const std::uint64_t internal_index = cursor.index - here.terminal_labels.size();
  const std::uint64_t child = 2 * internal_index + static_cast<std::uint64_t>(b);
  const KyLevel& below = impl_->level(cursor.level + 1);
  if (child < below.terminal_labels.size()) {
    const auto label = below.terminal_labels[child];
    cursor = {};
    return label;
  }
  cursor.level += 1;
  cursor.index = child;
  return std::nullopt;
}

std::uint64_t DdgTree::terminals_at_level(std::size_t level) const {
  if (impl_->finite) return level < impl_->level_counts.size() ? impl_->level_counts[level] : 0;
  return impl_->level(level).terminal_labels.size();
}

std::vector<std::pair<BitString, std::size_t>> DdgTree::terminals_up_to(std::size_t max_level) const {
  std::vector<std::pair<BitString, std::size_t>> out;
  if (impl_->finite) {
    for (const auto& t : impl_->terminals)
      if (t.first.size() <= max_level) out.push_back(t);
    return out;
  }
  std::vector<BitString> nodes{BitString{}};
  for (std::size_t i = 0; i <= max_level && !nodes.empty(); ++i) {
    const KyLevel& lvl = impl_->level(i);
    std::vector<BitString> next;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j < lvl.terminal_labels.size()) {
        out.emplace_back(nodes[j], lvl.terminal_labels[j]);
      } else if (i < max_level) {
        next.push_back(nodes[j].with(false));
        next.push_back(nodes[j].with(true));
      }
    }
    nodes = std::move(next);
  }
  return out;
}

const std::vector<std::pair<BitString, std::size_t>>& DdgTree::terminals() const {
  if (!impl_->finite) throw InvalidInput("terminal list requested from an infinite tree");
  return impl_->terminals;
}

std::optional<std::size_t> DdgTree::label_of(const BitString& sigma) const {
  Cursor c;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (impl_->finite && impl_->trie[c.index].child[sigma[i] ? 1 : 0] < 0) return std::nullopt;
    if (auto label = step(c, sigma[i])) {
      return i + 1 == sigma.size() ? label : std::nullopt;
    }
  }
  return std::nullopt;
}

std::size_t DdgTree::min_terminal_length() const {
  for (std::size_t i = 1;; ++i) {
    if (terminals_at_level(i) > 0) return i;
  }
}

std::size_t DdgTree::depth() const {
  if (!impl_->finite) throw InvalidInput("infinite tree has no maximal depth");
  return impl_->level_counts.size() - 1;
}

// ---------------------------------------------------------------------------

DdgTree make_ddg(const std::vector<std::pair<BitString, std::string>>& terminals) {
  auto impl = std::make_shared<DdgTree::Impl>();
  impl->tail_tol = 0;
  impl->trie.emplace_back();
  std::map<std::string, std::size_t> index;
  for (const auto& [node, label] : terminals) {
    if (node.empty()) {
      throw InvalidInput("a terminal at the root gives a degenerate one-outcome tree");
    }
    auto [it, inserted] = index.emplace(label, impl->labels.size());
    if (inserted) {
      impl->labels.push_back(label);
      impl->distribution.emplace_back(0);
    }
    std::size_t cur = 0;
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (impl->trie[cur].label >= 0) {
        throw InvalidInput("terminal set is not prefix-free: '" + node.to_string() + "' extends a terminal");
      }
      const auto b = node[i] ? 1 : 0;
      if (impl->trie[cur].child[b] < 0) {
        impl->trie[cur].child[b] = static_cast<std::int64_t>(impl->trie.size());
        impl->trie.emplace_back();
      }
      cur = static_cast<std::size_t>(impl->trie[cur].child[b]);
    }
    if (impl->trie[cur].label >= 0 || impl->trie[cur].child[0] >= 0 || impl->trie[cur].child[1] >= 0) {
      throw InvalidInput("terminal set is not prefix-free at '" + node.to_string() + "'");
    }
    impl->trie[cur].label = static_cast<std::int64_t>(it->second);
    impl->terminals.emplace_back(node, it->second);
    impl->distribution[it->second] += pow2_inv(node.size());
    if (impl->level_counts.size() <= node.size()) impl->level_counts.resize(node.size() + 1, 0);
    ++impl->level_counts[node.size()];
  }
  if (impl->labels.empty()) throw InvalidInput("a DDG tree needs at least one terminal");
  Rational total = 0;
  for (const auto& p : impl->distribution) total += p;
  if (total != 1) {
    Rational gap = total - 1;
    throw InvalidInput(std::string(gap < 0 ? "mass deficit " : "mass excess ") + to_string(Rational(abs(gap))));
  }
  std::stable_sort(impl->terminals.begin(), impl->terminals.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  return DdgTree(std::move(impl));
}

DdgTree knuth_yao(const std::vector<Rational>& dist, const Rational& tail_tol) {
  if (dist.size() < 2) throw InvalidInput("Knuth-Yao needs at least two outcomes");
  Rational total = 0;
  for (const auto& p : dist) {
    if (p <= 0 || p > 1) throw InvalidInput("distribution entries must lie in (0,1], got " + to_string(p));
    if (p == 1) throw InvalidInput("degenerate one-outcome distribution");
    total += p;
  }
  if (total != 1) throw InvalidInput("distribution sums to " + to_string(total) + ", not 1");
  if (tail_tol < 0) throw InvalidInput("tail tolerance must be non-negative");

  bool dyadic = true;
  for (const auto& p : dist) {
    const auto& den = p.get_den();
    dyadic = dyadic && mpz_popcount(den.get_mpz_t()) == 1;
  }

  auto lazy = std::make_shared<DdgTree::Impl>();
  lazy->finite = false;
  lazy->distribution = dist;
  lazy->fractions = dist;
  lazy->tail_tol = tail_tol;
  for (std::size_t j = 0; j < dist.size(); ++j) lazy->labels.push_back("a" + std::to_string(j + 1));
  lazy->levels.push_back(KyLevel{{}, 1});
  DdgTree tree(lazy);
  if (!dyadic) return tree;

  std::size_t deepest = 0;
  for (const auto& p : dist) {
    deepest = std::max<std::size_t>(deepest, mpz_sizeinbase(p.get_den_mpz_t(), 2) - 1);
  }
  std::vector<std::pair<BitString, std::string>> terms;
  for (const auto& [node, label] : tree.terminals_up_to(deepest)) terms.emplace_back(node, lazy->labels[label]);
  // Keep the label numbering a1..ak even if a label first appears deep.
  std::stable_sort(terms.begin(), terms.end(), [&](const auto& a, const auto& b) {
    return std::stoul(a.second.substr(1)) < std::stoul(b.second.substr(1));
  });
  DdgTree finite = make_ddg(terms);
  auto impl = std::const_pointer_cast<DdgTree::Impl>(finite.impl_);
  impl->tail_tol = tail_tol;
  return finite;
}

DdgTree parse_tree(std::string_view config, const Rational& tail_tol) {
  auto starts_with = [&](std::string_view p) { return config.substr(0, p.size()) == p; };
  if (starts_with("ky:") || starts_with("dist:")) {
    std::string_view rest = config.substr(config.find(':') + 1);
    std::vector<Rational> dist;
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      dist.push_back(parse_rational(rest.substr(0, comma)));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    return knuth_yao(dist, tail_tol);
  }
  return read_ddg_file(std::filesystem::path(std::string(config)));
}

DdgTree read_ddg_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open tree file " + path.string());
  std::vector<std::pair<BitString, std::string>> terms;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab + 1 == line.size()) {
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected node<TAB>label");
    }
    terms.emplace_back(BitString::parse(line.substr(0, tab)), line.substr(tab + 1));
  }
  return make_ddg(terms);
}

void write_ddg_file(const std::filesystem::path& path, const DdgTree& tree) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write tree file " + path.string());
  for (const auto& [node, label] : tree.terminals()) out << node.to_string() << '\t' << tree.labels()[label] << '\n';
}

// ---------------------------------------------------------------------------

AvgRt avg_rt(const DdgTree& tree, std::size_t level) {
  AvgRt out;
  out.level = level;
  for (std::size_t i = 1; i <= level; ++i) {
    const auto count = tree.terminals_at_level(i);
    if (count != 0) out.value += pow2_inv(i) * static_cast<unsigned long>(i * count);
  }
  if (tree.is_finite() && level >= tree.depth()) {
    out.exact = true;
    out.tail_bound = 0;
  } else {
    // At most k terminals per level beyond the cut: k·Σ_{i>L} i·2^-i = k(L+2)/2^L.
    out.tail_bound = pow2_inv(level) * static_cast<unsigned long>(tree.alphabet_size() * (level + 2));
    if (tree.is_finite()) {
      // Finite trees can have more than k terminals per level; bound by the
      // remaining mass times the deepest level.
      Rational rest = 0;
      for (std::size_t i = level + 1; i <= tree.depth(); ++i)
        rest += pow2_inv(i) * static_cast<unsigned long>(i * tree.terminals_at_level(i));
      out.tail_bound = rest;
    }
  }
  return out;
}

AvgRt avg_rt(const DdgTree& tree) {
  if (tree.is_finite()) return avg_rt(tree, tree.depth());
  constexpr std::size_t kMaxLevel = 4096;
  for (std::size_t level = 1; level <= kMaxLevel; ++level) {
    const Rational bound = pow2_inv(level) * static_cast<unsigned long>(tree.alphabet_size() * (level + 2));
    if (bound <= tree.tail_tol()) return avg_rt(tree, level);
  }
  throw ContractViolation("AvgRT remainder not certified within tail tolerance " + to_string(tree.tail_tol()));
}

std::pair<Rational, Rational> certified_mass(const DdgTree& tree, std::size_t level) {
  Rational mass = 0;
  for (std::size_t i = 1; i <= level; ++i) {
    const auto count = tree.terminals_at_level(i);
    if (count != 0) mass += pow2_inv(i) * static_cast<unsigned long>(count);
  }
  Rational bound = 0;
  if (!tree.is_finite() || level < tree.depth()) {
    bound = pow2_inv(level) * static_cast<unsigned long>(tree.alphabet_size());
    if (tree.is_finite()) bound = 1 - mass;
  }
  return {mass, bound};
}

// ---------------------------------------------------------------------------

ExtractionStalled::ExtractionStalled(DdgExtraction partial_, std::string what)
    : ContractViolation(std::move(what)), partial(std::move(partial_)) {}

DdgExtraction ddg_extract(const DdgTree& tree, BitStream& x, std::uint64_t count, std::uint64_t input_cap) {
  DdgExtraction out;
  if (count == 0) return out;
  out.labels.reserve(count);
  out.boundaries.reserve(count);
  DdgTree::Cursor cursor;
  while (out.labels.size() < count) {
    if (out.consumed >= input_cap) {
      throw ExtractionStalled(std::move(out), "stalled: input cap " + std::to_string(input_cap) +
                                                  " reached mid-symbol");
    }
    const auto bit = x.next();
    if (!bit) {
      throw ExtractionStalled(std::move(out), "stalled: input stream ended mid-symbol");
    }
    ++out.consumed;
    if (auto label = tree.step(cursor, *bit)) {
      out.labels.push_back(*label);
      out.boundaries.push_back(out.consumed);
    }
  }
  return out;
}

std::uint64_t leading_block_length(const DdgTree& tree, BitStream x, std::uint64_t input_cap) {
  x.reset();
  DdgTree::Cursor cursor;
  for (std::uint64_t i = 0; i < input_cap; ++i) {
    const auto bit = x.next();
    if (!bit) break;
    if (tree.step(cursor, *bit)) return i + 1;
  }
  DdgExtraction partial;
  partial.consumed = x.position();
  throw ExtractionStalled(partial, "stalled: no terminal within " + std::to_string(partial.consumed) + " bits");
}

BitStream tree_shift(const DdgTree& tree, const BitStream& x, std::uint64_t input_cap) {
  return x.shifted(leading_block_length(tree, x, input_cap));
}

std::size_t symbols_in(const DdgTree& tree, const BitString& sigma) {
  std::size_t count = 0;
  DdgTree::Cursor cursor;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (tree.step(cursor, sigma[i])) ++count;
  }
  return count;
}

Generator ddg_generator(const DdgTree& tree) {
  Generator g;
  g.name = "ddg";
  g.eval = [tree](const BitString& sigma) {
    BitString out;
    DdgTree::Cursor cursor;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      if (auto label = tree.step(cursor, sigma[i])) out.push_back((*label & 1U) != 0);
    }
    return out;
  };
  return g;
}

}  // namespace xrate
