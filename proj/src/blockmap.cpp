#include "xrate/blockmap.hpp"

#include <fstream>
#include <sstream>

#include "xrate/error.hpp"

namespace xrate {

namespace {

std::uint64_t small_rank(const BitString& s, std::size_t from, std::size_t len) {
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < len; ++i) r = (r << 1) | (s[from + i] ? 1U : 0U);
  return r;
}

}  // namespace

BlockMap::BlockMap(std::size_t n, std::vector<BitString> table) : n_(n), table_(std::move(table)) {
  if (n_ == 0 || n_ > 20) throw InvalidInput("block length must be in 1..20");
  if (table_.size() != (std::size_t{1} << n_)) {
    throw InvalidInput("partial table: " + std::to_string(table_.size()) + " of " +
                       std::to_string(std::size_t{1} << n_) + " entries");
  }
  bool nontrivial = false;
  for (const auto& t : table_) nontrivial = nontrivial || !t.empty();
  if (!nontrivial) throw InvalidInput("trivial block map: every block maps to the empty string");
}

const BitString& BlockMap::image(const BitString& block) const {
  if (block.size() != n_) throw InvalidInput("block has length " + std::to_string(block.size()));
  return table_[small_rank(block, 0, n_)];
}

BitString BlockMap::apply(const BitString& sigma) const {
  BitString out;
  const std::size_t blocks = sigma.size() / n_;
  for (std::size_t b = 0; b < blocks; ++b) out.append(table_[small_rank(sigma, b * n_, n_)]);
  return out;
}

Generator BlockMap::generator(std::string name) const {
  Generator g;
  g.name = name.empty() ? std::to_string(n_) + "-block" : std::move(name);
  g.eval = [bm = *this](const BitString& s) { return bm.apply(s); };
  g.block_size = n_;
  return g;
}

BlockMap von_neumann() {
  // Lex order: 00, 01, 10, 11.
  return BlockMap(2, {BitString{}, BitString{1}, BitString{0}, BitString{}});
}

BlockMap make_block_map(std::size_t n, const std::vector<std::pair<BitString, BitString>>& entries) {
  if (n == 0 || n > 20) throw InvalidInput("block length must be in 1..20");
  std::vector<BitString> table(std::size_t{1} << n);
  std::vector<bool> seen(table.size(), false);
  for (const auto& [in, out] : entries) {
    if (in.size() != n) throw InvalidInput("table input '" + in.to_string() + "' is not of length " + std::to_string(n));
    const auto r = small_rank(in, 0, n);
    if (seen[r]) throw InvalidInput("duplicate table input '" + in.to_string() + "'");
    seen[r] = true;
    table[r] = out;
  }
  for (std::size_t r = 0; r < seen.size(); ++r) {
    if (!seen[r]) throw InvalidInput("partial table: no entry for '" + from_rank(r, n).to_string() + "'");
  }
  return BlockMap(n, std::move(table));
}

BlockMap read_block_map_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open block table " + path.string());
  std::vector<std::pair<BitString, BitString>> entries;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw InvalidInput(path.string() + ":" + std::to_string(lineno) + ": expected input<TAB>output");
    }
    entries.emplace_back(BitString::parse(line.substr(0, tab)), BitString::parse(line.substr(tab + 1)));
  }
  if (entries.empty()) throw InvalidInput("block table " + path.string() + " is empty");
  return make_block_map(entries.front().first.size(), entries);
}

void write_block_map_file(const std::filesystem::path& path, const BlockMap& bm) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidInput("cannot write block table " + path.string());
  for (std::size_t r = 0; r < bm.table().size(); ++r) {
    const auto& img = bm.table()[r];
    out << from_rank(r, bm.n()).to_string() << '\t' << (img.empty() ? "-" : img.to_string()) << '\n';
  }
}

Rational block_rate(const BlockMap& bm, const Measure& mu) {
  const auto step = mu.step();
  if (!step || (*step != 1 && *step != bm.n())) {
    throw InvalidInput("block rate needs a step-Bernoulli measure with step 1 or " + std::to_string(bm.n()) +
                       "; got " + mu.config());
  }
  if (!mu.is_positive()) throw InvalidInput("block rate needs a positive measure");
  Rational total = 0;
  for (std::uint64_t r = 0; r < bm.table().size(); ++r) {
    const auto len = bm.table()[r].size();
    if (len == 0) continue;
    total += cylinder_mass(mu, from_rank(r, bm.n())) * static_cast<unsigned long>(len);
  }
  total /= static_cast<unsigned long>(bm.n());
  return total;
}

bool is_minimal(const BlockMap& bm) {
  const std::size_t n = bm.n();
  if (n > 8) throw InvalidInput("minimality check is exhaustive and limited to n <= 8");
  for (std::size_t d = 1; d < n; ++d) {
    if (n % d != 0) continue;
    const std::size_t reps = n / d;
    std::vector<BitString> small(std::size_t{1} << d);
    bool ok = true;
    for (std::uint64_t r = 0; r < small.size() && ok; ++r) {
      const BitString rho = from_rank(r, d);
      BitString repeated;
      for (std::size_t i = 0; i < reps; ++i) repeated.append(rho);
      const BitString& img = bm.image(repeated);
      if (img.size() % reps != 0) {
        ok = false;
        break;
      }
      small[r] = img.prefix(img.size() / reps);
    }
    for (std::uint64_t r = 0; r < bm.table().size() && ok; ++r) {
      const BitString sigma = from_rank(r, n);
      BitString expect;
      for (std::size_t i = 0; i < reps; ++i) expect.append(small[small_rank(sigma, i * d, d)]);
      ok = expect == bm.table()[r];
    }
    if (ok) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

PeresExtractor::PeresExtractor(std::size_t k) : k_(k) {
  if (k == 0) throw InvalidInput("Peres iteration depth must be >= 1");
}

namespace {

void peres_into(const std::vector<std::uint8_t>& x, std::size_t k, BitString& out) {
  const std::size_t pairs = x.size() / 2;
  std::vector<std::uint8_t> u;
  std::vector<std::uint8_t> v;
  if (k > 1) {
    u.reserve(pairs);
    v.reserve(pairs);
  }
  for (std::size_t i = 0; i < pairs; ++i) {
    const std::uint8_t a = x[2 * i];
    const std::uint8_t b = x[2 * i + 1];
    if (a != b) out.push_back(b != 0);
    if (k > 1) {
      u.push_back(a ^ b);
      if (a == b) v.push_back(b);
    }
  }
  if (k > 1) {
    peres_into(u, k - 1, out);
    peres_into(v, k - 1, out);
  }
}

}  // namespace

BitString PeresExtractor::operator()(const BitString& x) const {
  BitString out;
  peres_into(x.raw(), k_, out);
  return out;
}

StringMap PeresExtractor::as_map() const {
  return [self = *this](const BitString& x) { return self(x); };
}

PeresExtractor peres(std::size_t k) { return PeresExtractor(k); }

BitStream n_shift(std::size_t n, const BitStream& x) {
  if (n == 0) throw InvalidInput("n-shift needs n >= 1");
  return x.shifted(n);
}

}  // namespace xrate
