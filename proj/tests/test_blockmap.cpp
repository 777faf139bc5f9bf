#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>

#include "oracles.hpp"
#include "xrate/blockmap.hpp"
#include "xrate/bundles.hpp"
#include "xrate/error.hpp"

using namespace xrate;

namespace {

BlockMap random_block_map(std::mt19937_64& rng, std::size_t n) {
  while (true) {
    std::vector<BitString> table;
    for (std::size_t r = 0; r < (std::size_t{1} << n); ++r) table.push_back(oracle::random_string(rng, rng() % 4));
    bool nontrivial = false;
    for (const auto& t : table) nontrivial = nontrivial || !t.empty();
    if (nontrivial) return BlockMap(n, table);
  }
}

/// Iterated von Neumann written over character strings.
std::string peres_oracle(const std::string& x, std::size_t k) {
  if (k == 0) return "";
  std::string out;
  std::string u;
  std::string v;
  for (std::size_t i = 0; i + 1 < x.size(); i += 2) {
    if (x[i] != x[i + 1]) {
      out += x[i + 1];
      u += '1';
    } else {
      u += '0';
      v += x[i];
    }
  }
  return out + peres_oracle(u, k - 1) + peres_oracle(v, k - 1);
}

}  // namespace

TEST_CASE("von Neumann table") {
  const BlockMap vn = von_neumann();
  CHECK(vn.n() == 2);
  CHECK(vn.image(BitString::parse("10")).to_string() == "0");
  CHECK(vn.image(BitString::parse("01")).to_string() == "1");
  CHECK(vn.image(BitString::parse("00")).empty());
  CHECK(vn.image(BitString::parse("11")).empty());
  CHECK(vn.apply(BitString::parse("1001110")).to_string() == "01");
  CHECK(is_minimal(vn));
}

TEST_CASE("invalid tables") {
  CHECK_THROWS_WITH_AS(BlockMap(2, {BitString{}, BitString{1}}), doctest::Contains("partial table"), InvalidInput);
  CHECK_THROWS_WITH_AS(BlockMap(1, {BitString{}, BitString{}}), doctest::Contains("trivial block map"), InvalidInput);
  CHECK_THROWS_AS(make_block_map(2, {{BitString{0, 0}, BitString{1}}}), InvalidInput);
}

TEST_CASE("block rate equals Avg at multiples of n and bounds the rest") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 2 + trial % 2;
    const BlockMap bm = random_block_map(rng, n);
    const Generator g = bm.generator();
    const Measure mu = Measure::step_bernoulli(n, oracle::random_table(rng, n));
    const Rational rate = block_rate(bm, mu);
    for (std::size_t k = 1; k * n <= 12; ++k) {
      CHECK(avg_oi(g, mu, n * k) == rate);
      for (std::size_t i = 1; i < n; ++i) CHECK(avg_oi(g, mu, n * k + i) <= rate);
    }
  }
}

TEST_CASE("block rate needs a compatible positive measure") {
  const BlockMap vn = von_neumann();
  CHECK(block_rate(vn, Measure::bernoulli(make_rational(3, 10))) == make_rational(21, 100));
  CHECK_THROWS_AS(block_rate(vn, bundled_markov()), InvalidInput);
  CHECK_THROWS_AS(block_rate(vn, Measure::step_bernoulli(3, std::vector<Rational>(8, make_rational(1, 8)))), InvalidInput);
}

TEST_CASE("minimality") {
  // Von Neumann written as a 4-block map reduces to the 2-block map.
  std::vector<std::pair<BitString, BitString>> entries;
  const BlockMap vn = von_neumann();
  for (const auto& s : all_strings(4)) entries.emplace_back(s, vn.apply(s));
  const BlockMap vn4 = make_block_map(4, entries);
  CHECK_FALSE(is_minimal(vn4));
  CHECK(block_rate(vn4, Measure::bernoulli(make_rational(1, 4))) == make_rational(3, 16));
  std::mt19937_64 rng(6);
  CHECK_THROWS_AS(is_minimal(random_block_map(rng, 9)), InvalidInput);
}

TEST_CASE("table files round trip") {
  const auto path = std::filesystem::temp_directory_path() / "xrate_block_table.tsv";
  std::mt19937_64 rng(1);
  const BlockMap bm = random_block_map(rng, 3);
  write_block_map_file(path, bm);
  CHECK(read_block_map_file(path) == bm);
  std::filesystem::remove(path);
}

TEST_CASE("Peres iteration matches a direct recursion") {
  std::mt19937_64 rng(13);
  for (std::size_t k = 1; k <= 5; ++k) {
    const PeresExtractor p = peres(k);
    for (int trial = 0; trial < 50; ++trial) {
      const BitString x = oracle::random_string(rng, rng() % 64);
      CHECK(p(x).to_string() == peres_oracle(x.to_string(), k));
    }
  }
  // Depth 1 is von Neumann.
  const BitString x = sample(Measure::lebesgue(), 2, 1000);
  CHECK(peres(1)(x) == von_neumann().apply(x));
  CHECK_THROWS_AS(peres(0), InvalidInput);
}

TEST_CASE("n-shift drops n bits") {
  BitStream x = BitStream::from_bits(BitString::parse("110100"));
  CHECK(n_shift(2, x).prefix(10).to_string() == "0100");
  CHECK_THROWS_AS(n_shift(0, x), InvalidInput);
}
