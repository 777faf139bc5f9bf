#include "xrate/bitseq.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>
#include <iterator>

#include "xrate/error.hpp"

namespace xrate {

BitString::BitString(std::initializer_list<int> bits) {
  bits_.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw InvalidInput("bit values must be 0 or 1");
    bits_.push_back(static_cast<std::uint8_t>(b));
  }
}

BitString::BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) {
    if (b > 1) throw InvalidInput("bit values must be 0 or 1");
  }
}

BitString BitString::parse(std::string_view text) {
  BitString out;
  if (text == "-") return out;
  out.bits_.reserve(text.size());
  for (char c : text) {
    if (c == '0' || c == '1') {
      out.bits_.push_back(static_cast<std::uint8_t>(c - '0'));
    } else {
      throw InvalidInput("not a bit string: '" + std::string(text) + "'");
    }
  }
  return out;
}

BitString BitString::concat(const BitString& other) const {
  BitString out;
  out.bits_.reserve(size() + other.size());
  out.bits_ = bits_;
  out.append(other);
  return out;
}

BitString BitString::with(bool b) const {
  BitString out = *this;
  out.push_back(b);
  return out;
}

BitString BitString::prefix(std::size_t n) const {
  n = std::min(n, size());
  return BitString(std::vector<std::uint8_t>(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(n)));
}

BitString BitString::slice(std::size_t from, std::size_t to) const {
  to = std::min(to, size());
  if (from >= to) return {};
  return BitString(std::vector<std::uint8_t>(bits_.begin() + static_cast<std::ptrdiff_t>(from),
                                             bits_.begin() + static_cast<std::ptrdiff_t>(to)));
}

bool BitString::is_prefix_of(const BitString& other) const noexcept {
  return size() <= other.size() && std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

std::size_t BitString::count_ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::strong_ordering operator<=>(const BitString& a, const BitString& b) noexcept {
  if (auto c = a.size() <=> b.size(); c != 0) return c;
  return std::lexicographical_compare_three_way(a.bits_.begin(), a.bits_.end(), b.bits_.begin(),
                                                b.bits_.end());
}

std::size_t common_prefix_length(const BitString& a, const BitString& b) noexcept {
  const auto n = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < n && a[i] == b[i]) ++i;
  return i;
}

BitString from_rank(std::uint64_t rank, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) {
    bits[n - 1 - i] = static_cast<std::uint8_t>((rank >> i) & 1U);
  }
  return BitString(std::move(bits));
}

std::vector<BitString> all_strings(std::size_t n) {
  if (n > 24) throw InvalidInput("refusing to enumerate 2^" + std::to_string(n) + " strings");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t r = 0; r < (std::uint64_t{1} << n); ++r) out.push_back(from_rank(r, n));
  return out;
}

Natural lex_rank(const BitString& sigma) {
  Natural r = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    r <<= 1;
    if (sigma[i]) r += 1;
  }
  return r;
}

std::string to_string(const RatInterval& iv) {
  return "[" + to_string(iv.lo) + ", " + to_string(iv.hi) + "]";
}

RatInterval dyadic_interval(const BitString& sigma) {
  const Rational width = pow2_inv(sigma.size());
  Rational lo = Rational(lex_rank(sigma)) * width;
  lo.canonicalize();
  Rational hi = lo + width;
  return {lo, hi};
}

// ---------------------------------------------------------------------------

namespace detail {

bool Tape::fill_to(std::uint64_t n) {
  while (bits_.size() < n) {
    if (!produce()) return false;
  }
  return true;
}

namespace {

class FixedTape final : public Tape {
 public:
  FixedTape(const BitString& bits, std::string id) : id_(std::move(id)) { bits_ = bits.raw(); }
  std::string id() const override { return id_; }

 protected:
  bool produce() override { return false; }

 private:
  std::string id_;
};

}  // namespace
}  // namespace detail

BitStream::BitStream(std::shared_ptr<detail::Tape> tape, std::uint64_t offset)
    : tape_(std::move(tape)), offset_(offset) {}

BitStream BitStream::from_bits(BitString bits, std::string id) {
  return BitStream(std::make_shared<detail::FixedTape>(bits, std::move(id)));
}

std::optional<bool> BitStream::at(std::uint64_t i) {
  const std::uint64_t abs = offset_ + i;
  if (!tape_->fill_to(abs + 1)) return std::nullopt;
  return tape_->bits()[abs] != 0;
}

std::optional<bool> BitStream::next() {
  auto b = at(pos_);
  if (b) ++pos_;
  return b;
}

BitString BitStream::slice(std::uint64_t from, std::uint64_t to) {
  if (to <= from) return {};
  tape_->fill_to(offset_ + to);
  const auto& bits = tape_->bits();
  const std::uint64_t end = std::min<std::uint64_t>(offset_ + to, bits.size());
  const std::uint64_t begin = std::min<std::uint64_t>(offset_ + from, end);
  return BitString(std::vector<std::uint8_t>(bits.begin() + static_cast<std::ptrdiff_t>(begin),
                                             bits.begin() + static_cast<std::ptrdiff_t>(end)));
}

BitString BitStream::prefix(std::uint64_t n) { return slice(0, n); }

BitStream BitStream::shifted(std::uint64_t k) const { return BitStream(tape_, offset_ + k); }

std::string BitStream::id() const {
  if (offset_ == 0) return tape_->id();
  return tape_->id() + "+" + std::to_string(offset_);
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::array<char, 8> kMagic = {'R', 'N', 'D', 'X', '0', '0', '0', '1'};
}

BitString read_bitstream_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open bitstream file " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  std::size_t body = 0;
  std::uint64_t nbits = 0;
  if (data.size() >= 16 && std::equal(kMagic.begin(), kMagic.end(), data.begin())) {
    for (int i = 7; i >= 0; --i) nbits = (nbits << 8) | data[8 + static_cast<std::size_t>(i)];
    body = 16;
    if (nbits > 8 * (data.size() - body)) {
      throw InvalidInput("bitstream header claims " + std::to_string(nbits) + " bits but file holds " +
                         std::to_string(8 * (data.size() - body)));
    }
  } else {
    nbits = 8 * data.size();
  }

  std::vector<std::uint8_t> bits;
  bits.reserve(nbits);
  for (std::uint64_t i = 0; i < nbits; ++i) {
    const unsigned char byte = data[body + i / 8];
    bits.push_back(static_cast<std::uint8_t>((byte >> (7 - i % 8)) & 1U));
  }
  return BitString(std::move(bits));
}

void write_bitstream_file(const std::filesystem::path& path, const BitString& bits, bool with_header) {
  if (!with_header && bits.size() % 8 != 0) {
    throw InvalidInput("headerless bitstream files must hold a multiple of 8 bits");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("cannot write bitstream file " + path.string());
  if (with_header) {
    out.write(kMagic.data(), kMagic.size());
    std::uint64_t n = bits.size();
    for (int i = 0; i < 8; ++i) {
      out.put(static_cast<char>(n & 0xFFU));
      n >>= 8;
    }
  }
  unsigned char byte = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    byte = static_cast<unsigned char>((byte << 1) | (bits[i] ? 1U : 0U));
    if (i % 8 == 7) {
      out.put(static_cast<char>(byte));
      byte = 0;
    }
  }
  if (bits.size() % 8 != 0) {
    byte = static_cast<unsigned char>(byte << (8 - bits.size() % 8));
    out.put(static_cast<char>(byte));
  }
}

}  // namespace xrate
