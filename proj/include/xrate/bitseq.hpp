#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xrate/rational.hpp"

namespace xrate {

/// Finite word over {0,1}. Index 0 is the leftmost (most significant) bit.
class BitString {
 public:
  BitString() = default;
  BitString(std::initializer_list<int> bits);
  explicit BitString(std::vector<std::uint8_t> bits);

  /// Parses "0110"; "" and "-" denote the empty string.
  static BitString parse(std::string_view text);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }

  void push_back(bool b) { bits_.push_back(b ? 1 : 0); }
  void append(const BitString& other) {
    bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
  }
  void reserve(std::size_t n) { bits_.reserve(n); }
  void truncate(std::size_t n) {
    if (n < bits_.size()) bits_.resize(n);
  }

  BitString concat(const BitString& other) const;
  BitString with(bool b) const;
  /// First min(n, size()) bits.
  BitString prefix(std::size_t n) const;
  /// Bits [from, to) clamped to size().
  BitString slice(std::size_t from, std::size_t to) const;

  /// this ⪯ other.
  bool is_prefix_of(const BitString& other) const noexcept;
  std::size_t count_ones() const noexcept;

  /// "0110"; the empty string renders as "".
  std::string to_string() const;

  const std::vector<std::uint8_t>& raw() const noexcept { return bits_; }

  friend bool operator==(const BitString&, const BitString&) = default;
  /// Length-first, then lexicographic. Within a fixed length this is <_lex.
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) noexcept;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Length of the longest common prefix.
std::size_t common_prefix_length(const BitString& a, const BitString& b) noexcept;

/// All strings of length n in lexicographic order. n <= 24.
std::vector<BitString> all_strings(std::size_t n);

/// The length-n string whose binary value is rank.
BitString from_rank(std::uint64_t rank, std::size_t n);

/// Number of strings of the same length lexicographically below sigma.
Natural lex_rank(const BitString& sigma);

/// Closed interval with exact rational endpoints.
struct RatInterval {
  Rational lo;
  Rational hi;

  Rational width() const { return hi - lo; }
  /// other ⊆ *this.
  bool contains(const RatInterval& other) const { return lo <= other.lo && other.hi <= hi; }
  friend bool operator==(const RatInterval&, const RatInterval&) = default;
};

std::string to_string(const RatInterval& iv);

/// [Σ 2^-(i+1) σ(i), that + 2^-|σ|].
RatInterval dyadic_interval(const BitString& sigma);

namespace detail {

/// Backing store of a stream: bits are produced on demand and memoized so that
/// every view replays the same sequence.
class Tape {
 public:
  virtual ~Tape() = default;
  /// Ensures at least n bits are buffered. Returns false if the source ends first.
  bool fill_to(std::uint64_t n);
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  virtual std::string id() const = 0;

 protected:
  /// Appends one bit; returns false at end of source.
  virtual bool produce() = 0;
  std::vector<std::uint8_t> bits_;
};

}  // namespace detail

/// Pull-based, possibly infinite bit source with replay.
///
/// Copies and shifted views share the underlying tape, so a stream must not be
/// consumed from several threads at once; concurrent experiments each build
/// their own stream.
class BitStream {
 public:
  explicit BitStream(std::shared_ptr<detail::Tape> tape, std::uint64_t offset = 0);

  /// Finite stream over a fixed string.
  static BitStream from_bits(BitString bits, std::string id = "literal");

  /// Next bit, or nullopt when a finite stream is exhausted.
  std::optional<bool> next();
  /// Bit i of this view, independent of the read position.
  std::optional<bool> at(std::uint64_t i);
  /// Up to n bits from the start of the view; shorter only for finite sources.
  BitString prefix(std::uint64_t n);
  /// Bits [from, to) of the view.
  BitString slice(std::uint64_t from, std::uint64_t to);

  std::uint64_t position() const noexcept { return pos_; }
  void reset() noexcept { pos_ = 0; }

  /// View with the first k bits dropped, read position at its start.
  BitStream shifted(std::uint64_t k) const;
  std::uint64_t offset() const noexcept { return offset_; }

  /// Provenance label (seed, file, measure).
  std::string id() const;

 private:
  std::shared_ptr<detail::Tape> tape_;
  std::uint64_t offset_ = 0;
  std::uint64_t pos_ = 0;
};

/// Reads the bitstream file format: optional "RNDX0001" header followed by a
/// little-endian u64 bit count, then bytes unpacked MSB first.
BitString read_bitstream_file(const std::filesystem::path& path);
/// Writes with the header so lengths not divisible by 8 survive.
void write_bitstream_file(const std::filesystem::path& path, const BitString& bits,
                          bool with_header = true);

}  // namespace xrate
