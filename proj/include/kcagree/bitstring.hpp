#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace kcagree {

/// Finite sequence of bits, ordered lexicographically (a proper prefix sorts
/// first). Bits are stored one per byte; strings in this project are short.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::string_view text);
  BitString(std::size_t count, bool value) : bits_(count, value ? 1 : 0) {}

  /// Big-endian fixed-width encoding of `value` (the MSB comes first).
  static BitString from_uint(std::uint64_t value, std::size_t width);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }

  void push_back(bool b) { bits_.push_back(b ? 1 : 0); }
  void append(const BitString& other);
  void clear() noexcept { bits_.clear(); }
  void reserve(std::size_t n) { bits_.reserve(n); }

  BitString substr(std::size_t pos, std::size_t count = npos) const;
  bool starts_with(const BitString& prefix) const;

  /// Interprets the bits as a big-endian unsigned integer (at most 64 bits).
  std::uint64_t to_uint() const;
  std::size_t popcount() const noexcept;

  std::string to_string() const;

  /// u32 little-endian bit length followed by ceil(len/8) MSB-first bytes.
  std::vector<std::uint8_t> pack() const;
  static BitString unpack(std::span<const std::uint8_t> bytes);

  std::span<const std::uint8_t> raw() const noexcept { return bits_; }

  friend BitString operator+(BitString lhs, const BitString& rhs) {
    lhs.append(rhs);
    return lhs;
  }
  friend bool operator==(const BitString&, const BitString&) = default;
  friend std::strong_ordering operator<=>(const BitString& a, const BitString& b) {
    return a.bits_ <=> b.bits_;
  }

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

 private:
  std::vector<std::uint8_t> bits_;
};

/// All bit strings of length exactly `len`, in lexicographic order.
std::vector<BitString> all_strings(std::size_t len);

/// The self-delimiting pair code 0p1 0p2 ... 0pk 1 x.
struct PairCode {
  BitString pi;
  BitString x;
  BitString encoded;
};

/// Length of the pair code without building it: 2|pi| + 1 + |x|.
inline std::size_t pair_length(std::size_t pi_len, std::size_t x_len) {
  return 2 * pi_len + 1 + x_len;
}

PairCode encode_pair(const BitString& pi, const BitString& x);

/// Throws MalformedPairCode when no 1-marker sits at an even offset.
std::pair<BitString, BitString> decode_pair(const BitString& code);

/// Returns (pi 1 0^k, z or z0) with pair length exactly `ell`. When the
/// length gap is odd, z is extended by a single 0 bit. Throws PadTooSmall if
/// ell < |(pi,z)| + 2.
PairCode pad_pair(const BitString& pi, const BitString& z, std::size_t ell);

}  // namespace kcagree

template <>
struct std::hash<kcagree::BitString> {
  std::size_t operator()(const kcagree::BitString& s) const noexcept;
};
