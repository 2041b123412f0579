#include "kcagree/bitstring.hpp"

#include <algorithm>
#include <stdexcept>

#include "kcagree/error.hpp"

namespace kcagree {

BitString::BitString(std::string_view text) {
  bits_.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1')
      throw ValidationError("bit string may only contain '0' and '1': \"" +
                            std::string(text) + "\"");
    bits_.push_back(c == '1' ? 1 : 0);
  }
}

BitString BitString::from_uint(std::uint64_t value, std::size_t width) {
  BitString out;
  out.bits_.resize(width);
  for (std::size_t i = 0; i < width; ++i) {
    const std::size_t shift = width - 1 - i;
    out.bits_[i] = shift < 64 ? static_cast<std::uint8_t>((value >> shift) & 1U) : 0;
  }
  return out;
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::substr(std::size_t pos, std::size_t count) const {
  BitString out;
  if (pos >= bits_.size()) return out;
  const std::size_t end = count == npos ? bits_.size() : std::min(bits_.size(), pos + count);
  out.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                   bits_.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

bool BitString::starts_with(const BitString& prefix) const {
  return prefix.size() <= size() &&
         std::equal(prefix.bits_.begin(), prefix.bits_.end(), bits_.begin());
}

std::uint64_t BitString::to_uint() const {
  if (bits_.size() > 64) throw ValidationError("bit string longer than 64 bits");
  std::uint64_t v = 0;
  for (auto b : bits_) v = (v << 1) | b;
  return v;
}

std::size_t BitString::popcount() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::string BitString::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<std::uint8_t> BitString::pack() const {
  const auto len = static_cast<std::uint32_t>(bits_.size());
  std::vector<std::uint8_t> out(4 + (bits_.size() + 7) / 8, 0);
  for (int i = 0; i < 4; ++i) out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(len >> (8 * i));
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out[4 + i / 8] |= static_cast<std::uint8_t>(0x80U >> (i % 8));
  return out;
}

BitString BitString::unpack(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw ValidationError("packed bit string lacks its length header");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(bytes[static_cast<std::size_t>(i)]) << (8 * i);
  if (bytes.size() != 4 + (static_cast<std::size_t>(len) + 7) / 8)
    throw ValidationError("packed bit string has the wrong byte count");
  BitString out;
  out.bits_.resize(len);
  for (std::size_t i = 0; i < len; ++i)
    out.bits_[i] = (bytes[4 + i / 8] >> (7 - i % 8)) & 1U;
  return out;
}

std::vector<BitString> all_strings(std::size_t len) {
  if (len > 24) throw DomainTooLarge("refusing to enumerate strings longer than 24 bits");
  std::vector<BitString> out;
  out.reserve(std::size_t{1} << len);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) out.push_back(BitString::from_uint(v, len));
  return out;
}

PairCode encode_pair(const BitString& pi, const BitString& x) {
  BitString enc;
  enc.reserve(pair_length(pi.size(), x.size()));
  for (std::size_t i = 0; i < pi.size(); ++i) {
    enc.push_back(false);
    enc.push_back(pi[i]);
  }
  enc.push_back(true);
  enc.append(x);
  return {pi, x, std::move(enc)};
}

std::pair<BitString, BitString> decode_pair(const BitString& code) {
  BitString pi;
  std::size_t pos = 0;
  while (pos < code.size()) {
    if (code[pos]) return {std::move(pi), code.substr(pos + 1)};
    if (pos + 1 >= code.size()) break;
    pi.push_back(code[pos + 1]);
    pos += 2;
  }
  throw MalformedPairCode("pair code \"" + code.to_string() + "\" has no terminating 1-marker");
}

PairCode pad_pair(const BitString& pi, const BitString& z, std::size_t ell) {
  const std::size_t base = pair_length(pi.size(), z.size());
  if (ell < base + 2)
    throw PadTooSmall("cannot pad a pair of length " + std::to_string(base) + " to " +
                      std::to_string(ell));
  // 2(|pi| + 1 + k) + 1 + |z| + ext = ell, so ext is the parity of the gap.
  const std::size_t gap = ell - base;
  const std::size_t ext = gap % 2;
  const std::size_t k = (gap - 2 - ext) / 2;
  BitString pi2 = pi;
  pi2.push_back(true);
  pi2.append(BitString(k, false));
  BitString z2 = z;
  if (ext) z2.push_back(false);
  return encode_pair(pi2, z2);
}

}  // namespace kcagree

std::size_t std::hash<kcagree::BitString>::operator()(const kcagree::BitString& s) const noexcept {
  std::size_t h = 1469598103934665603ULL ^ s.size();
  for (auto b : s.raw()) h = (h ^ b) * 1099511628211ULL;
  return h;
}
