#include <doctest.h>

#include <optional>

#include "kcagree/bitstring.hpp"
#include "kcagree/error.hpp"

using namespace kcagree;

namespace {

std::vector<BitString> strings_up_to(std::size_t len) {
  std::vector<BitString> out;
  for (std::size_t l = 0; l <= len; ++l)
    for (auto& s : all_strings(l)) out.push_back(s);
  return out;
}

}  // namespace

TEST_CASE("encode_pair small cases") {
  CHECK(encode_pair(BitString(""), BitString("")).encoded == BitString("1"));
  CHECK(encode_pair(BitString("01"), BitString("1")).encoded == BitString("000111"));
  CHECK(decode_pair(BitString("1")) == std::pair{BitString(""), BitString("")});
  CHECK(decode_pair(BitString("000111")) == std::pair{BitString("01"), BitString("1")});
  CHECK_THROWS_AS(decode_pair(BitString("00")), MalformedPairCode);
  CHECK_THROWS_AS(decode_pair(BitString("")), MalformedPairCode);
  CHECK_THROWS_AS(decode_pair(BitString("0")), MalformedPairCode);
}

TEST_CASE("pair code round trip and length law, lengths up to 4") {
  const auto all = strings_up_to(4);
  for (const auto& pi : all)
    for (const auto& x : all) {
      const auto code = encode_pair(pi, x);
      CHECK(code.encoded.size() == 2 * pi.size() + 1 + x.size());
      CHECK(code.encoded.size() == pair_length(pi.size(), x.size()));
      const auto [p2, x2] = decode_pair(code.encoded);
      CHECK(p2 == pi);
      CHECK(x2 == x);
    }
}

TEST_CASE("pad_pair matches a brute-force solver") {
  const auto all = strings_up_to(3);
  for (const auto& pi : all)
    for (const auto& z : all)
      for (std::size_t ell = 0; ell <= 20; ++ell) {
        const std::size_t base = pair_length(pi.size(), z.size());
        // Brute force: smallest extension first, then k.
        std::optional<std::pair<std::size_t, std::size_t>> want;
        for (std::size_t ext = 0; ext <= 1 && !want; ++ext)
          for (std::size_t k = 0; k <= ell; ++k)
            if (2 * (pi.size() + 1 + k) + 1 + z.size() + ext == ell) {
              want = {{k, ext}};
              break;
            }
        if (!want) {
          CHECK_THROWS_AS(pad_pair(pi, z, ell), PadTooSmall);
          continue;
        }
        REQUIRE(ell >= base + 2);
        const auto p = pad_pair(pi, z, ell);
        CHECK(p.encoded.size() == ell);
        CHECK(p.pi == pi + BitString("1") + BitString(want->first, false));
        CHECK(p.x == z + BitString(want->second, false));
        CHECK(p.encoded == encode_pair(p.pi, p.x).encoded);
        CHECK(pad_pair(pi, z, ell).encoded == p.encoded);
      }
  const auto p = pad_pair(BitString("0"), BitString("1"), 8);
  CHECK(p.pi == BitString("010"));
  CHECK(p.x == BitString("1"));
}

TEST_CASE("byte packing") {
  for (const auto& s : strings_up_to(10)) CHECK(BitString::unpack(s.pack()) == s);
  const auto bytes = BitString("101").pack();
  REQUIRE(bytes.size() == 5);
  CHECK(bytes[0] == 3);
  CHECK(bytes[4] == 0xA0);
}

TEST_CASE("ordering and integers") {
  CHECK(BitString("0") < BitString("00"));
  CHECK(BitString("01") < BitString("1"));
  CHECK(BitString::from_uint(5, 4) == BitString("0101"));
  CHECK(BitString("0101").to_uint() == 5);
  CHECK(all_strings(3).size() == 8);
  CHECK_THROWS(BitString("012"));
}
