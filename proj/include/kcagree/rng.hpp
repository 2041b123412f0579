#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "kcagree/bitstring.hpp"

namespace kcagree {

/// SplitMix64 finalizer. Used only to derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Child seed for stream `index` of `seed`. Trial i of an experiment always
/// uses derive_seed(seed, i), whatever thread runs it.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return mix64(seed ^ mix64(index + 0x632be59bd9b4e019ULL));
}

/// Named sub-stream, e.g. derive_seed(trial_seed, "uniform").
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
  return derive_seed(seed, h);
}

/// Deterministic generator. The engine is std::mt19937_64, whose output
/// sequence is fixed by the standard; range reduction is done here so that
/// results do not depend on the library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  bool bit() { return (engine_() >> 63) != 0; }
  BitString bits(std::size_t n) {
    BitString out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(bit());
    return out;
  }
  /// Uniform integer in [0, bound), rejection-sampled. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % bound;
  }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace kcagree
