#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "kcagree/bitstring.hpp"
#include "kcagree/hashing.hpp"
#include "kcagree/toyvm.hpp"

namespace kcagree {

using vm::InteractionOutcome;

/// One side of a protocol. The executor calls next() at the party's slot with
/// the full transcript so far; returning nullopt means the party is done and
/// will not be asked to send again (the executor fills its slots with 0).
class Party {
 public:
  virtual ~Party() = default;
  virtual std::optional<bool> next(const BitString& transcript) = 0;
  virtual BitString output(const BitString& transcript) = 0;
  /// Internal work beyond the one step charged per next() call.
  virtual std::uint64_t steps() const { return 0; }
};

using PartyFactory = std::function<std::unique_ptr<Party>(std::size_t n, const BitString& randomness)>;

struct ProtocolSpec {
  std::string name;
  std::function<std::size_t(std::size_t)> rand_len_a;
  std::function<std::size_t(std::size_t)> rand_len_b;
  PartyFactory alice;
  PartyFactory bob;
  /// Steps allowed per side.
  std::function<std::uint64_t(std::size_t)> runtime_bound;
  /// Smallest n the protocol accepts.
  std::size_t min_n = 1;
};

struct ProtocolRun {
  InteractionOutcome outcome;
  BitString rand_a;
  BitString rand_b;
};

/// Draws rand_a then rand_b from Rng(seed) and runs the protocol.
ProtocolRun execute(const ProtocolSpec& spec, std::size_t n, std::uint64_t seed);
/// Runs on given randomness. Throws RuntimeBoundExceeded.
ProtocolRun execute_with(const ProtocolSpec& spec, std::size_t n, const BitString& rand_a,
                         const BitString& rand_b);

struct BinomialInterval {
  double low = 0;
  double high = 1;
};
/// Exact two-sided Clopper-Pearson interval at the given confidence.
BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.95);

struct AgreementReport {
  std::uint64_t trials = 0;
  std::uint64_t agree_count = 0;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 1;
};

/// Trial i runs with seed derive_seed(seed, i).
AgreementReport estimate_agreement(const ProtocolSpec& spec, std::size_t n, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads = 1);

struct DhLikeReport {
  bool bijective = false;
  std::uint64_t domain_size = 0;
  std::uint64_t image_size = 0;
  double transcript_entropy_bits = 0;
  /// Two randomness pairs with the same transcript, when not injective.
  std::optional<std::pair<std::pair<BitString, BitString>, std::pair<BitString, BitString>>> witness;
};
/// Exhaustive over all randomness pairs; rand_len_a + rand_len_b <= 24.
DhLikeReport check_dh_like(const ProtocolSpec& spec, std::size_t n);

struct StandardReport {
  std::uint64_t trials = 0;
  bool length_ok = true;
  bool runtime_ok = true;
  std::uint64_t max_steps = 0;
  AgreementReport agreement;
  std::vector<std::string> violations;
  bool pass() const { return violations.empty(); }
};
StandardReport check_standard(const ProtocolSpec& spec, std::size_t n, std::uint64_t trials,
                              std::uint64_t seed, unsigned threads = 1);

// --- concrete protocols ---

/// No messages, both output "".
ProtocolSpec null_protocol();
/// Each side holds one random bit and outputs it; agrees half the time.
ProtocolSpec coinflip_protocol();
/// Diffie-Hellman over Z_11^* with generator 2 on 4-bit messages, key padded
/// with zeros so that |(pi, x)| = n. Needs n >= 33.
ProtocolSpec toydh_protocol();
/// Alice sends 2 random bits, Bob sends 2, key is their XOR padded to
/// |(pi, x)| = n. Needs n >= 15.
ProtocolSpec xorkey_protocol();

namespace toydh {
inline constexpr unsigned kP = 11;
inline constexpr unsigned kG = 2;
/// The 4-bit message for 4-bit randomness v: 2^v mod 11 for v in 1..10,
/// v itself otherwise. A permutation of {0..15}.
unsigned message(unsigned v);
/// Key from own randomness and the partner's message.
unsigned key(unsigned own_v, unsigned own_msg, unsigned other_msg);
}  // namespace toydh

struct LevinParams {
  double c = 1.0;
  vm::TimeBound T = vm::TimeBound::quadratic();
};

/// Hash output length ceil((c + 5) log2 n).
std::size_t levin_hash_rows(double c, std::size_t n);
/// Hash input x || 1 || 0^(m - |x| - 1); m must exceed |x|.
BitString hash_input(const BitString& x, std::size_t m);
/// Transcript tail where Alice sends hdr(h) || h || hx one bit per slot and Bob
/// answers 0, except that his last answer is eq.
BitString hash_check_blob(const hashing::MatrixHash& h, const BitString& hx, bool eq);

ProtocolSpec levin_search_protocol(const LevinParams& params);

/// By name: null, coinflip, toydh, xorkey, levin.
ProtocolSpec protocol_by_name(const std::string& name, const LevinParams& params = {});
std::vector<std::string> protocol_names();

}  // namespace kcagree
