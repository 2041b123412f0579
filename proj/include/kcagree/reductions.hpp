#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "kcagree/bitstring.hpp"
#include "kcagree/hashing.hpp"
#include "kcagree/protocols.hpp"
#include "kcagree/rng.hpp"
#include "kcagree/toyvm.hpp"

namespace kcagree {

enum class Verdict : std::uint8_t { OutsideY, OutsideN };
std::string to_string(Verdict v);
/// Accepts "outside_Y" / "outside_N" (case-insensitive on the last letter).
Verdict parse_verdict(const std::string& s);

struct PromiseParams {
  double c = 1.0;
  double e = 2.0;
  vm::TimeBound t = vm::TimeBound::quadratic();
  /// Search bound for CI (total bits of a program pair).
  std::size_t max_pair_len = 10;
  /// Search bound for C (program bits).
  std::size_t max_prog_len = 15;
  /// Measured machine constant added to the Y-test and subtracted in the N-test.
  std::size_t c_vm = 0;

  /// Throws ValidationError for c <= 0 or e <= c.
  void validate() const;
  /// Non-fatal notes, e.g. e <= c + 3.
  std::vector<std::string> warnings() const;
};

class Decider {
 public:
  virtual ~Decider() = default;
  virtual Verdict decide(const BitString& paircode, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
  virtual double failure_probability() const { return 0.0; }
  virtual bool good_length(std::size_t) const { return true; }
};
using DeciderHandle = std::shared_ptr<const Decider>;

DeciderHandle constant_decider(Verdict v);
/// Odd-majority over `reps` calls with seeds derive_seed(seed, j).
DeciderHandle majority_decider(DeciderHandle inner, std::size_t reps);
/// External decider: argv is started once and fed one JSON object per line,
/// {"input": "<bits>"}; it must answer {"verdict": "outside_Y"|"outside_N"}.
DeciderHandle subprocess_decider(std::vector<std::string> argv);

struct ReferenceEvaluation {
  BitString pi;
  BitString x;
  vm::ComplexityValue ci;       // CI^t(pi, x)
  vm::ComplexityValue c_pi;     // C(pi)
  vm::ComplexityValue c_pair;   // C((pi, x)) of the pair code
  double log_term = 0;          // log2 |pi x|
  bool in_Y = false;
  bool in_N = false;
  Verdict verdict = Verdict::OutsideY;
};

/// Exact decider on the toy machine. CI comes from one interactive table
/// built up front for |pi x| <= max_input; C is computed per query.
class ReferenceDecider : public Decider {
 public:
  ReferenceDecider(const PromiseParams& params, std::size_t max_input = 6, vm::SearchOptions options = {});
  Verdict decide(const BitString& paircode, std::uint64_t seed) const override;
  std::string name() const override { return "reference"; }
  bool good_length(std::size_t n) const override;
  ReferenceEvaluation evaluate(const BitString& pi, const BitString& x) const;
  const PromiseParams& params() const noexcept { return params_; }
  std::size_t max_input() const noexcept { return max_input_; }

 private:
  vm::ComplexityValue plain(const BitString& s) const;

  PromiseParams params_;
  std::size_t max_input_;
  vm::SearchOptions options_;
  vm::InteractiveTable table_;
  mutable std::mutex mu_;
  mutable std::map<BitString, vm::ComplexityValue> plain_cache_;
};

std::shared_ptr<const ReferenceDecider> reference_decider(const PromiseParams& params, std::size_t max_input = 6,
                                                          vm::SearchOptions options = {});

// --- breaker predicate ---

/// pi || (hdr(h) h, 0) || (0, hdr(g) g) || (w, 0) || (0, v), where (s, 0)
/// interleaves s with zeros after each bit and (0, s) before each bit.
BitString embed_transcript(const BitString& pi, const hashing::MatrixHash& h, const hashing::MatrixHash& g,
                           const BitString& w, const BitString& v);

struct BreakerConfig {
  double epsilon = 0.5;
  /// Pad to 2n + 1 instead of 2n.
  bool odd_parity = false;
};

struct BreakerSample {
  std::size_t rho = 0;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  hashing::MatrixHash h{0, 0};
  hashing::MatrixHash g{0, 0};
  BitString w;
  BitString v;
  PairCode padded;
};

/// rho = max(1, floor(n^epsilon)) for n = |(pi, z)|.
std::size_t breaker_rho(std::size_t n, double epsilon);
/// Draws (alpha, beta, h, g, w, v) and builds the padded decider input.
/// Throws EmbeddingTooLong when the embedded pair exceeds the target length.
BreakerSample breaker_sample(const BitString& pi, const BitString& z, const BreakerConfig& cfg, std::uint64_t seed);
/// 1 iff the decider answers OutsideN on the padded embedded pair.
int breaker_E(const Decider& decider, const BitString& pi, const BitString& z, const BreakerConfig& cfg,
              std::uint64_t seed);

struct LeakageReport {
  std::size_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t real_hits = 0;
  std::uint64_t uniform_hits = 0;
  double p_real = 0;
  double p_uniform = 0;
  double gap = 0;
  /// Simultaneous 97.5% Clopper-Pearson intervals, so that the gap bound
  /// below holds with 95% confidence.
  BinomialInterval ci_real;
  BinomialInterval ci_uniform;
  double gap_low = 0;
  double gap_high = 0;
  bool significant() const { return gap_low > 0; }
};

/// Trial i: seed s = derive_seed(seed, i); the protocol runs on
/// derive_seed(s, "protocol"), U is drawn from derive_seed(s, "uniform") and
/// both breaker calls share derive_seed(s, "breaker").
LeakageReport leakage_experiment(const ProtocolSpec& spec, const Decider& decider, const BreakerConfig& cfg,
                                 std::size_t n, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1);

// --- Eve and the Eve-driven decider ---

class Eve {
 public:
  virtual ~Eve() = default;
  virtual BitString guess(std::size_t n, const BitString& transcript, std::uint64_t seed) const = 0;
  virtual std::string name() const = 0;
};
using EveHandle = std::shared_ptr<const Eve>;

/// Uniform string of uniform length in [0, n].
EveHandle random_eve();
/// Always returns the given string.
EveHandle constant_eve(BitString guess);
/// Reads h and h(x) off the end of the transcript and returns the
/// lexicographically first (shortest first) x' of length < n with h(x') = h(x).
EveHandle inverting_eve(double c);

/// Transcript pi || hash check of x with the equality bit set to 1.
BitString eve_transcript(const BitString& pi, const BitString& x, double c, std::uint64_t seed);
Verdict eve_decider(const Eve& eve, const BitString& pi, const BitString& x, double c, std::uint64_t seed);

struct SCountEntry {
  std::size_t ell = 0;
  std::uint64_t pairs_at_ell = 0;   // pairs with CI = ell and |(pi,x)| = n
  std::uint64_t size = 0;           // |S_{n,ell}|
  std::vector<std::pair<BitString, BitString>> members;
  double ratio = 0;                 // size / 2^ell
};

struct SCountReport {
  std::size_t n = 0;
  std::uint64_t trials_per_pair = 0;
  std::vector<SCountEntry> levels;  // ell = 0 .. max_ell
  double K = 0;                     // max ratio
  double bound = 0;                 // 3 (2n)^2
  bool bound_holds = false;
};

/// Exhaustive over all pairs with |(pi,x)| = n; Eve fails on a pair when more
/// than a third of trials_per_pair attempts miss. Needs n <= 6, max_ell <= 12.
SCountReport count_S(std::size_t n, std::size_t max_ell, const Eve& eve, double c, const vm::TimeBound& t,
                     std::uint64_t trials_per_pair, std::uint64_t seed, unsigned threads = 1);

// --- Goldreich-Levin ---

/// Sees the transcript, the query strings r_1..r_l and candidate bits.
using Distinguisher =
    std::function<bool(const BitString& pi, const std::vector<BitString>& r, const BitString& bits, Rng& rng)>;
/// Returns a guess of x . r.
using InnerProductOracle = std::function<bool(const BitString& r)>;

/// Predicts bit i = |prefix| + 1 from the first i - 1 bits: completes the
/// rest with uniform bits c_i..c_l and outputs c_i if the distinguisher
/// accepts, its flip otherwise.
bool gl_next_bit_predictor(const Distinguisher& d, const BitString& pi, const std::vector<BitString>& r,
                           const BitString& prefix, Rng& rng);

/// m = ceil(log2(n / alpha^2)) + guard, capped at max_m.
std::size_t gl_seed_count(std::size_t n, double alpha, std::size_t guard = 2, std::size_t max_m = 16);
/// Returns exactly 2^m candidates, one per guess of the seed inner products.
std::vector<BitString> gl_list_decode(const InnerProductOracle& oracle, std::size_t n, double alpha,
                                      std::uint64_t seed, std::size_t guard = 2, std::size_t max_m = 16);

struct Cor3Report {
  std::size_t n = 0;
  std::size_t ell = 0;
  std::size_t key_bits = 0;
  bool padded = false;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
  double success_rate = 0;
  double baseline = 0;  // 2^-|x|
  BinomialInterval ci;
};

/// Builds a distinguisher for one run from the true x (synthetic setups).
using DistinguisherFactory = std::function<Distinguisher(const BitString& x)>;
/// With probability `advantage` checks the bits against x.r_j exactly,
/// otherwise answers with a fair coin.
DistinguisherFactory planted_distinguisher(double advantage);

Cor3Report cor3_pipeline(const ProtocolSpec& spec, const DistinguisherFactory& make_distinguisher, std::size_t n,
                         double d, double alpha, std::uint64_t trials, std::uint64_t seed, unsigned threads = 1,
                         std::size_t max_m = 12);

/// Inner product over GF(2); lengths must match.
bool inner_product(const BitString& a, const BitString& b);

}  // namespace kcagree
