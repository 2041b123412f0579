#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kcagree/bitstring.hpp"
#include "kcagree/rng.hpp"

namespace kcagree::hashing {

using Rational = boost::multiprecision::cpp_rational;

/// "p/q" (or "p" when q == 1).
std::string to_string(const Rational& r);

/// One member a -> M a of the family H_{rho,k}: a k x rho matrix over GF(2).
/// Serialized row-major, so |h| = k * rho bits.
class MatrixHash {
 public:
  static constexpr std::size_t kMaxCols = 64;

  MatrixHash(std::size_t rows, std::size_t cols);
  static MatrixHash from_bits(std::size_t rows, std::size_t cols, const BitString& row_major);
  /// Matrix number `index` of the family, bits taken row-major from the MSB.
  static MatrixHash from_index(std::size_t rows, std::size_t cols, std::uint64_t index);
  static MatrixHash random(std::size_t rows, std::size_t cols, Rng& rng);
  static MatrixHash identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool at(std::size_t i, std::size_t j) const { return (masks_[i] >> j) & 1U; }
  void set(std::size_t i, std::size_t j, bool v);

  /// M a over GF(2). Throws LengthMismatch unless |a| == cols.
  BitString apply(const BitString& a) const;
  /// Same, with a packed as a column mask (bit j = a[j]); result bit i = row i.
  std::uint64_t apply_mask(std::uint64_t a_mask) const noexcept;

  BitString serialize() const;
  /// Width of each header field: ceil(log2(max(rows, cols) + 1)).
  static std::size_t header_field_width(std::size_t rows, std::size_t cols);
  /// cols then rows, each in header_field_width bits, MSB first.
  BitString header() const;
  BitString serialize_with_header() const { return header() + serialize(); }
  /// Reads a header-prefixed hash at `pos` (advanced past it). The field width
  /// must be known from context.
  static MatrixHash parse_with_header(const BitString& bits, std::size_t& pos, std::size_t field_width);

  friend bool operator==(const MatrixHash&, const MatrixHash&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::uint64_t> masks_;  // row i, bit j = M[i][j]
};

/// Column mask of a (bit j = a[j]).
std::uint64_t column_mask(const BitString& a);

/// Lexicographically first a in A with h(a) = w; nullopt when undefined.
std::optional<BitString> pseudo_inverse(const MatrixHash& h, const std::vector<BitString>& A,
                                        const BitString& w);

/// Finite distribution with exact rational masses. Outcomes are integer
/// tuples; kUndefined marks the "undefined" outcome.
struct Distribution {
  using Outcome = std::vector<std::uint64_t>;
  static const Outcome kUndefined;

  std::map<Outcome, Rational> mass;

  void add(const Outcome& o, const Rational& p);
  Rational total() const;
  Rational at(const Outcome& o) const;
  Rational defined_mass() const { return total() - at(kUndefined); }

  static Distribution uniform(const std::vector<Outcome>& support);
};

/// Half the L1 distance over the union of supports.
Rational statistical_distance(const Distribution& p, const Distribution& q);

/// Exact collision statistics of H_{rho,k} for one pair a != a'.
struct CollisionStats {
  std::uint64_t matrices = 0;
  std::uint64_t collisions = 0;
  Rational fraction() const { return Rational(collisions, matrices); }
};
CollisionStats collision_stats(std::size_t rho, std::size_t k, const BitString& a, const BitString& a2);

/// Universality over every pair a != a' of {0,1}^rho: returns true iff all
/// pairs collide on exactly a 2^-k fraction of matrices.
struct UniversalityReport {
  std::size_t rho = 0, k = 0;
  std::uint64_t pairs_checked = 0;
  Rational min_fraction, max_fraction;
  bool exact = false;
};
UniversalityReport verify_universality(std::size_t rho, std::size_t k);

/// Exact Pr_M[M d = 0] for M uniform in {0,1}^{k x |d|}: counts the rows r
/// with r . d = 0 over all 2^|d| rows and raises the fraction to the k-th
/// power (rows are independent). Needs |d| <= 24.
Rational zero_image_probability(const BitString& d, std::size_t k);

/// Support of (h(a), h) for uniform h in H_{rho,k} and uniform a in A.
struct SupportReport {
  std::uint64_t support = 0;
  std::uint64_t family_size = 0;  // |H|
  std::uint64_t range_size = 0;   // |W|
  bool bound_holds = false;       // support >= |H||W| / 2
};
/// Requires rho <= 4 and k <= 3; throws DomainTooLarge otherwise.
SupportReport support_lower_bound_check(std::size_t rho, std::size_t k, const std::vector<BitString>& A);

/// Distribution of (h, h_A^{-1}(w)) for uniform h, w. Outcomes are
/// {matrix index, a as integer}.
struct InversePairReport {
  Distribution dist;
  Rational defined_mass;
  std::uint64_t support = 0;
  bool conditionally_uniform = false;
  bool half_bound_holds = false;  // defined_mass >= 1/2
};
InversePairReport inverse_pair_distribution(std::size_t rho, std::size_t k, const std::vector<BitString>& A);

/// Number of (h, w) for which h_A^{-1}(w) is defined, i.e. sum over h of
/// |h(A)|. A is given as a bitmask over {0,1}^rho (bit v = string of value v).
std::uint64_t defined_pairs(std::size_t rho, std::size_t k, std::uint32_t A_mask);

/// floor(log2 |A|) for |A| >= 1.
std::size_t floor_log2(std::uint64_t v);

// --- Lemma-style check over a partition of R = {0,1}^rho x {0,1}^rho ---

struct Rectangle {
  std::vector<BitString> A;
  std::vector<BitString> B;
};

struct CompatibleSets {
  std::size_t rho = 0;
  std::vector<Rectangle> blocks;

  /// Throws ValidationError unless the rectangles partition R exactly.
  void validate() const;
};

struct Lemma5Report {
  Rational defined_mass;
  Rational distance_to_uniform;
  /// Mass of defined outcomes outside any set of size < |U|/32, minimised
  /// over such sets (the counting consequence for incompressibility).
  Rational incompressible_mass;
  std::uint64_t universe_size = 0;
  bool defined_ok = false;        // >= 1/4
  bool distance_ok = false;       // <= 15/16
  bool incompressible_ok = false; // >= 1/32
  bool verdict() const { return defined_ok && distance_ok && incompressible_ok; }
};

struct MonteCarloLemma5 {
  std::uint64_t trials = 0;
  std::uint64_t defined = 0;
  double defined_rate = 0;
};

/// Exact computation; requires |R| <= 2^8 and rho <= 4.
Lemma5Report lemma5_exact(const CompatibleSets& family);
/// Sampled estimate of the defined probability.
MonteCarloLemma5 lemma5_montecarlo(const CompatibleSets& family, std::uint64_t trials, std::uint64_t seed);

/// Fast exact path over rectangles given as bitmasks, used by the exhaustive
/// sweeps. Needs a table of defined_pairs for every subset.
struct MaskRectangle {
  std::uint32_t A = 0;
  std::uint32_t B = 0;
};
class Lemma5Evaluator {
 public:
  explicit Lemma5Evaluator(std::size_t rho);
  Lemma5Report evaluate(const std::vector<MaskRectangle>& blocks) const;
  /// Integer-only verdict (no rationals), for sweeps over millions of partitions.
  bool passes(const std::vector<MaskRectangle>& blocks) const;
  std::size_t rho() const noexcept { return rho_; }

  struct Side {
    std::uint64_t size;       // |A|
    std::size_t k;            // floor(log2 |A|)
    std::uint64_t defined;    // defined (h, w) pairs
  };
  const Side& side(std::uint32_t mask) const { return side_.at(mask); }

 private:
  std::size_t rho_;
  std::vector<Side> side_;  // indexed by subset mask
};

std::vector<MaskRectangle> to_masks(const CompatibleSets& family);
CompatibleSets from_masks(std::size_t rho, const std::vector<MaskRectangle>& blocks);

/// Calls fn once for every partition of R into rectangles A x B (any subsets,
/// not only intervals). Feasible for rho <= 2.
void for_each_rectangle_partition(std::size_t rho,
                                  const std::function<void(const std::vector<MaskRectangle>&)>& fn);
/// All set partitions of {0,1}^rho, each as a list of block masks. rho <= 3.
std::vector<std::vector<std::uint32_t>> set_partitions(std::size_t rho);

struct Lemma5Sweep {
  std::size_t rho = 0;
  std::string family;  // "rectangle" or "product"
  std::uint64_t families = 0;
  std::uint64_t failures = 0;
  Rational min_defined_mass;
  Rational max_distance;
  Rational min_incompressible_mass;
  bool pass() const { return families > 0 && failures == 0; }
};

/// Exhaustive sweep: every rectangle partition for rho <= 2, every product
/// partition (set partition of Alice's side times one of Bob's) for rho = 3.
Lemma5Sweep lemma5_sweep(std::size_t rho, std::size_t threads = 1);

// --- Distributional observations ---

/// Uniform on S inside R: distance to uniform on R is exactly 1 - |S|/|R|.
Rational uniform_subset_distance(std::uint64_t subset, std::uint64_t universe);

}  // namespace kcagree::hashing
