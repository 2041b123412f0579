#include "kcagree/hashing.hpp"

#include <algorithm>
#include <bit>
#include <mutex>
#include <numeric>

#include "kcagree/error.hpp"
#include "kcagree/parallel.hpp"

namespace kcagree::hashing {

using boost::multiprecision::cpp_int;

std::string to_string(const Rational& r) {
  const cpp_int num = boost::multiprecision::numerator(r);
  const cpp_int den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

MatrixHash::MatrixHash(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), masks_(rows, 0) {
  if (cols > kMaxCols) throw DomainTooLarge("matrix hash supports at most 64 input bits");
}

MatrixHash MatrixHash::from_bits(std::size_t rows, std::size_t cols, const BitString& row_major) {
  if (row_major.size() != rows * cols)
    throw LengthMismatch("matrix needs " + std::to_string(rows * cols) + " bits, got " +
                         std::to_string(row_major.size()));
  MatrixHash m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (row_major[i * cols + j]) m.masks_[i] |= std::uint64_t{1} << j;
  return m;
}

MatrixHash MatrixHash::from_index(std::size_t rows, std::size_t cols, std::uint64_t index) {
  const std::size_t total = rows * cols;
  if (total > 64) throw DomainTooLarge("matrix index needs more than 64 bits");
  MatrixHash m(rows, cols);
  for (std::size_t p = 0; p < total; ++p)
    if ((index >> (total - 1 - p)) & 1U) m.masks_[p / cols] |= std::uint64_t{1} << (p % cols);
  return m;
}

MatrixHash MatrixHash::random(std::size_t rows, std::size_t cols, Rng& rng) {
  return from_bits(rows, cols, rng.bits(rows * cols));
}

MatrixHash MatrixHash::identity(std::size_t n) {
  MatrixHash m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.masks_[i] = std::uint64_t{1} << i;
  return m;
}

void MatrixHash::set(std::size_t i, std::size_t j, bool v) {
  if (v)
    masks_[i] |= std::uint64_t{1} << j;
  else
    masks_[i] &= ~(std::uint64_t{1} << j);
}

std::uint64_t column_mask(const BitString& a) {
  std::uint64_t m = 0;
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j]) m |= std::uint64_t{1} << j;
  return m;
}

std::uint64_t MatrixHash::apply_mask(std::uint64_t a_mask) const noexcept {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < rows_; ++i)
    out |= static_cast<std::uint64_t>(std::popcount(masks_[i] & a_mask) & 1) << i;
  return out;
}

BitString MatrixHash::apply(const BitString& a) const {
  if (a.size() != cols_)
    throw LengthMismatch("hash expects " + std::to_string(cols_) + " input bits, got " +
                         std::to_string(a.size()));
  const std::uint64_t a_mask = column_mask(a);
  BitString out;
  out.reserve(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out.push_back(std::popcount(masks_[i] & a_mask) & 1);
  return out;
}

BitString MatrixHash::serialize() const {
  BitString out;
  out.reserve(rows_ * cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out.push_back(at(i, j));
  return out;
}

std::size_t MatrixHash::header_field_width(std::size_t rows, std::size_t cols) {
  const std::size_t m = std::max(rows, cols) + 1;
  std::size_t w = 0;
  while ((std::size_t{1} << w) < m) ++w;
  return w;
}

BitString MatrixHash::header() const {
  const std::size_t w = header_field_width(rows_, cols_);
  return BitString::from_uint(cols_, w) + BitString::from_uint(rows_, w);
}

MatrixHash MatrixHash::parse_with_header(const BitString& bits, std::size_t& pos, std::size_t field_width) {
  if (pos + 2 * field_width > bits.size()) throw LengthMismatch("truncated hash header");
  const std::size_t cols = bits.substr(pos, field_width).to_uint();
  const std::size_t rows = bits.substr(pos + field_width, field_width).to_uint();
  pos += 2 * field_width;
  if (pos + rows * cols > bits.size()) throw LengthMismatch("truncated hash matrix");
  auto m = from_bits(rows, cols, bits.substr(pos, rows * cols));
  pos += rows * cols;
  return m;
}

std::optional<BitString> pseudo_inverse(const MatrixHash& h, const std::vector<BitString>& A,
                                        const BitString& w) {
  if (w.size() != h.rows()) throw LengthMismatch("pseudo-inverse target has the wrong length");
  std::optional<BitString> best;
  for (const auto& a : A) {
    if (a.size() != h.cols()) throw LengthMismatch("set member has the wrong length");
    if (h.apply(a) == w && (!best || a < *best)) best = a;
  }
  return best;
}

const Distribution::Outcome Distribution::kUndefined{~std::uint64_t{0}};

void Distribution::add(const Outcome& o, const Rational& p) {
  if (p == 0) return;
  mass[o] += p;
}

Rational Distribution::total() const {
  Rational t = 0;
  for (const auto& [o, p] : mass) t += p;
  return t;
}

Rational Distribution::at(const Outcome& o) const {
  const auto it = mass.find(o);
  return it == mass.end() ? Rational(0) : it->second;
}

Distribution Distribution::uniform(const std::vector<Outcome>& support) {
  Distribution d;
  if (support.empty()) return d;
  const Rational p(1, static_cast<long long>(support.size()));
  for (const auto& o : support) d.add(o, p);
  return d;
}

Rational statistical_distance(const Distribution& p, const Distribution& q) {
  Rational sum = 0;
  for (const auto& [o, m] : p.mass) sum += abs(m - q.at(o));
  for (const auto& [o, m] : q.mass)
    if (!p.mass.count(o)) sum += m;
  return sum / 2;
}

namespace {

void check_exhaustive(std::size_t rho, std::size_t k) {
  if (rho > 4 || k > 3)
    throw DomainTooLarge("exhaustive hash checks need rho <= 4 and k <= 3 (got rho=" +
                         std::to_string(rho) + ", k=" + std::to_string(k) + ")");
}

std::uint32_t subset_mask(std::size_t rho, const std::vector<BitString>& A) {
  std::uint32_t mask = 0;
  for (const auto& a : A) {
    if (a.size() != rho) throw LengthMismatch("set member has the wrong length");
    mask |= std::uint32_t{1} << a.to_uint();
  }
  return mask;
}

// Column mask of the rho-bit string whose integer value is v.
std::uint64_t value_mask(std::size_t rho, std::uint64_t v) {
  return column_mask(BitString::from_uint(v, rho));
}

}  // namespace

CollisionStats collision_stats(std::size_t rho, std::size_t k, const BitString& a, const BitString& a2) {
  if (a.size() != rho || a2.size() != rho) throw LengthMismatch("inputs must have rho bits");
  if (rho * k > 20) throw DomainTooLarge("collision enumeration limited to 2^20 matrices");
  const std::uint64_t diff = column_mask(a) ^ column_mask(a2);
  CollisionStats s;
  s.matrices = std::uint64_t{1} << (rho * k);
  for (std::uint64_t idx = 0; idx < s.matrices; ++idx)
    if (MatrixHash::from_index(k, rho, idx).apply_mask(diff) == 0) ++s.collisions;
  return s;
}

UniversalityReport verify_universality(std::size_t rho, std::size_t k) {
  check_exhaustive(rho, k);
  UniversalityReport r{rho, k, 0, Rational(1), Rational(0), true};
  const Rational target(1, 1LL << k);
  const auto strings = all_strings(rho);
  for (std::size_t i = 0; i < strings.size(); ++i)
    for (std::size_t j = i + 1; j < strings.size(); ++j) {
      const Rational f = collision_stats(rho, k, strings[i], strings[j]).fraction();
      r.min_fraction = std::min(r.min_fraction, f);
      r.max_fraction = std::max(r.max_fraction, f);
      r.exact = r.exact && f == target;
      ++r.pairs_checked;
    }
  if (r.pairs_checked == 0) r.min_fraction = r.max_fraction = target;
  return r;
}

Rational zero_image_probability(const BitString& d, std::size_t k) {
  if (d.size() > 24) throw DomainTooLarge("row enumeration limited to 24 columns");
  const std::uint64_t rows = std::uint64_t{1} << d.size();
  const std::uint64_t dm = column_mask(d);
  std::uint64_t zero = 0;
  for (std::uint64_t idx = 0; idx < rows; ++idx)
    if (MatrixHash::from_index(1, d.size(), idx).apply_mask(dm) == 0) ++zero;
  const Rational row(static_cast<long long>(zero), static_cast<long long>(rows));
  Rational p = 1;
  for (std::size_t i = 0; i < k; ++i) p *= row;
  return p;
}

std::size_t floor_log2(std::uint64_t v) {
  if (v == 0) throw ValidationError("log of zero");
  return static_cast<std::size_t>(63 - std::countl_zero(v));
}

std::uint64_t defined_pairs(std::size_t rho, std::size_t k, std::uint32_t A_mask) {
  if (rho * k > 20) throw DomainTooLarge("defined-pair enumeration limited to 2^20 matrices");
  std::vector<std::uint64_t> cols;
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << rho); ++v)
    if ((A_mask >> v) & 1U) cols.push_back(value_mask(rho, v));
  const std::uint64_t matrices = std::uint64_t{1} << (rho * k);
  std::uint64_t total = 0;
  for (std::uint64_t idx = 0; idx < matrices; ++idx) {
    const auto h = MatrixHash::from_index(k, rho, idx);
    std::uint64_t seen = 0;  // bitmask over {0,1}^k, k <= 6
    for (auto c : cols) seen |= std::uint64_t{1} << h.apply_mask(c);
    total += static_cast<std::uint64_t>(std::popcount(seen));
  }
  return total;
}

SupportReport support_lower_bound_check(std::size_t rho, std::size_t k, const std::vector<BitString>& A) {
  check_exhaustive(rho, k);
  SupportReport r;
  r.support = defined_pairs(rho, k, subset_mask(rho, A));
  r.family_size = std::uint64_t{1} << (rho * k);
  r.range_size = std::uint64_t{1} << k;
  r.bound_holds = 2 * r.support >= r.family_size * r.range_size;
  return r;
}

InversePairReport inverse_pair_distribution(std::size_t rho, std::size_t k, const std::vector<BitString>& A) {
  check_exhaustive(rho, k);
  const std::uint32_t mask = subset_mask(rho, A);
  const std::uint64_t matrices = std::uint64_t{1} << (rho * k);
  const std::uint64_t range = std::uint64_t{1} << k;
  const Rational each(1, static_cast<long long>(matrices * range));
  InversePairReport r;
  for (std::uint64_t idx = 0; idx < matrices; ++idx) {
    const auto h = MatrixHash::from_index(k, rho, idx);
    for (std::uint64_t w = 0; w < range; ++w) {
      // Values are scanned in increasing order, which is lexicographic order.
      std::optional<std::uint64_t> pre;
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << rho) && !pre; ++v) {
        if (!((mask >> v) & 1U)) continue;
        const BitString hv = h.apply(BitString::from_uint(v, rho));
        if (hv == BitString::from_uint(w, k)) pre = v;
      }
      r.dist.add(pre ? Distribution::Outcome{idx, *pre} : Distribution::kUndefined, each);
    }
  }
  r.defined_mass = r.dist.defined_mass();
  std::optional<Rational> common;
  r.conditionally_uniform = true;
  for (const auto& [o, p] : r.dist.mass) {
    if (o == Distribution::kUndefined) continue;
    ++r.support;
    if (!common) common = p;
    r.conditionally_uniform = r.conditionally_uniform && p == *common;
  }
  r.half_bound_holds = r.defined_mass * 2 >= 1;
  return r;
}

void CompatibleSets::validate() const {
  if (rho == 0 || rho > 8) throw ValidationError("rho must be in [1, 8]");
  const std::uint64_t side = std::uint64_t{1} << rho;
  std::vector<std::uint8_t> covered(side * side, 0);
  for (const auto& blk : blocks) {
    if (blk.A.empty() || blk.B.empty()) throw ValidationError("empty rectangle in partition");
    for (const auto& a : blk.A) {
      if (a.size() != rho) throw LengthMismatch("randomness string has the wrong length");
      for (const auto& b : blk.B) {
        if (b.size() != rho) throw LengthMismatch("randomness string has the wrong length");
        auto& c = covered[a.to_uint() * side + b.to_uint()];
        if (c) throw ValidationError("rectangles overlap");
        c = 1;
      }
    }
  }
  if (std::find(covered.begin(), covered.end(), 0) != covered.end())
    throw ValidationError("rectangles do not cover R");
}

std::vector<MaskRectangle> to_masks(const CompatibleSets& family) {
  std::vector<MaskRectangle> out;
  for (const auto& blk : family.blocks)
    out.push_back({subset_mask(family.rho, blk.A), subset_mask(family.rho, blk.B)});
  return out;
}

Lemma5Evaluator::Lemma5Evaluator(std::size_t rho) : rho_(rho) {
  if (rho == 0 || rho > 3) throw DomainTooLarge("the mask evaluator supports rho in [1, 3]");
  const std::uint32_t subsets = std::uint32_t{1} << (std::uint32_t{1} << rho);
  side_.resize(subsets);
  for (std::uint32_t m = 1; m < subsets; ++m) {
    const auto size = static_cast<std::uint64_t>(std::popcount(m));
    const std::size_t k = floor_log2(size);
    side_[m] = {size, k, defined_pairs(rho, k, m)};
  }
}

namespace {

// All quantities over the common denominator L * |U|, where L is the largest
// per-rectangle denominator |R| |H||W| |G||V| (all powers of two).
template <class Int>
struct Lemma5Numbers {
  Int L = 0, U = 0;
  Int defined = 0;     // defined mass * L
  Int two_dist = 0;    // 2 * distance * L * U
  Int incompressible = 0;  // incompressible mass * L
};

template <class Int, class SideFn>
Lemma5Numbers<Int> lemma5_numbers(std::size_t rho, const std::vector<MaskRectangle>& blocks, SideFn&& side) {
  struct Item {
    Int P, d, e;
  };
  std::vector<Item> items;
  std::vector<std::size_t> exps;
  std::size_t max_e = 0;
  for (const auto& blk : blocks) {
    const auto a = side(blk.A), b = side(blk.B);
    const std::size_t e = 2 * rho + a.k * (rho + 1) + b.k * (rho + 1);
    exps.push_back(e);
    max_e = std::max(max_e, e);
  }
  Lemma5Numbers<Int> r;
  r.L = Int(1) << max_e;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto a = side(blocks[i].A), b = side(blocks[i].B);
    Item it;
    it.P = Int(a.size) * Int(b.size) * (Int(1) << (max_e - exps[i]));
    it.d = Int(a.defined) * Int(b.defined);
    it.e = (Int(1) << (a.k * rho)) * Int(a.size) * (Int(1) << (b.k * rho)) * Int(b.size);
    r.U += it.e;
    r.defined += it.d * it.P;
    items.push_back(it);
  }
  for (const auto& it : items) {
    const Int pu = it.P * r.U;
    const Int diff = pu > r.L ? Int(pu - r.L) : Int(r.L - pu);
    r.two_dist += it.d * diff + (it.e - it.d) * r.L;
  }
  r.two_dist += r.L * r.U - r.U * r.defined;

  // Largest set of size < |U|/32 takes the heaviest elements first.
  Int budget = (r.U + 31) / 32 - 1;
  std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) { return x.P > y.P; });
  Int top = 0;
  for (const auto& it : items) {
    if (budget == 0) break;
    const Int take = it.d < budget ? it.d : budget;
    top += take * it.P;
    budget -= take;
  }
  r.incompressible = r.defined - top;
  return r;
}

}  // namespace

Lemma5Report Lemma5Evaluator::evaluate(const std::vector<MaskRectangle>& blocks) const {
  const auto n = lemma5_numbers<cpp_int>(rho_, blocks, [&](std::uint32_t m) { return side_.at(m); });
  Lemma5Report r;
  r.defined_mass = Rational(n.defined, n.L);
  r.distance_to_uniform = Rational(n.two_dist, 2 * n.L * n.U);
  r.incompressible_mass = Rational(n.incompressible, n.L);
  r.universe_size = static_cast<std::uint64_t>(n.U);
  r.defined_ok = 4 * n.defined >= n.L;
  r.distance_ok = 8 * n.two_dist <= 15 * n.L * n.U;
  r.incompressible_ok = 32 * n.incompressible >= n.L;
  return r;
}

bool Lemma5Evaluator::passes(const std::vector<MaskRectangle>& blocks) const {
  using I = __int128;
  const auto n = lemma5_numbers<I>(rho_, blocks, [&](std::uint32_t m) { return side_[m]; });
  return 4 * n.defined >= n.L && 8 * n.two_dist <= 15 * n.L * n.U && 32 * n.incompressible >= n.L;
}

Lemma5Report lemma5_exact(const CompatibleSets& family) {
  family.validate();
  if (family.rho > 4) throw DomainTooLarge("exact mode needs |R| <= 2^8");
  if (family.rho <= 3) return Lemma5Evaluator(family.rho).evaluate(to_masks(family));
  // rho == 4: per-rectangle side data computed on demand.
  struct Side {
    std::uint64_t size;
    std::size_t k;
    std::uint64_t defined;
  };
  const auto masks = to_masks(family);
  std::map<std::uint32_t, Side> cache;
  auto side = [&](std::uint32_t m) {
    auto it = cache.find(m);
    if (it == cache.end()) {
      const auto size = static_cast<std::uint64_t>(std::popcount(m));
      const std::size_t k = floor_log2(size);
      it = cache.emplace(m, Side{size, k, defined_pairs(family.rho, k, m)}).first;
    }
    return it->second;
  };
  const auto n = lemma5_numbers<cpp_int>(family.rho, masks, side);
  Lemma5Report r;
  r.defined_mass = Rational(n.defined, n.L);
  r.distance_to_uniform = Rational(n.two_dist, 2 * n.L * n.U);
  r.incompressible_mass = Rational(n.incompressible, n.L);
  r.universe_size = static_cast<std::uint64_t>(n.U);
  r.defined_ok = 4 * n.defined >= n.L;
  r.distance_ok = 8 * n.two_dist <= 15 * n.L * n.U;
  r.incompressible_ok = 32 * n.incompressible >= n.L;
  return r;
}

MonteCarloLemma5 lemma5_montecarlo(const CompatibleSets& family, std::uint64_t trials, std::uint64_t seed) {
  family.validate();
  MonteCarloLemma5 r{trials, 0, 0};
  Rng rng(seed);
  for (std::uint64_t t = 0; t < trials; ++t) {
    // Picking uniform (r_A, r_B) selects pi with probability |A x B| / |R|.
    const BitString ra = rng.bits(family.rho), rb = rng.bits(family.rho);
    const Rectangle* blk = nullptr;
    for (const auto& b : family.blocks)
      if (std::find(b.A.begin(), b.A.end(), ra) != b.A.end() &&
          std::find(b.B.begin(), b.B.end(), rb) != b.B.end())
        blk = &b;
    const std::size_t ka = floor_log2(blk->A.size()), kb = floor_log2(blk->B.size());
    const auto h = MatrixHash::random(ka, family.rho, rng);
    const auto g = MatrixHash::random(kb, family.rho, rng);
    const BitString w = rng.bits(ka), v = rng.bits(kb);
    if (pseudo_inverse(h, blk->A, w) && pseudo_inverse(g, blk->B, v)) ++r.defined;
  }
  r.defined_rate = trials ? static_cast<double>(r.defined) / static_cast<double>(trials) : 0.0;
  return r;
}

Rational uniform_subset_distance(std::uint64_t subset, std::uint64_t universe) {
  if (subset == 0 || subset > universe) throw ValidationError("subset size out of range");
  return Rational(1) - Rational(static_cast<long long>(subset), static_cast<long long>(universe));
}

}  // namespace kcagree::hashing

namespace kcagree::hashing {

CompatibleSets from_masks(std::size_t rho, const std::vector<MaskRectangle>& blocks) {
  auto expand = [rho](std::uint32_t m) {
    std::vector<BitString> out;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << rho); ++v)
      if ((m >> v) & 1U) out.push_back(BitString::from_uint(v, rho));
    return out;
  };
  CompatibleSets f{rho, {}};
  for (const auto& b : blocks) f.blocks.push_back({expand(b.A), expand(b.B)});
  return f;
}

namespace {

struct RectSearch {
  std::size_t side;
  const std::function<void(const std::vector<MaskRectangle>&)>& fn;
  std::vector<MaskRectangle> blocks;

  // covered[a] is the mask of b with (a, b) already covered.
  void go(std::vector<std::uint32_t>& covered) {
    const std::uint32_t full = (side == 32) ? ~0U : ((1U << side) - 1);
    std::size_t a0 = side;
    for (std::size_t a = 0; a < side; ++a)
      if (covered[a] != full) {
        a0 = a;
        break;
      }
    if (a0 == side) {
      fn(blocks);
      return;
    }
    const std::uint32_t b0 = static_cast<std::uint32_t>(std::countr_one(covered[a0]));
    const std::uint32_t rows_all = full;
    // A contains a0, B contains b0; every cell of A x B must be free.
    const std::uint32_t other_rows = rows_all & ~(1U << a0);
    for (std::uint32_t ar = other_rows;; ar = (ar - 1) & other_rows) {
      const std::uint32_t A = ar | (1U << a0);
      if (A & ((1U << a0) - 1)) {
        // Rows above a0 are fully covered, so they cannot join.
      } else {
        std::uint32_t free_cols = full;
        for (std::size_t a = 0; a < side; ++a)
          if ((A >> a) & 1U) free_cols &= ~covered[a];
        if ((free_cols >> b0) & 1U) {
          const std::uint32_t other_cols = free_cols & ~(1U << b0);
          for (std::uint32_t bc = other_cols;; bc = (bc - 1) & other_cols) {
            const std::uint32_t B = bc | (1U << b0);
            for (std::size_t a = 0; a < side; ++a)
              if ((A >> a) & 1U) covered[a] |= B;
            blocks.push_back({A, B});
            go(covered);
            blocks.pop_back();
            for (std::size_t a = 0; a < side; ++a)
              if ((A >> a) & 1U) covered[a] &= ~B;
            if (bc == 0) break;
          }
        }
      }
      if (ar == 0) break;
    }
  }
};

void partitions_rec(std::uint32_t remaining, std::vector<std::uint32_t>& cur,
                    std::vector<std::vector<std::uint32_t>>& out) {
  if (remaining == 0) {
    out.push_back(cur);
    return;
  }
  const std::uint32_t low = remaining & (~remaining + 1);
  const std::uint32_t rest = remaining & ~low;
  for (std::uint32_t sub = rest;; sub = (sub - 1) & rest) {
    cur.push_back(sub | low);
    partitions_rec(rest & ~sub, cur, out);
    cur.pop_back();
    if (sub == 0) break;
  }
}

struct Worst {
  using I = __int128;
  std::uint64_t families = 0, failures = 0;
  bool any = false;
  I def_num = 0, def_den = 1, dist_num = 0, dist_den = 1, inc_num = 0, inc_den = 1;

  void take(const Lemma5Numbers<I>& n) {
    ++families;
    const bool ok = 4 * n.defined >= n.L && 8 * n.two_dist <= 15 * n.L * n.U && 32 * n.incompressible >= n.L;
    if (!ok) ++failures;
    const I dd = 2 * n.L * n.U;
    if (!any || n.defined * def_den < def_num * n.L) def_num = n.defined, def_den = n.L;
    if (!any || n.two_dist * dist_den > dist_num * dd) dist_num = n.two_dist, dist_den = dd;
    if (!any || n.incompressible * inc_den < inc_num * n.L) inc_num = n.incompressible, inc_den = n.L;
    any = true;
  }
  void merge(const Worst& o) {
    if (!o.any) return;
    families += o.families;
    failures += o.failures;
    if (!any || o.def_num * def_den < def_num * o.def_den) def_num = o.def_num, def_den = o.def_den;
    if (!any || o.dist_num * dist_den > dist_num * o.dist_den) dist_num = o.dist_num, dist_den = o.dist_den;
    if (!any || o.inc_num * inc_den < inc_num * o.inc_den) inc_num = o.inc_num, inc_den = o.inc_den;
    any = true;
  }
};

cpp_int big(__int128 v) {
  // Values here are non-negative and below 2^127.
  const auto hi = static_cast<std::uint64_t>(static_cast<unsigned __int128>(v) >> 64);
  const auto lo = static_cast<std::uint64_t>(v);
  return (cpp_int(hi) << 64) + lo;
}

}  // namespace

void for_each_rectangle_partition(std::size_t rho,
                                  const std::function<void(const std::vector<MaskRectangle>&)>& fn) {
  if (rho == 0 || rho > 2) throw DomainTooLarge("rectangle partitions are enumerated for rho <= 2 only");
  RectSearch s{std::size_t{1} << rho, fn, {}};
  std::vector<std::uint32_t> covered(s.side, 0);
  s.go(covered);
}

std::vector<std::vector<std::uint32_t>> set_partitions(std::size_t rho) {
  if (rho > 3) throw DomainTooLarge("set partitions are enumerated for rho <= 3 only");
  std::vector<std::vector<std::uint32_t>> out;
  std::vector<std::uint32_t> cur;
  const std::uint32_t full = (std::uint32_t{1} << (std::uint32_t{1} << rho)) - 1;
  partitions_rec(full, cur, out);
  return out;
}

Lemma5Sweep lemma5_sweep(std::size_t rho, std::size_t threads) {
  if (rho == 0 || rho > 3) throw DomainTooLarge("lemma5 sweep supports rho in [1, 3]");
  const Lemma5Evaluator ev(rho);
  auto side = [&](std::uint32_t m) { return ev.side(m); };
  Worst total;
  Lemma5Sweep r;
  r.rho = rho;
  if (rho <= 2) {
    r.family = "rectangle";
    for_each_rectangle_partition(rho, [&](const std::vector<MaskRectangle>& blocks) {
      total.take(lemma5_numbers<__int128>(rho, blocks, side));
    });
  } else {
    r.family = "product";
    const auto parts = set_partitions(rho);
    std::mutex mu;
    parallel_ranges(parts.size(), threads, [&](std::size_t lo, std::size_t hi) {
      Worst local;
      std::vector<MaskRectangle> blocks;
      for (std::size_t i = lo; i < hi; ++i)
        for (const auto& pb : parts) {
          blocks.clear();
          for (auto A : parts[i])
            for (auto B : pb) blocks.push_back({A, B});
          local.take(lemma5_numbers<__int128>(rho, blocks, side));
        }
      std::lock_guard lock(mu);
      total.merge(local);
    });
  }
  r.families = total.families;
  r.failures = total.failures;
  r.min_defined_mass = Rational(big(total.def_num), big(total.def_den));
  r.max_distance = Rational(big(total.dist_num), big(total.dist_den));
  r.min_incompressible_mass = Rational(big(total.inc_num), big(total.inc_den));
  return r;
}

}  // namespace kcagree::hashing
