#include "kcagree/reductions.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <set>

#include <json.hpp>

#include "kcagree/error.hpp"
#include "kcagree/parallel.hpp"

namespace kcagree {

std::string to_string(Verdict v) { return v == Verdict::OutsideN ? "outside_N" : "outside_Y"; }

Verdict parse_verdict(const std::string& s) {
  if (s == "outside_N" || s == "outside_n") return Verdict::OutsideN;
  if (s == "outside_Y" || s == "outside_y") return Verdict::OutsideY;
  throw ValidationError("unknown verdict '" + s + "'");
}

void PromiseParams::validate() const {
  if (!(c > 0)) throw ValidationError("c must be > 0");
  if (!(e > c)) throw ValidationError("e must exceed c");
}

std::vector<std::string> PromiseParams::warnings() const {
  std::vector<std::string> w;
  if (e <= c + 3) w.push_back("e <= c + 3: gap smaller than the theorem assumes");
  return w;
}

namespace {

class ConstantDecider : public Decider {
 public:
  explicit ConstantDecider(Verdict v) : v_(v) {}
  Verdict decide(const BitString&, std::uint64_t) const override { return v_; }
  std::string name() const override { return "constant:" + to_string(v_); }

 private:
  Verdict v_;
};

class MajorityDecider : public Decider {
 public:
  MajorityDecider(DeciderHandle inner, std::size_t reps) : inner_(std::move(inner)), reps_(reps) {}
  Verdict decide(const BitString& code, std::uint64_t seed) const override {
    std::size_t votes = 0;
    for (std::size_t j = 0; j < reps_; ++j)
      votes += inner_->decide(code, derive_seed(seed, j)) == Verdict::OutsideN;
    return 2 * votes > reps_ ? Verdict::OutsideN : Verdict::OutsideY;
  }
  std::string name() const override { return "majority" + std::to_string(reps_) + ":" + inner_->name(); }
  bool good_length(std::size_t n) const override { return inner_->good_length(n); }

 private:
  DeciderHandle inner_;
  std::size_t reps_;
};

class SubprocessDecider : public Decider {
 public:
  explicit SubprocessDecider(std::vector<std::string> argv) : argv_(std::move(argv)) {
    if (argv_.empty()) throw ValidationError("subprocess decider needs a command");
  }
  ~SubprocessDecider() override {
    if (to_child_) std::fclose(to_child_);
    if (from_child_) std::fclose(from_child_);
    if (pid_ > 0) waitpid(pid_, nullptr, 0);
  }

  Verdict decide(const BitString& code, std::uint64_t) const override {
    std::lock_guard lock(mu_);
    start();
    const std::string line = nlohmann::json{{"input", code.to_string()}}.dump() + "\n";
    if (std::fputs(line.c_str(), to_child_) < 0 || std::fflush(to_child_) != 0)
      throw Error("decider subprocess closed its input");
    std::string reply;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, from_child_)) {
      reply += buf;
      if (!reply.empty() && reply.back() == '\n') break;
    }
    if (reply.empty()) throw Error("decider subprocess gave no answer");
    const auto j = nlohmann::json::parse(reply, nullptr, false);
    if (j.is_discarded() || !j.contains("verdict") || !j["verdict"].is_string())
      throw Error("decider subprocess sent a malformed reply: " + reply);
    return parse_verdict(j["verdict"].get<std::string>());
  }
  std::string name() const override { return "subprocess:" + argv_.front(); }

 private:
  void start() const {
    if (pid_ > 0) return;
    int in[2], out[2];
    if (pipe(in) != 0 || pipe(out) != 0) throw Error(std::string("pipe: ") + std::strerror(errno));
    std::signal(SIGPIPE, SIG_IGN);
    pid_ = fork();
    if (pid_ < 0) throw Error(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      dup2(in[0], STDIN_FILENO);
      dup2(out[1], STDOUT_FILENO);
      close(in[0]);
      close(in[1]);
      close(out[0]);
      close(out[1]);
      std::vector<char*> args;
      for (const auto& a : argv_) args.push_back(const_cast<char*>(a.c_str()));
      args.push_back(nullptr);
      execvp(args[0], args.data());
      _exit(127);
    }
    close(in[0]);
    close(out[1]);
    to_child_ = fdopen(in[1], "w");
    from_child_ = fdopen(out[0], "r");
  }

  std::vector<std::string> argv_;
  mutable std::mutex mu_;
  mutable pid_t pid_ = -1;
  mutable FILE* to_child_ = nullptr;
  mutable FILE* from_child_ = nullptr;
};

}  // namespace

DeciderHandle constant_decider(Verdict v) { return std::make_shared<ConstantDecider>(v); }

DeciderHandle majority_decider(DeciderHandle inner, std::size_t reps) {
  if (!inner) throw ValidationError("majority needs an inner decider");
  if (reps % 2 == 0) throw ValidationError("majority needs an odd repetition count");
  return std::make_shared<MajorityDecider>(std::move(inner), reps);
}

DeciderHandle subprocess_decider(std::vector<std::string> argv) {
  return std::make_shared<SubprocessDecider>(std::move(argv));
}

// --- reference decider ---

ReferenceDecider::ReferenceDecider(const PromiseParams& params, std::size_t max_input, vm::SearchOptions options)
    : params_(params), max_input_(max_input), options_(options) {
  params_.validate();
  table_ = vm::build_interactive_table(params_.t, params_.max_pair_len, max_input_, options_);
}

bool ReferenceDecider::good_length(std::size_t n) const {
  // Pair codes of length n carry |pi x| <= n - 1 bits.
  return n >= 1 && n - 1 <= max_input_;
}

vm::ComplexityValue ReferenceDecider::plain(const BitString& s) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = plain_cache_.find(s); it != plain_cache_.end()) return it->second;
  }
  vm::VmLimits lim = params_.t.limits(s.size());
  const auto v = vm::plain_complexity(s, {}, lim, params_.max_prog_len, options_);
  std::lock_guard lock(mu_);
  plain_cache_.emplace(s, v);
  return v;
}

ReferenceEvaluation ReferenceDecider::evaluate(const BitString& pi, const BitString& x) const {
  const std::size_t n = pi.size() + x.size();
  if (n > max_input_)
    throw DomainTooLarge("reference decider handles |pi x| <= " + std::to_string(max_input_) + ", got " +
                         std::to_string(n));
  ReferenceEvaluation r;
  r.pi = pi;
  r.x = x;
  r.ci = table_.lookup(pi, x);
  r.c_pi = plain(pi);
  r.c_pair = plain(encode_pair(pi, x).encoded);
  r.log_term = std::log2(static_cast<double>(std::max<std::size_t>(n, 1)));
  // Beyond the search bound only a lower bound on C is known.
  const double unknown = static_cast<double>(params_.max_prog_len + 1);
  const double c_pi = r.c_pi.finite() ? static_cast<double>(r.c_pi.value()) : unknown;
  const double c_vm = static_cast<double>(params_.c_vm);
  r.in_Y = r.ci.finite() && static_cast<double>(r.ci.value()) <= c_pi + params_.c * r.log_term + c_vm;
  if (r.c_pi.finite()) {
    const double c_pair = r.c_pair.finite() ? static_cast<double>(r.c_pair.value()) : unknown;
    r.in_N = c_pair >= c_pi + params_.e * r.log_term - c_vm;
  }
  r.verdict = r.in_Y ? Verdict::OutsideN : Verdict::OutsideY;
  return r;
}

Verdict ReferenceDecider::decide(const BitString& paircode, std::uint64_t) const {
  const auto [pi, x] = decode_pair(paircode);
  if (pi.size() + x.size() > max_input_)
    throw DomainTooLarge("reference decider handles |pi x| <= " + std::to_string(max_input_));
  // The Y-test needs a finite CI; skip the plain searches otherwise.
  if (!table_.lookup(pi, x).finite()) return Verdict::OutsideY;
  return evaluate(pi, x).verdict;
}

std::shared_ptr<const ReferenceDecider> reference_decider(const PromiseParams& params, std::size_t max_input,
                                                          vm::SearchOptions options) {
  return std::make_shared<ReferenceDecider>(params, max_input, options);
}

// --- breaker ---

BitString embed_transcript(const BitString& pi, const hashing::MatrixHash& h, const hashing::MatrixHash& g,
                           const BitString& w, const BitString& v) {
  if (w.size() != h.rows()) throw LengthMismatch("|w| must equal the rows of h");
  if (v.size() != g.rows()) throw LengthMismatch("|v| must equal the rows of g");
  BitString out = pi;
  auto alice = [&](const BitString& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(s[i]);
      out.push_back(false);
    }
  };
  auto bob = [&](const BitString& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out.push_back(false);
      out.push_back(s[i]);
    }
  };
  alice(h.header() + h.serialize());
  bob(g.header() + g.serialize());
  alice(w);
  bob(v);
  return out;
}

std::size_t breaker_rho(std::size_t n, double epsilon) {
  if (!(epsilon > 0) || epsilon >= 1) throw ValidationError("epsilon must be in (0, 1)");
  auto rho = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(n), epsilon) + 1e-9));
  rho = std::max<std::size_t>(rho, 1);
  if (rho > hashing::MatrixHash::kMaxCols) throw DomainTooLarge("rho above 64");
  return rho;
}

BreakerSample breaker_sample(const BitString& pi, const BitString& z, const BreakerConfig& cfg, std::uint64_t seed) {
  const std::size_t n = pair_length(pi.size(), z.size());
  BreakerSample s;
  s.rho = breaker_rho(n, cfg.epsilon);
  Rng rng(seed);
  s.alpha = 1 + rng.below(s.rho);
  s.beta = 1 + rng.below(s.rho);
  s.h = hashing::MatrixHash::random(s.alpha, s.rho, rng);
  s.g = hashing::MatrixHash::random(s.beta, s.rho, rng);
  s.w = rng.bits(s.alpha);
  s.v = rng.bits(s.beta);
  const BitString embedded = embed_transcript(pi, s.h, s.g, s.w, s.v);
  const std::size_t target = 2 * n + (cfg.odd_parity ? 1 : 0);
  try {
    s.padded = pad_pair(embedded, z, target);
  } catch (const PadTooSmall&) {
    throw EmbeddingTooLong("embedded pair of length " + std::to_string(pair_length(embedded.size(), z.size())) +
                           " does not fit in " + std::to_string(target) + " bits");
  }
  return s;
}

int breaker_E(const Decider& decider, const BitString& pi, const BitString& z, const BreakerConfig& cfg,
              std::uint64_t seed) {
  const auto s = breaker_sample(pi, z, cfg, seed);
  return decider.decide(s.padded.encoded, derive_seed(seed, "decider")) == Verdict::OutsideN ? 1 : 0;
}

LeakageReport leakage_experiment(const ProtocolSpec& spec, const Decider& decider, const BreakerConfig& cfg,
                                 std::size_t n, std::uint64_t trials, std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  const auto hits = parallel_trials(trials, threads, [&](std::uint64_t i) {
    const std::uint64_t s = derive_seed(seed, i);
    const auto run = execute(spec, n, derive_seed(s, "protocol"));
    const BitString& pi = run.outcome.transcript;
    const BitString& x = run.outcome.out_a;
    Rng urng(derive_seed(s, "uniform"));
    const BitString u = urng.bits(x.size());
    const std::uint64_t bs = derive_seed(s, "breaker");
    return std::pair<std::uint8_t, std::uint8_t>(breaker_E(decider, pi, x, cfg, bs), breaker_E(decider, pi, u, cfg, bs));
  });
  LeakageReport r;
  r.n = n;
  r.trials = trials;
  for (const auto& [a, b] : hits) {
    r.real_hits += a;
    r.uniform_hits += b;
  }
  const double t = static_cast<double>(trials);
  r.p_real = static_cast<double>(r.real_hits) / t;
  r.p_uniform = static_cast<double>(r.uniform_hits) / t;
  r.gap = r.p_real - r.p_uniform;
  r.ci_real = clopper_pearson(r.real_hits, trials, 0.975);
  r.ci_uniform = clopper_pearson(r.uniform_hits, trials, 0.975);
  r.gap_low = r.ci_real.low - r.ci_uniform.high;
  r.gap_high = r.ci_real.high - r.ci_uniform.low;
  return r;
}

}  // namespace kcagree

namespace kcagree {

// --- Eve ---

namespace {

class RandomEve : public Eve {
 public:
  BitString guess(std::size_t n, const BitString&, std::uint64_t seed) const override {
    Rng rng(seed);
    return rng.bits(rng.below(n + 1));
  }
  std::string name() const override { return "random"; }
};

class ConstantEve : public Eve {
 public:
  explicit ConstantEve(BitString g) : g_(std::move(g)) {}
  BitString guess(std::size_t, const BitString&, std::uint64_t) const override { return g_; }
  std::string name() const override { return "constant:" + g_.to_string(); }

 private:
  BitString g_;
};

class InvertingEve : public Eve {
 public:
  explicit InvertingEve(double c) : c_(c) {}
  BitString guess(std::size_t n, const BitString& t, std::uint64_t) const override {
    if (n > 21) throw DomainTooLarge("inverting eve enumerates at most 2^20 candidates");
    const std::size_t k = levin_hash_rows(c_, n), m = n + 1;
    const std::size_t hw = hashing::MatrixHash::header_field_width(k, m);
    const std::size_t payload_len = 2 * hw + k * m + k;
    if (t.size() < 2 * payload_len) return {};
    BitString payload;
    for (std::size_t i = t.size() - 2 * payload_len; i < t.size(); i += 2) payload.push_back(t[i]);
    std::size_t pos = 0;
    const auto h = hashing::MatrixHash::parse_with_header(payload, pos, hw);
    if (h.rows() != k || h.cols() != m) return {};
    const BitString hx = payload.substr(pos);
    for (std::size_t len = 0; len < n; ++len)
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
        const BitString cand = BitString::from_uint(v, len);
        if (h.apply(hash_input(cand, m)) == hx) return cand;
      }
    return {};
  }
  std::string name() const override { return "inverting"; }

 private:
  double c_;
};

}  // namespace

EveHandle random_eve() { return std::make_shared<RandomEve>(); }
EveHandle constant_eve(BitString guess) { return std::make_shared<ConstantEve>(std::move(guess)); }
EveHandle inverting_eve(double c) { return std::make_shared<InvertingEve>(c); }

BitString eve_transcript(const BitString& pi, const BitString& x, double c, std::uint64_t seed) {
  const std::size_t n = pair_length(pi.size(), x.size());
  const std::size_t k = levin_hash_rows(c, n), m = n + 1;
  Rng rng(seed);
  const auto h = hashing::MatrixHash::random(k, m, rng);
  return pi + hash_check_blob(h, h.apply(hash_input(x, m)), true);
}

Verdict eve_decider(const Eve& eve, const BitString& pi, const BitString& x, double c, std::uint64_t seed) {
  const std::size_t n = pair_length(pi.size(), x.size());
  const BitString t = eve_transcript(pi, x, c, seed);
  return eve.guess(n, t, derive_seed(seed, "eve")) == x ? Verdict::OutsideN : Verdict::OutsideY;
}

SCountReport count_S(std::size_t n, std::size_t max_ell, const Eve& eve, double c, const vm::TimeBound& t,
                     std::uint64_t trials_per_pair, std::uint64_t seed, unsigned threads) {
  if (n == 0 || n > 6) throw DomainTooLarge("S counting needs 1 <= n <= 6");
  if (max_ell > 12) throw DomainTooLarge("S counting needs ell <= 12");
  if (trials_per_pair == 0) throw ValidationError("trials per pair must be >= 1");
  vm::SearchOptions opts;
  opts.threads = threads;
  const auto table = vm::build_interactive_table(t, max_ell, n, opts);

  std::vector<std::pair<BitString, BitString>> pairs;
  for (std::size_t pl = 0; 2 * pl + 1 <= n; ++pl) {
    const std::size_t xl = n - 1 - 2 * pl;
    for (const auto& pi : all_strings(pl))
      for (const auto& x : all_strings(xl)) pairs.emplace_back(pi, x);
  }
  struct Result {
    std::optional<std::size_t> ell;
    bool in_S = false;
  };
  const auto results = parallel_trials(pairs.size(), threads, [&](std::uint64_t idx) {
    const auto& [pi, x] = pairs[idx];
    const auto ci = table.lookup(pi, x);
    Result r;
    if (!ci.finite() || ci.value() > max_ell) return r;
    r.ell = ci.value();
    std::uint64_t misses = 0;
    const std::uint64_t ps = derive_seed(seed, idx);
    for (std::uint64_t j = 0; j < trials_per_pair; ++j)
      misses += eve_decider(eve, pi, x, c, derive_seed(ps, j)) == Verdict::OutsideY;
    r.in_S = 3 * misses > trials_per_pair;
    return r;
  });

  SCountReport rep;
  rep.n = n;
  rep.trials_per_pair = trials_per_pair;
  rep.levels.resize(max_ell + 1);
  for (std::size_t ell = 0; ell <= max_ell; ++ell) rep.levels[ell].ell = ell;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!results[i].ell) continue;
    auto& lv = rep.levels[*results[i].ell];
    ++lv.pairs_at_ell;
    if (results[i].in_S) {
      ++lv.size;
      lv.members.push_back(pairs[i]);
    }
  }
  for (auto& lv : rep.levels) {
    lv.ratio = static_cast<double>(lv.size) / std::ldexp(1.0, static_cast<int>(lv.ell));
    rep.K = std::max(rep.K, lv.ratio);
  }
  rep.bound = 3.0 * static_cast<double>(2 * n) * static_cast<double>(2 * n);
  rep.bound_holds = rep.K <= rep.bound;
  return rep;
}

// --- Goldreich-Levin ---

bool inner_product(const BitString& a, const BitString& b) {
  if (a.size() != b.size()) throw LengthMismatch("inner product of strings of different length");
  bool acc = false;
  for (std::size_t i = 0; i < a.size(); ++i) acc ^= (a[i] && b[i]);
  return acc;
}

bool gl_next_bit_predictor(const Distinguisher& d, const BitString& pi, const std::vector<BitString>& r,
                           const BitString& prefix, Rng& rng) {
  if (prefix.size() >= r.size()) throw ValidationError("prefix must be shorter than the number of queries");
  const BitString completion = rng.bits(r.size() - prefix.size());
  const bool accept = d(pi, r, prefix + completion, rng);
  return accept ? completion[0] != 0 : completion[0] == 0;
}

std::size_t gl_seed_count(std::size_t n, double alpha, std::size_t guard, std::size_t max_m) {
  if (!(alpha > 0)) throw ValidationError("alpha must be > 0");
  const double base = std::log2(static_cast<double>(std::max<std::size_t>(n, 1)) / (alpha * alpha));
  const auto m = static_cast<std::size_t>(std::max(0.0, std::ceil(base - 1e-12))) + guard;
  return std::clamp<std::size_t>(m, 1, max_m);
}

std::vector<BitString> gl_list_decode(const InnerProductOracle& oracle, std::size_t n, double alpha,
                                      std::uint64_t seed, std::size_t guard, std::size_t max_m) {
  if (n > 32) throw DomainTooLarge("list decoding supports n <= 32");
  const std::size_t m = gl_seed_count(n, alpha, guard, max_m);
  const std::size_t size = std::size_t{1} << m;
  Rng rng(seed);
  // Bit j of a mask is position j of the string.
  std::vector<std::uint64_t> seeds(m);
  for (auto& s : seeds) s = hashing::column_mask(rng.bits(n));
  std::vector<std::uint64_t> point(size, 0);
  for (std::size_t J = 1; J < size; ++J) {
    const std::size_t low = static_cast<std::size_t>(std::countr_zero(J));
    point[J] = point[J & (J - 1)] ^ seeds[low];
  }
  auto to_bits = [n](std::uint64_t mask) {
    BitString b;
    b.reserve(n);
    for (std::size_t j = 0; j < n; ++j) b.push_back((mask >> j) & 1U);
    return b;
  };
  // For bit i, the sign vote of subset J under guess sigma is
  // (-1)^(q_J xor sigma.J); summing over J is a Walsh-Hadamard transform.
  std::vector<std::uint64_t> cand(size, 0);
  std::vector<std::int64_t> f(size);
  for (std::size_t i = 0; i < n; ++i) {
    f[0] = 0;
    for (std::size_t J = 1; J < size; ++J) f[J] = oracle(to_bits(point[J] ^ (std::uint64_t{1} << i))) ? -1 : 1;
    for (std::size_t len = 1; len < size; len <<= 1)
      for (std::size_t a = 0; a < size; a += 2 * len)
        for (std::size_t b = a; b < a + len; ++b) {
          const std::int64_t u = f[b], v = f[b + len];
          f[b] = u + v;
          f[b + len] = u - v;
        }
    for (std::size_t sigma = 0; sigma < size; ++sigma)
      if (f[sigma] < 0) cand[sigma] |= std::uint64_t{1} << i;
  }
  std::vector<BitString> out;
  out.reserve(size);
  for (auto c : cand) out.push_back(to_bits(c));
  return out;
}

DistinguisherFactory planted_distinguisher(double advantage) {
  if (advantage < 0 || advantage > 1) throw ValidationError("advantage must be in [0, 1]");
  return [advantage](const BitString& x) -> Distinguisher {
    return [x, advantage](const BitString&, const std::vector<BitString>& r, const BitString& bits, Rng& rng) {
      if (rng.bernoulli(advantage)) {
        for (std::size_t j = 0; j < r.size(); ++j)
          if (inner_product(x, r[j]) != (bits[j] != 0)) return false;
        return true;
      }
      return rng.bit();
    };
  };
}

Cor3Report cor3_pipeline(const ProtocolSpec& spec, const DistinguisherFactory& make_distinguisher, std::size_t n,
                         double d, double alpha, std::uint64_t trials, std::uint64_t seed, unsigned threads,
                         std::size_t max_m) {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  if (!(d > 0)) throw ValidationError("d must be > 0");
  const auto ell = static_cast<std::size_t>(std::ceil(d * std::log2(static_cast<double>(n)) - 1e-9));
  if (ell == 0 || ell > 16) throw DomainTooLarge("need 1 <= ceil(d log n) <= 16");
  constexpr std::size_t kScoreSamples = 32;

  struct Trial {
    bool success = false;
    std::size_t key_bits = 0;
    bool padded = false;
  };
  const auto res = parallel_trials(trials, threads, [&](std::uint64_t t) {
    const std::uint64_t s = derive_seed(seed, t);
    const auto run = execute(spec, n, derive_seed(s, "protocol"));
    const BitString& pi = run.outcome.transcript;
    const BitString& x = run.outcome.out_a;
    Trial tr;
    tr.key_bits = x.size();
    // Alice sends r_1..r_l after pi; the new key has l bits.
    tr.padded = pair_length(pi.size() + 2 * ell * x.size(), ell) <= n;
    if (x.empty()) {
      tr.success = true;
      return tr;
    }
    const Distinguisher dist = make_distinguisher(x);
    Rng rng(derive_seed(s, "attack"));
    std::set<BitString> candidates;
    for (std::size_t i = 1; i <= ell; ++i)
      for (std::uint64_t guess = 0; guess < (std::uint64_t{1} << (i - 1)); ++guess) {
        std::vector<BitString> fixed;
        for (std::size_t j = 1; j < i; ++j) fixed.push_back(rng.bits(x.size()));
        const BitString prefix = BitString::from_uint(guess, i - 1);
        Rng orng(rng.next());
        const InnerProductOracle oracle = [&](const BitString& r) {
          std::vector<BitString> rs = fixed;
          rs.push_back(r);
          for (std::size_t j = i + 1; j <= ell; ++j) rs.push_back(orng.bits(x.size()));
          return gl_next_bit_predictor(dist, pi, rs, prefix, orng);
        };
        for (auto& c : gl_list_decode(oracle, x.size(), alpha, rng.next(), 2, max_m)) candidates.insert(std::move(c));
      }
    // Score candidates on shared samples; ties go to the smaller string.
    std::vector<std::vector<BitString>> samples(kScoreSamples);
    for (auto& smp : samples)
      for (std::size_t j = 0; j < ell; ++j) smp.push_back(rng.bits(x.size()));
    const std::uint64_t score_seed = rng.next();
    std::optional<BitString> best;
    std::size_t best_score = 0;
    for (const auto& cand : candidates) {
      std::size_t score = 0;
      for (std::size_t q = 0; q < kScoreSamples; ++q) {
        BitString bits;
        for (const auto& r : samples[q]) bits.push_back(inner_product(cand, r));
        Rng srng(derive_seed(score_seed, q));
        score += dist(pi, samples[q], bits, srng);
      }
      if (!best || score > best_score) {
        best = cand;
        best_score = score;
      }
    }
    tr.success = best && *best == x;
    return tr;
  });

  Cor3Report r;
  r.n = n;
  r.ell = ell;
  r.trials = trials;
  r.key_bits = res.front().key_bits;
  r.padded = std::all_of(res.begin(), res.end(), [](const Trial& t) { return t.padded; });
  for (const auto& t : res) r.successes += t.success;
  r.success_rate = static_cast<double>(r.successes) / static_cast<double>(trials);
  r.baseline = std::ldexp(1.0, -static_cast<int>(r.key_bits));
  r.ci = clopper_pearson(r.successes, trials);
  return r;
}

}  // namespace kcagree
