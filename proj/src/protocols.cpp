#include "kcagree/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <boost/math/distributions/beta.hpp>

#include "kcagree/error.hpp"
#include "kcagree/parallel.hpp"
#include "kcagree/rng.hpp"

namespace kcagree {

ProtocolRun execute_with(const ProtocolSpec& spec, std::size_t n, const BitString& rand_a,
                         const BitString& rand_b) {
  if (n < spec.min_n)
    throw ValidationError(spec.name + " needs n >= " + std::to_string(spec.min_n) + ", got " + std::to_string(n));
  if (rand_a.size() != spec.rand_len_a(n) || rand_b.size() != spec.rand_len_b(n))
    throw LengthMismatch("randomness length does not match the protocol");
  auto alice = spec.alice(n, rand_a);
  auto bob = spec.bob(n, rand_b);
  const std::uint64_t bound = spec.runtime_bound(n);

  struct Side {
    Party* party;
    bool done = false;
    std::uint64_t calls = 0;
    const char* who;
  };
  Side sides[2] = {{alice.get(), false, 0, "Alice"}, {bob.get(), false, 0, "Bob"}};
  BitString t;
  auto ask = [&](Side& s) -> std::optional<bool> {
    if (s.done) return std::nullopt;
    ++s.calls;
    auto bit = s.party->next(t);
    if (!bit) s.done = true;
    if (s.calls + s.party->steps() > bound)
      throw RuntimeBoundExceeded(spec.name + ": " + s.who + " exceeded " + std::to_string(bound) + " steps");
    return bit;
  };
  std::size_t turn = 0;
  for (;;) {
    if (auto bit = ask(sides[turn])) {
      t.push_back(*bit);
      turn ^= 1U;
      continue;
    }
    auto other = ask(sides[turn ^ 1U]);
    if (!other) break;
    t.push_back(false);
    t.push_back(*other);
  }

  ProtocolRun run;
  run.rand_a = rand_a;
  run.rand_b = rand_b;
  run.outcome.out_a = alice->output(t);
  run.outcome.out_b = bob->output(t);
  run.outcome.transcript = std::move(t);
  run.outcome.steps_a = sides[0].calls + alice->steps();
  run.outcome.steps_b = sides[1].calls + bob->steps();
  run.outcome.halted_a = run.outcome.halted_b = true;
  return run;
}

ProtocolRun execute(const ProtocolSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n < spec.min_n)
    throw ValidationError(spec.name + " needs n >= " + std::to_string(spec.min_n) + ", got " + std::to_string(n));
  Rng rng(seed);
  const BitString ra = rng.bits(spec.rand_len_a(n));
  const BitString rb = rng.bits(spec.rand_len_b(n));
  return execute_with(spec, n, ra, rb);
}

BinomialInterval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw ValidationError("interval needs at least one trial");
  if (successes > trials) throw ValidationError("more successes than trials");
  const double alpha = 1.0 - confidence;
  const double k = static_cast<double>(successes), n = static_cast<double>(trials);
  BinomialInterval ci;
  if (successes > 0) ci.low = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
  if (successes < trials)
    ci.high = boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
  return ci;
}

AgreementReport estimate_agreement(const ProtocolSpec& spec, std::size_t n, std::uint64_t trials,
                                   std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  const auto agree = parallel_trials(trials, threads, [&](std::uint64_t i) -> std::uint8_t {
    const auto run = execute(spec, n, derive_seed(seed, i));
    return run.outcome.out_a == run.outcome.out_b;
  });
  AgreementReport r;
  r.trials = trials;
  r.agree_count = static_cast<std::uint64_t>(std::count(agree.begin(), agree.end(), 1));
  r.estimate = static_cast<double>(r.agree_count) / static_cast<double>(trials);
  const auto ci = clopper_pearson(r.agree_count, trials);
  r.ci_low = ci.low;
  r.ci_high = ci.high;
  return r;
}

DhLikeReport check_dh_like(const ProtocolSpec& spec, std::size_t n) {
  const std::size_t la = spec.rand_len_a(n), lb = spec.rand_len_b(n);
  if (la + lb > 24) throw DomainTooLarge("bijectivity check needs at most 24 random bits");
  DhLikeReport r;
  r.domain_size = std::uint64_t{1} << (la + lb);
  std::unordered_map<BitString, std::uint64_t> first;
  std::unordered_map<BitString, std::uint64_t> count;
  for (std::uint64_t idx = 0; idx < r.domain_size; ++idx) {
    const BitString ra = BitString::from_uint(idx >> lb, la);
    const BitString rb = BitString::from_uint(idx & ((std::uint64_t{1} << lb) - 1), lb);
    const BitString pi = execute_with(spec, n, ra, rb).outcome.transcript;
    const auto [it, fresh] = first.emplace(pi, idx);
    ++count[pi];
    if (!fresh && !r.witness) {
      const std::uint64_t j = it->second;
      r.witness = {{BitString::from_uint(j >> lb, la), BitString::from_uint(j & ((std::uint64_t{1} << lb) - 1), lb)},
                   {ra, rb}};
    }
  }
  r.image_size = first.size();
  r.bijective = r.image_size == r.domain_size;
  // Sum in a fixed order so the value does not depend on hash-table layout.
  std::vector<std::uint64_t> counts;
  for (const auto& [pi, c] : count) counts.push_back(c);
  std::sort(counts.begin(), counts.end());
  const double total = static_cast<double>(r.domain_size);
  for (auto c : counts) {
    const double p = static_cast<double>(c) / total;
    r.transcript_entropy_bits -= p * std::log2(p);
  }
  return r;
}

StandardReport check_standard(const ProtocolSpec& spec, std::size_t n, std::uint64_t trials,
                              std::uint64_t seed, unsigned threads) {
  if (trials == 0) throw ValidationError("trials must be >= 1");
  struct Obs {
    std::size_t length = 0;
    std::uint64_t steps = 0;
    bool agree = false;
  };
  const std::uint64_t bound = spec.runtime_bound(n);
  const auto obs = parallel_trials(trials, threads, [&](std::uint64_t i) {
    const auto run = execute(spec, n, derive_seed(seed, i));
    return Obs{pair_length(run.outcome.transcript.size(), run.outcome.out_a.size()),
               std::max(run.outcome.steps_a, run.outcome.steps_b), run.outcome.out_a == run.outcome.out_b};
  });
  StandardReport r;
  r.trials = trials;
  std::uint64_t bad_len = 0;
  for (const auto& o : obs) {
    r.max_steps = std::max(r.max_steps, o.steps);
    if (o.length != n) ++bad_len;
    r.agreement.agree_count += o.agree;
  }
  r.length_ok = bad_len == 0;
  r.runtime_ok = r.max_steps <= bound;
  r.agreement.trials = trials;
  r.agreement.estimate = static_cast<double>(r.agreement.agree_count) / static_cast<double>(trials);
  const auto ci = clopper_pearson(r.agreement.agree_count, trials);
  r.agreement.ci_low = ci.low;
  r.agreement.ci_high = ci.high;
  if (!r.length_ok)
    r.violations.push_back("|(pi,x)| != n in " + std::to_string(bad_len) + " of " + std::to_string(trials) +
                           " runs");
  if (!r.runtime_ok)
    r.violations.push_back("steps " + std::to_string(r.max_steps) + " exceed bound " + std::to_string(bound));
  // Randomness lengths are functions of n alone by construction of ProtocolSpec.
  return r;
}

namespace {

BitString padded_key(const BitString& key, std::size_t n, std::size_t pi_len) {
  const std::size_t base = 2 * pi_len + 1;
  if (n < base + key.size()) throw ValidationError("n too small for the key");
  return key + BitString(n - base - key.size(), false);
}

class NullParty : public Party {
 public:
  std::optional<bool> next(const BitString&) override { return std::nullopt; }
  BitString output(const BitString&) override { return {}; }
};

class CoinParty : public Party {
 public:
  explicit CoinParty(bool b) : b_(b) {}
  std::optional<bool> next(const BitString&) override { return std::nullopt; }
  BitString output(const BitString&) override { return BitString(1, b_); }

 private:
  bool b_;
};

// Sends a fixed script: each entry is a bit to send; after the script the
// party is done. Output is computed by a callback on the final transcript.
class ScriptParty : public Party {
 public:
  ScriptParty(BitString script, std::function<BitString(const BitString&)> out)
      : script_(std::move(script)), out_(std::move(out)) {}
  std::optional<bool> next(const BitString&) override {
    if (pos_ >= script_.size()) return std::nullopt;
    return script_[pos_++] != 0;
  }
  BitString output(const BitString& t) override { return out_(t); }

 private:
  BitString script_;
  std::size_t pos_ = 0;
  std::function<BitString(const BitString&)> out_;
};

BitString bits_at(const BitString& t, std::initializer_list<std::size_t> positions) {
  BitString out;
  for (auto p : positions) out.push_back(p < t.size() && t[p]);
  return out;
}

}  // namespace

ProtocolSpec null_protocol() {
  ProtocolSpec s;
  s.name = "null";
  s.rand_len_a = s.rand_len_b = [](std::size_t) { return std::size_t{0}; };
  s.alice = s.bob = [](std::size_t, const BitString&) { return std::make_unique<NullParty>(); };
  s.runtime_bound = [](std::size_t) { return std::uint64_t{2}; };
  return s;
}

ProtocolSpec coinflip_protocol() {
  ProtocolSpec s;
  s.name = "coinflip";
  s.rand_len_a = s.rand_len_b = [](std::size_t) { return std::size_t{1}; };
  s.alice = s.bob = [](std::size_t, const BitString& r) { return std::make_unique<CoinParty>(r[0] != 0); };
  s.runtime_bound = [](std::size_t) { return std::uint64_t{2}; };
  return s;
}

namespace toydh {

unsigned message(unsigned v) {
  if (v >= 1 && v <= 10) {
    unsigned r = 1;
    for (unsigned i = 0; i < v; ++i) r = r * kG % kP;
    return r;
  }
  return v;
}

unsigned key(unsigned own_v, unsigned own_msg, unsigned other_msg) {
  if (own_v >= 1 && own_v <= 10 && other_msg >= 1 && other_msg <= 10) {
    unsigned r = 1;
    for (unsigned i = 0; i < own_v; ++i) r = r * other_msg % kP;
    return r;
  }
  return own_msg ^ other_msg;
}

}  // namespace toydh

ProtocolSpec toydh_protocol() {
  // Transcript: a1 0 a2 0 a3 0 a4 b1 0 b2 0 b3 0 b4.
  ProtocolSpec s;
  s.name = "toydh";
  s.min_n = 33;
  s.rand_len_a = s.rand_len_b = [](std::size_t) { return std::size_t{4}; };
  s.alice = [](std::size_t n, const BitString& r) {
    const auto v = static_cast<unsigned>(r.to_uint());
    const unsigned msg = toydh::message(v);
    return std::make_unique<ScriptParty>(BitString::from_uint(msg, 4), [=](const BitString& t) {
      const auto other = static_cast<unsigned>(bits_at(t, {7, 9, 11, 13}).to_uint());
      return padded_key(BitString::from_uint(toydh::key(v, msg, other), 4), n, 14);
    });
  };
  s.bob = [](std::size_t n, const BitString& r) {
    const auto v = static_cast<unsigned>(r.to_uint());
    const unsigned msg = toydh::message(v);
    return std::make_unique<ScriptParty>(BitString("000") + BitString::from_uint(msg, 4), [=](const BitString& t) {
      const auto other = static_cast<unsigned>(bits_at(t, {0, 2, 4, 6}).to_uint());
      return padded_key(BitString::from_uint(toydh::key(v, msg, other), 4), n, 14);
    });
  };
  s.runtime_bound = [](std::size_t) { return std::uint64_t{16}; };
  return s;
}

ProtocolSpec xorkey_protocol() {
  // Transcript: a1 0 a2 b1 0 b2.
  ProtocolSpec s;
  s.name = "xorkey";
  s.min_n = 15;
  s.rand_len_a = s.rand_len_b = [](std::size_t) { return std::size_t{2}; };
  s.alice = [](std::size_t n, const BitString& r) {
    return std::make_unique<ScriptParty>(r, [=](const BitString& t) {
      const auto k = r.to_uint() ^ bits_at(t, {3, 5}).to_uint();
      return padded_key(BitString::from_uint(k, 2), n, 6);
    });
  };
  s.bob = [](std::size_t n, const BitString& r) {
    return std::make_unique<ScriptParty>(BitString("0") + r, [=](const BitString& t) {
      const auto k = r.to_uint() ^ bits_at(t, {0, 2}).to_uint();
      return padded_key(BitString::from_uint(k, 2), n, 6);
    });
  };
  s.runtime_bound = [](std::size_t) { return std::uint64_t{8}; };
  return s;
}

std::size_t levin_hash_rows(double c, std::size_t n) {
  if (c < 0) throw ValidationError("c must be >= 0");
  if (n == 0) throw ValidationError("n must be >= 1");
  return static_cast<std::size_t>(std::ceil((c + 5.0) * std::log2(static_cast<double>(n)) - 1e-9));
}

BitString hash_input(const BitString& x, std::size_t m) {
  if (x.size() >= m) throw LengthMismatch("hash input longer than the hash domain");
  return x + BitString("1") + BitString(m - x.size() - 1, false);
}

BitString hash_check_blob(const hashing::MatrixHash& h, const BitString& hx, bool eq) {
  const BitString payload = h.header() + h.serialize() + hx;
  BitString out;
  out.reserve(2 * payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    out.push_back(payload[i]);
    out.push_back(i + 1 == payload.size() ? eq : false);
  }
  return out;
}

namespace {

struct LevinShape {
  std::size_t n, k, m, T, blob;
};

LevinShape levin_shape(const LevinParams& p, std::size_t n) {
  LevinShape s;
  s.n = n;
  s.k = levin_hash_rows(p.c, n);
  s.m = n + 1;
  s.T = p.T.steps(n);
  s.blob = 2 * hashing::MatrixHash::header_field_width(s.k, s.m) + s.k * s.m + s.k;
  return s;
}

std::size_t sample_length(const BitString& r, std::size_t n) {
  // Bias from the modulo is below 2n / 2^32.
  return 1 + static_cast<std::size_t>(r.substr(0, 32).to_uint() % (2 * n));
}

class LevinParty : public Party {
 public:
  LevinParty(const LevinShape& shape, const BitString& rand, bool alice)
      : shape_(shape), alice_(alice),
        machine_(rand.substr(32, sample_length(rand, shape.n)),
                 vm::VmLimits{shape.T, shape.n, 2 * shape.T + 2}) {
    if (alice_) hash_bits_ = rand.substr(32 + 2 * shape.n);
  }

  std::optional<bool> next(const BitString& t) override {
    // Partner bits are at odd positions for Alice and even ones for Bob.
    const std::size_t parity = alice_ ? 1 : 0;
    for (; seen_ < t.size() && seen_ < 2 * shape_.T; ++seen_)
      if (seen_ % 2 == parity) machine_.deliver(t[seen_] != 0);
    if (replies_ < shape_.T) {
      ++replies_;
      if (!machine_.active()) return false;
      const auto ev = machine_.run_until_event();
      return ev.event == vm::Machine::Event::Sent ? ev.bit : false;
    }
    if (alice_) return alice_check();
    return bob_check(t);
  }

  BitString output(const BitString& t) override {
    if (t.empty() || !t[t.size() - 1]) return {};
    return own_output();
  }

  std::uint64_t steps() const override { return machine_.steps(); }

 private:
  BitString own_output() const {
    return machine_.status() == vm::Status::Halted ? machine_.output() : BitString{};
  }

  std::optional<bool> alice_check() {
    if (!blob_ready_) {
      const auto h = hashing::MatrixHash::from_bits(shape_.k, shape_.m, hash_bits_);
      payload_ = h.header() + h.serialize() + h.apply(hash_input(own_output(), shape_.m));
      blob_ready_ = true;
    }
    if (sent_ >= payload_.size()) return std::nullopt;
    return payload_[sent_++] != 0;
  }

  std::optional<bool> bob_check(const BitString& t) {
    if (sent_ > shape_.blob) return std::nullopt;
    if (sent_ + 1 < shape_.blob) {
      ++sent_;
      return false;
    }
    sent_ = shape_.blob + 1;  // done after this reply
    BitString payload;
    for (std::size_t i = 2 * shape_.T; i < t.size(); i += 2) payload.push_back(t[i]);
    std::size_t pos = 0;
    const auto h = hashing::MatrixHash::parse_with_header(
        payload, pos, hashing::MatrixHash::header_field_width(shape_.k, shape_.m));
    const BitString hx = payload.substr(pos);
    return h.apply(hash_input(own_output(), shape_.m)) == hx;
  }

  LevinShape shape_;
  bool alice_;
  vm::Machine machine_;
  BitString hash_bits_;
  BitString payload_;
  bool blob_ready_ = false;
  std::size_t seen_ = 0;
  std::size_t replies_ = 0;
  std::size_t sent_ = 0;
};

}  // namespace

ProtocolSpec levin_search_protocol(const LevinParams& params) {
  if (params.c < 0) throw ValidationError("c must be >= 0");
  ProtocolSpec s;
  s.name = "levin";
  s.rand_len_a = [params](std::size_t n) {
    const auto sh = levin_shape(params, n);
    return 32 + 2 * n + sh.k * sh.m;
  };
  s.rand_len_b = [](std::size_t n) { return 32 + 2 * n; };
  s.alice = [params](std::size_t n, const BitString& r) {
    return std::make_unique<LevinParty>(levin_shape(params, n), r, true);
  };
  s.bob = [params](std::size_t n, const BitString& r) {
    return std::make_unique<LevinParty>(levin_shape(params, n), r, false);
  };
  s.runtime_bound = [params](std::size_t n) {
    const auto sh = levin_shape(params, n);
    return static_cast<std::uint64_t>(2 * sh.T + sh.blob + 4);
  };
  return s;
}

std::vector<std::string> protocol_names() { return {"null", "coinflip", "toydh", "xorkey", "levin"}; }

ProtocolSpec protocol_by_name(const std::string& name, const LevinParams& params) {
  if (name == "null") return null_protocol();
  if (name == "coinflip") return coinflip_protocol();
  if (name == "toydh") return toydh_protocol();
  if (name == "xorkey") return xorkey_protocol();
  if (name == "levin") return levin_search_protocol(params);
  throw ValidationError("unknown protocol '" + name + "'");
}

}  // namespace kcagree
