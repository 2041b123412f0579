#include <doctest.h>

#include <cmath>
#include <set>

#include "kcagree/error.hpp"
#include "kcagree/protocols.hpp"

using namespace kcagree;

namespace {

// Sends a fixed script, then stops; outputs a fixed string.
class Scripted : public Party {
 public:
  Scripted(BitString script, BitString out) : script_(std::move(script)), out_(std::move(out)) {}
  std::optional<bool> next(const BitString&) override {
    if (pos_ == script_.size()) return std::nullopt;
    return script_[pos_++];
  }
  BitString output(const BitString&) override { return out_; }

 private:
  BitString script_, out_;
  std::size_t pos_ = 0;
};

// Alice sends her two random bits ANDed with 0.
ProtocolSpec masked_protocol() {
  ProtocolSpec s;
  s.name = "masked";
  s.rand_len_a = [](std::size_t) { return std::size_t{2}; };
  s.rand_len_b = [](std::size_t) { return std::size_t{0}; };
  s.alice = [](std::size_t, const BitString&) { return std::make_unique<Scripted>(BitString("00"), BitString()); };
  s.bob = [](std::size_t, const BitString&) { return std::make_unique<Scripted>(BitString(), BitString()); };
  s.runtime_bound = [](std::size_t) { return std::uint64_t{8}; };
  return s;
}

// |(pi, x)| = n + 1 for n >= 2.
ProtocolSpec too_long_protocol() {
  ProtocolSpec s = masked_protocol();
  s.name = "too_long";
  s.rand_len_a = [](std::size_t) { return std::size_t{0}; };
  s.alice = s.bob = [](std::size_t n, const BitString&) {
    return std::make_unique<Scripted>(BitString(), BitString(n, false));
  };
  return s;
}

ProtocolSpec chatty_protocol() {
  ProtocolSpec s = too_long_protocol();
  s.name = "chatty";
  s.alice = [](std::size_t, const BitString&) { return std::make_unique<Scripted>(BitString(20, true), BitString()); };
  return s;
}

}  // namespace

TEST_CASE("null protocol") {
  const auto run = execute(null_protocol(), 1, 42);
  CHECK(run.outcome.transcript.empty());
  CHECK(run.outcome.out_a.empty());
  CHECK(run.outcome.out_b.empty());
  const auto rep = estimate_agreement(null_protocol(), 1, 100, 1);
  CHECK(rep.estimate == 1.0);
  CHECK(rep.ci_low == doctest::Approx(std::pow(0.025, 1.0 / 100)));
  const auto dh = check_dh_like(null_protocol(), 1);
  CHECK(dh.bijective);
  CHECK(dh.domain_size == 1);
  const auto st = check_standard(null_protocol(), 1, 10, 1);
  CHECK(st.length_ok);
}

TEST_CASE("replay on recorded randomness") {
  for (const auto& name : protocol_names()) {
    const auto spec = protocol_by_name(name);
    const std::size_t n = std::max<std::size_t>(spec.min_n, 16);
    for (std::uint64_t seed = 0; seed < (name == "levin" ? 100U : 1000U); ++seed) {
      const auto run = execute(spec, n, derive_seed(99, seed));
      const auto again = execute_with(spec, n, run.rand_a, run.rand_b);
      CHECK(again.outcome == run.outcome);
      CHECK(run.rand_a.size() == spec.rand_len_a(n));
      CHECK(run.rand_b.size() == spec.rand_len_b(n));
    }
  }
}

TEST_CASE("transcript entropy and bijectivity against a direct count") {
  for (const auto& spec : {toydh_protocol(), xorkey_protocol(), masked_protocol(), coinflip_protocol()}) {
    const std::size_t n = std::max<std::size_t>(spec.min_n, 2);
    const std::size_t la = spec.rand_len_a(n), lb = spec.rand_len_b(n);
    std::set<BitString> seen;
    for (std::uint64_t a = 0; a < (1ULL << la); ++a)
      for (std::uint64_t b = 0; b < (1ULL << lb); ++b)
        seen.insert(execute_with(spec, n, BitString::from_uint(a, la), BitString::from_uint(b, lb)).outcome.transcript);
    const auto r = check_dh_like(spec, n);
    CHECK(r.image_size == seen.size());
    CHECK(r.bijective == (seen.size() == (1ULL << (la + lb))));
    if (r.bijective) CHECK(r.transcript_entropy_bits == doctest::Approx(double(la + lb)));
  }
  CHECK(check_dh_like(toydh_protocol(), 33).bijective);
  const auto masked = check_dh_like(masked_protocol(), 2);
  CHECK_FALSE(masked.bijective);
  REQUIRE(masked.witness.has_value());
  const auto& [w1, w2] = *masked.witness;
  CHECK(w1 != w2);
  CHECK(execute_with(masked_protocol(), 2, w1.first, w1.second).outcome.transcript ==
        execute_with(masked_protocol(), 2, w2.first, w2.second).outcome.transcript);
}

TEST_CASE("toy Diffie-Hellman") {
  std::set<unsigned> msgs;
  for (unsigned v = 0; v < 16; ++v) msgs.insert(toydh::message(v));
  CHECK(msgs.size() == 16);
  for (unsigned a = 0; a < 16; ++a)
    for (unsigned b = 0; b < 16; ++b)
      CHECK(toydh::key(a, toydh::message(a), toydh::message(b)) == toydh::key(b, toydh::message(b), toydh::message(a)));
  // 2^(3*4) mod 11 = 4.
  CHECK(toydh::key(3, toydh::message(3), toydh::message(4)) == 4);
  const auto st = check_standard(toydh_protocol(), 40, 200, 3);
  CHECK(st.pass());
  CHECK(st.agreement.estimate == 1.0);
  CHECK_THROWS_AS(execute(toydh_protocol(), 32, 1), ValidationError);
  const auto run = execute(toydh_protocol(), 40, 5);
  CHECK(pair_length(run.outcome.transcript.size(), run.outcome.out_a.size()) == 40);
}

TEST_CASE("standardness violations are reported") {
  const auto st = check_standard(too_long_protocol(), 4, 10, 1);
  CHECK_FALSE(st.length_ok);
  CHECK_FALSE(st.pass());
  CHECK_THROWS_AS(execute(chatty_protocol(), 2, 0), RuntimeBoundExceeded);
}

TEST_CASE("coin flip agreement") {
  const auto r = estimate_agreement(coinflip_protocol(), 1, 20000, 8);
  CHECK(r.ci_low < 0.5);
  CHECK(r.ci_high > 0.5);
  CHECK(std::abs(r.estimate - 0.5) < 0.02);
  CHECK(estimate_agreement(coinflip_protocol(), 1, 2000, 8, 4).agree_count ==
        estimate_agreement(coinflip_protocol(), 1, 2000, 8, 1).agree_count);
}

TEST_CASE("Clopper-Pearson") {
  const auto a = clopper_pearson(0, 10);
  CHECK(a.low == 0);
  CHECK(a.high == doctest::Approx(1 - std::pow(0.025, 0.1)));
  const auto b = clopper_pearson(10, 10);
  CHECK(b.high == 1);
  CHECK(b.low == doctest::Approx(std::pow(0.025, 0.1)));
  const auto c = clopper_pearson(50, 100);
  CHECK(c.low == doctest::Approx(0.3983).epsilon(1e-3));
  CHECK(c.high == doctest::Approx(0.6017).epsilon(1e-3));
  CHECK_THROWS_AS(clopper_pearson(1, 0), ValidationError);
}

TEST_CASE("Levin search") {
  CHECK(levin_hash_rows(1.0, 16) == 24);
  CHECK(levin_hash_rows(0.0, 8) == 15);
  CHECK(hash_input(BitString("01"), 5) == BitString("01100"));
  const auto spec = levin_search_protocol({});
  const auto rep = estimate_agreement(spec, 8, 3000, 4);
  CHECK(rep.agree_count == rep.trials);
  CHECK(rep.ci_high >= 1.0 - std::pow(2.0, -double(levin_hash_rows(1.0, 8))));
  const auto st = check_standard(spec, 8, 20, 1);
  CHECK_FALSE(st.length_ok);
}
