#include <doctest.h>

#include <fstream>

#include <json.hpp>

#include "kcagree/error.hpp"
#include "kcagree/rng.hpp"
#include "kcagree/toyvm.hpp"
#include "oracle.hpp"

using namespace kcagree;
using namespace kcagree::vm;

namespace {

oracle::Limits to_oracle(const VmLimits& l) { return {l.max_steps, l.max_output, l.max_transcript}; }

nlohmann::json golden() {
  std::ifstream in(KCAGREE_GOLDEN_DIR "/complexity.json");
  REQUIRE(in.good());
  return nlohmann::json::parse(in);
}

ComplexityValue from_json(const nlohmann::json& v) {
  return v.is_string() ? ComplexityValue::infinite() : ComplexityValue::of(v.get<std::size_t>());
}

}  // namespace

TEST_CASE("hand-stepped programs") {
  const VmLimits lim{64, 64, 64};
  CHECK(run_single(assemble({Op::Halt}), BitString("1"), lim) == BitString(""));
  CHECK(run_single(BitString(""), BitString(""), lim) == BitString(""));
  const auto echo = assemble({Op::ReadCond, Op::JmpBack});
  CHECK(echo.size() == 6);
  CHECK(run_single(echo, BitString("101"), lim) == BitString("101"));
  CHECK_FALSE(run_single(assemble({Op::Halt}), {}, VmLimits{0, 8, 8}).has_value());
  // Output overflow is a timeout.
  CHECK_FALSE(run_single(assemble({Op::Out1, Op::Out1}), {}, VmLimits{64, 1, 8}).has_value());

  const auto r = run_interactive(assemble({Op::Send1, Op::Halt}), assemble({Op::Halt}), lim);
  CHECK(r.transcript == BitString("1"));
  CHECK(r.halted_a);
  CHECK(r.halted_b);
  const auto silent = run_interactive({}, {}, lim);
  CHECK(silent.transcript.empty());
  CHECK(silent.out_a.empty());
  CHECK(silent.out_b.empty());
}

TEST_CASE("interpreter agrees with the independent model on random programs") {
  Rng rng(7);
  for (int i = 0; i < 4000; ++i) {
    const auto a = rng.bits(rng.below(19));
    const auto b = rng.bits(rng.below(19));
    const auto cond = rng.bits(rng.below(5));
    const VmLimits lim{rng.below(40), 1 + rng.below(8), 1 + rng.below(10)};
    const auto ol = to_oracle(lim);

    const auto mine = run_single(a, cond, lim);
    const auto theirs = oracle::run_alone(a.to_string(), cond.to_string(), ol);
    REQUIRE(mine.has_value() == theirs.has_value());
    if (mine) CHECK(mine->to_string() == *theirs);

    const auto r = run_interactive(a, b, lim);
    const auto t = oracle::run_pair(a.to_string(), b.to_string(), ol);
    CHECK(r.transcript.to_string() == t.transcript);
    CHECK(r.out_a.to_string() == t.out_a);
    CHECK(r.out_b.to_string() == t.out_b);
    CHECK(r.halted_a == t.halt_a);
    CHECK(r.halted_b == t.halt_b);
    CHECK(r.steps_a == t.used_a);
    CHECK(r.steps_b == t.used_b);
    CHECK(run_interactive(a, b, lim) == r);
  }
}

TEST_CASE("plain complexity equals brute force") {
  for (std::size_t xl = 0; xl <= 4; ++xl)
    for (const auto& x : all_strings(xl))
      for (const char* cond : {"", "1", "01"}) {
        const auto lim = TimeBound::quadratic().limits(xl);
        const int want = oracle::plain(x.to_string(), cond, to_oracle(lim), 12);
        const auto got = plain_complexity(x, BitString(cond), lim, 12);
        CHECK_MESSAGE(got == (want < 0 ? ComplexityValue::infinite() : ComplexityValue::of(want)), x.to_string());
      }
  CHECK_FALSE(plain_complexity(BitString("010101"), {}, TimeBound::quadratic().limits(6), 0).finite());
  CHECK_THROWS_AS(plain_complexity(BitString("0"), {}, VmLimits{}, 40), DomainTooLarge);
}

TEST_CASE("interactive complexity equals brute force at small bound") {
  for (std::size_t pl = 0; pl <= 2; ++pl)
    for (const auto& pi : all_strings(pl))
      for (std::size_t xl = 0; xl <= 2; ++xl)
        for (const auto& x : all_strings(xl)) {
          const auto lim = TimeBound::quadratic().limits(pl + xl);
          const int want = oracle::interactive(pi.to_string(), x.to_string(), to_oracle(lim), 8);
          const auto got = interactive_complexity(pi, x, lim, 8);
          CHECK(got == (want < 0 ? ComplexityValue::infinite() : ComplexityValue::of(want)));
        }
  CHECK_THROWS_AS(interactive_complexity({}, {}, VmLimits{}, 40), DomainTooLarge);
}

TEST_CASE("golden complexity table") {
  const auto doc = golden();
  REQUIRE(doc.at("schema") == 1);
  std::size_t checked = 0;
  for (const auto& e : doc.at("interactive")) {
    const BitString pi(e.at("pi").get<std::string>()), x(e.at("x").get<std::string>());
    const auto lim = TimeBound::quadratic().limits(pi.size() + x.size());
    REQUIRE(lim.max_steps == e.at("t_steps").get<std::uint64_t>());
    CHECK(interactive_complexity(pi, x, lim, e.at("max_len")) == from_json(e.at("value")));
    ++checked;
  }
  CHECK(checked == 225);
  for (const auto& e : doc.at("plain")) {
    const BitString x(e.at("x").get<std::string>()), cond(e.at("condition").get<std::string>());
    const auto lim = TimeBound::quadratic().limits(x.size());
    CHECK(plain_complexity(x, cond, lim, e.at("max_len")) == from_json(e.at("value")));
  }
}

TEST_CASE("interactive table equals direct search") {
  const auto table = build_interactive_table(TimeBound::quadratic(), 9, 4);
  for (std::size_t pl = 0; pl <= 2; ++pl)
    for (const auto& pi : all_strings(pl))
      for (std::size_t xl = 0; pl + xl <= 4; ++xl)
        for (const auto& x : all_strings(xl)) {
          const auto lim = TimeBound::quadratic().limits(pl + xl);
          CHECK(table.lookup(pi, x) == interactive_complexity(pi, x, lim, 9));
        }
}

TEST_CASE("larger time bounds never increase complexity") {
  for (const auto& x : all_strings(3)) {
    std::optional<std::size_t> prev;
    for (std::uint64_t steps : {4, 8, 16, 32, 64}) {
      const VmLimits lim{steps, 32, 32};
      const auto v = plain_complexity(x, {}, lim, 12);
      if (prev) {
        REQUIRE(v.finite());
        CHECK(v.value() <= *prev);
      }
      if (v.finite()) prev = v.value();
    }
  }
  const BitString pi("01"), x("1");
  std::optional<std::size_t> prev;
  for (std::uint64_t steps : {4, 8, 16, 32}) {
    const auto v = interactive_complexity(pi, x, VmLimits{steps, 32, 32}, 10);
    if (prev) {
      REQUIRE(v.finite());
      CHECK(v.value() <= *prev);
    }
    if (v.finite()) prev = v.value();
  }
}

TEST_CASE("time bound presets") {
  CHECK(TimeBound::parse("n2").steps(3) == 25);
  CHECK(TimeBound::parse("nlogn").steps(2) == 64);
  CHECK(TimeBound::parse("fixed:7").steps(100) == 7);
  CHECK_THROWS_AS(TimeBound::parse("cubic"), ValidationError);
  CHECK(split_cost(0) == 0);
  CHECK(split_cost(1) == 2);
  CHECK(split_cost(9) == 8);
}
