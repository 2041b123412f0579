// One PASS/FAIL line per acceptance criterion; exits 1 if any fails.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "kcagree/bitstring.hpp"
#include "kcagree/hashing.hpp"
#include "kcagree/reports.hpp"
#include "kcagree/toyvm.hpp"

using namespace kcagree;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

json golden() {
  std::ifstream in(KCAGREE_GOLDEN_DIR "/complexity.json");
  if (!in) throw std::runtime_error("golden file missing");
  return json::parse(in);
}

json report(const std::string& ex, const json& flags, unsigned threads = 1) {
  return reports::run(ex, reports::resolve(ex, json::object(), flags), threads);
}

Outcome pair_law() {
  std::size_t checked = 0;
  for (std::size_t pl = 0; pl <= 4; ++pl)
    for (const auto& pi : all_strings(pl))
      for (std::size_t xl = 0; xl <= 4; ++xl)
        for (const auto& x : all_strings(xl)) {
          const auto code = encode_pair(pi, x).encoded;
          if (code.size() != 2 * pl + 1 + xl) return {false, "length law fails"};
          if (decode_pair(code) != std::pair{pi, x}) return {false, "round trip fails"};
          ++checked;
        }
  return {true, std::to_string(checked) + " pairs"};
}

Outcome universality() {
  std::size_t families = 0;
  for (std::size_t rho = 1; rho <= 4; ++rho)
    for (std::size_t k = 0; k <= 3; ++k) {
      const auto r = hashing::verify_universality(rho, k);
      if (!r.exact) return {false, "rho=" + std::to_string(rho) + " k=" + std::to_string(k)};
      ++families;
    }
  return {true, std::to_string(families) + " families, every pair collides on exactly 2^-k"};
}

Outcome observation(const char* which) {
  std::string detail;
  bool ok = true;
  for (unsigned k : {1U, 2U}) {
    const auto r = report("hash_verify", {{"rho", 3U}, {"k", k}}).at("result").at(which);
    ok = ok && r.at("holds").get<bool>();
    const char* key = std::string(which) == "observation_e" ? "min_support_ratio" : "min_defined_mass";
    detail += "k=" + std::to_string(k) + ": " + std::to_string(r.at("sets").get<int>()) + " sets, min " +
              r.at(key).get<std::string>() + "; ";
  }
  return {ok, detail};
}

Outcome lemma5() {
  const auto start = std::chrono::steady_clock::now();
  bool ok = true;
  std::string detail;
  for (unsigned rho = 1; rho <= 3; ++rho) {
    const auto r = report("lemma5", {{"rho", rho}}).at("result");
    ok = ok && r.at("pass").get<bool>();
    detail += "rho=" + std::to_string(rho) + " " + std::to_string(r.at("families").get<std::uint64_t>()) + " " +
              r.at("family").get<std::string>() + " partitions, min defined " +
              r.at("min_defined_mass").get<std::string>() + ", max distance " + r.at("max_distance").get<std::string>() +
              "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f s", secs);
  return {ok && secs <= 120.0, detail + buf};
}

vm::ComplexityValue from_json(const json& v) {
  return v.is_string() ? vm::ComplexityValue::infinite() : vm::ComplexityValue::of(v.get<std::size_t>());
}

Outcome complexity_oracle(const json& g) {
  std::size_t ci = 0, plain = 0;
  for (const auto& e : g.at("interactive")) {
    const BitString pi(e.at("pi").get<std::string>()), x(e.at("x").get<std::string>());
    const auto lim = vm::TimeBound::quadratic().limits(pi.size() + x.size());
    if (vm::interactive_complexity(pi, x, lim, e.at("max_len")) != from_json(e.at("value")))
      return {false, "CI mismatch at (" + pi.to_string() + "," + x.to_string() + ")"};
    ++ci;
  }
  for (const auto& e : g.at("plain")) {
    const BitString x(e.at("x").get<std::string>()), cond(e.at("condition").get<std::string>());
    const auto lim = vm::TimeBound::quadratic().limits(x.size());
    if (vm::plain_complexity(x, cond, lim, e.at("max_len")) != from_json(e.at("value")))
      return {false, "C mismatch at " + x.to_string() + "|" + cond.to_string()};
    ++plain;
  }
  return {true, std::to_string(ci) + " CI and " + std::to_string(plain) + " C values equal the brute-force oracle"};
}

Outcome concatenation(const json& g) {
  const std::size_t c_vm = g.at("c_vm");
  const std::size_t steps = g.at("pair_code_steps"), search = g.at("pair_code_search");
  vm::SearchOptions opts;
  opts.max_plain_len_guard = search;
  std::size_t checked = 0;
  for (const auto& e : g.at("concatenation")) {
    const BitString pi(e.at("pi").get<std::string>()), x(e.at("x").get<std::string>());
    const auto ci = vm::interactive_complexity(pi, x, vm::TimeBound::quadratic().limits(pi.size() + x.size()), 10);
    const auto code = encode_pair(pi, x).encoded;
    const auto c = vm::plain_complexity(code, {}, vm::VmLimits{steps, code.size(), code.size()}, search, opts);
    if (!ci.finite() || !c.finite()) return {false, "missing value at (" + pi.to_string() + "," + x.to_string() + ")"};
    if (c.value() > ci.value() + vm::split_cost(ci.value()) + c_vm)
      return {false, "bound fails at (" + pi.to_string() + "," + x.to_string() + ")"};
    ++checked;
  }
  return {true, std::to_string(checked) + " instances, c_vm = " + std::to_string(c_vm)};
}

Outcome leakage(std::size_t c_vm) {
  const auto r = report("break", {{"protocol", "toydh"}, {"n", 40U}, {"trials", 10000U}, {"c_vm", c_vm}}).at("result");
  char buf[200];
  std::snprintf(buf, sizeof buf, "p_real %.4f, p_uniform %.4f, gap CI [%.4f, %.4f] over %llu trials",
                r["estimates"]["p_real"].get<double>(), r["estimates"]["p_uniform"].get<double>(),
                r["ci"]["gap"][0].get<double>(), r["ci"]["gap"][1].get<double>(),
                static_cast<unsigned long long>(r["trials"].get<std::uint64_t>()));
  return {r.at("significant").get<bool>(), buf};
}

Outcome levin() {
  const auto r = report("levin", {{"n", 16U}, {"c", 1.0}, {"trials", 100000U}}).at("result");
  char buf[200];
  std::snprintf(buf, sizeof buf, "%llu/%llu disagree, threshold %.3g, exact collision %s",
                static_cast<unsigned long long>(r["disagree"].get<std::uint64_t>()),
                static_cast<unsigned long long>(r["trials"].get<std::uint64_t>()), r["threshold"].get<double>(),
                r["collision_probability"].get<std::string>().c_str());
  return {r.at("pass").get<bool>() && r.at("collision_exact").get<bool>(), buf};
}

Outcome goldreich_levin() {
  const auto r = report("gl", {{"n", 16U}, {"accuracy", 0.85}, {"runs", 200U}}).at("result");
  const auto noisy = r["noisy"]["hits"].get<std::uint64_t>(), perfect = r["perfect"]["hits"].get<std::uint64_t>();
  const bool ok = noisy * 10 >= 200 * 9 && perfect == 200;
  return {ok, "85%: " + std::to_string(noisy) + "/200, perfect: " + std::to_string(perfect) + "/200, list size " +
                  std::to_string(r["list_size"].get<std::uint64_t>())};
}

Outcome s_count() {
  bool ok = true;
  std::string detail;
  for (unsigned n = 1; n <= 6; ++n) {
    const auto r = report("s_count", {{"n", n}, {"max_ell", 10U}, {"eve", "random"}}).at("result");
    ok = ok && r.at("bound_holds").get<bool>();
    char buf[64];
    std::snprintf(buf, sizeof buf, "n=%u K=%.3g; ", n, r["K"].get<double>());
    detail += buf;
  }
  return {ok, detail + "bound K <= 3(2n)^2"};
}

Outcome thread_invariance(std::size_t c_vm) {
  const std::vector<std::pair<std::string, json>> runs = {
      {"break", {{"n", 40U}, {"trials", 2000U}, {"c_vm", c_vm}}},
      {"levin", {{"n", 12U}, {"trials", 4000U}}},
      {"gl", {{"runs", 40U}}},
      {"s_count", {{"n", 5U}}},
      {"lemma5", {{"rho", 2U}}},
      {"cor3", {{"trials", 8U}}},
  };
  for (const auto& [ex, flags] : runs) {
    const std::string one = report(ex, flags, 1).dump();
    const std::string four = report(ex, flags, 4).dump();
    if (one != four) return {false, ex + " differs"};
  }
  return {true, std::to_string(runs.size()) + " reports byte-identical"};
}

}  // namespace

int main() {
  const json g = golden();
  const std::size_t c_vm = g.at("c_vm");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"pair encoding law", pair_law},
      {"hash universality", universality},
      {"support lower bound", [] { return observation("observation_e"); }},
      {"inverse pair distribution", [] { return observation("observation_f"); }},
      {"partition families exhaustive", lemma5},
      {"complexity vs brute force", [&] { return complexity_oracle(g); }},
      {"concatenation bound", [&] { return concatenation(g); }},
      {"toy DH leakage gap", [&] { return leakage(c_vm); }},
      {"levin search agreement", levin},
      {"goldreich-levin list", goldreich_levin},
      {"S counting bound", s_count},
      {"thread invariance", [&] { return thread_invariance(c_vm); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed ? 1 : 0;
}
