// Writes tests/golden/complexity.json. CI and C values come from the
// brute-force oracle; C of pair codes (up to 30 bits) from the pruned search,
// which the test suite checks against the oracle where both are feasible.
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "kcagree/toyvm.hpp"
#include "oracle.hpp"

using nlohmann::json;
using namespace kcagree;

namespace {

constexpr std::size_t kMaxLen = 10;
constexpr std::uint64_t kPairSteps = 1024;
constexpr std::size_t kPairSearch = 30;

oracle::Limits limits_for(std::size_t n) {
  const auto l = vm::TimeBound::quadratic().limits(n);
  return {l.max_steps, l.max_output, l.max_transcript};
}

json value(int v) { return v < 0 ? json("inf") : json(v); }

}  // namespace

int main(int argc, char** argv) {
  const std::string path = argc > 1 ? argv[1] : "complexity.json";
  json ci = json::array(), plain = json::array(), concat = json::array();
  std::size_t c_vm = 0;
  vm::SearchOptions opts;
  opts.max_plain_len_guard = kPairSearch;

  for (std::size_t pl = 0; pl <= 3; ++pl)
    for (std::uint64_t pv = 0; pv < (1U << pl); ++pv)
      for (std::size_t xl = 0; xl <= 3; ++xl)
        for (std::uint64_t xv = 0; xv < (1U << xl); ++xv) {
          const std::string pi = oracle::bits_of(pv, pl), x = oracle::bits_of(xv, xl);
          const auto lim = limits_for(pl + xl);
          const int v = oracle::interactive(pi, x, lim, kMaxLen);
          ci.push_back({{"pi", pi}, {"x", x}, {"t_steps", lim.steps}, {"max_len", kMaxLen}, {"value", value(v)}});
          const auto plim = limits_for(xl);
          plain.push_back({{"x", x}, {"condition", pi}, {"t_steps", plim.steps}, {"max_len", kMaxLen},
                           {"value", value(oracle::plain(x, pi, plim, kMaxLen))}});
          if (v < 0) continue;
          const BitString code = encode_pair(BitString(pi), BitString(x)).encoded;
          const vm::VmLimits big{kPairSteps, code.size(), code.size()};
          const auto c = vm::plain_complexity(code, {}, big, kPairSearch, opts);
          if (!c.finite()) {
            std::cerr << "pair code " << code.to_string() << " has no program within " << kPairSearch << " bits\n";
            return 1;
          }
          const std::size_t split = vm::split_cost(static_cast<std::size_t>(v));
          const std::size_t need = c.value() > v + split ? c.value() - v - split : 0;
          c_vm = std::max(c_vm, need);
          concat.push_back({{"pi", pi}, {"x", x}, {"ci", v}, {"c_pair", c.value()}, {"split_cost", split}});
        }
  for (std::size_t xl = 4; xl <= 6; ++xl)
    for (std::uint64_t xv = 0; xv < (1U << xl); ++xv) {
      const std::string x = oracle::bits_of(xv, xl);
      const auto plim = limits_for(xl);
      plain.push_back({{"x", x}, {"condition", ""}, {"t_steps", plim.steps}, {"max_len", kMaxLen},
                       {"value", value(oracle::plain(x, "", plim, kMaxLen))}});
    }

  const json doc = {{"schema", 1},
                    {"time_bound", "n2"},
                    {"pair_code_steps", kPairSteps},
                    {"pair_code_search", kPairSearch},
                    {"c_vm", c_vm},
                    {"interactive", ci},
                    {"plain", plain},
                    {"concatenation", concat}};
  std::ofstream(path) << doc.dump(1) << "\n";
  std::cout << "c_vm = " << c_vm << ", " << ci.size() << " interactive entries\n";
}
