#include "kcagree/reports.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <sstream>

#include "kcagree/error.hpp"
#include "kcagree/hashing.hpp"
#include "kcagree/parallel.hpp"
#include "kcagree/protocols.hpp"
#include "kcagree/reductions.hpp"
#include "kcagree/rng.hpp"
#include "kcagree/toyvm.hpp"

namespace kcagree::reports {

namespace {

using hashing::Rational;

// Measured on the golden instances; see tests/golden/complexity.json.
constexpr std::uint64_t kDefaultCvm = 9;

const std::map<std::string, json>& default_table() {
  static const std::map<std::string, json> table = {
      {"ci", {{"pi", ""}, {"x", ""}, {"t", "n2"}, {"max_len", 10U}, {"budget_ms", 0U}}},
      {"c", {{"x", ""}, {"condition", ""}, {"t", "n2"}, {"max_len", 15U}, {"budget_ms", 0U}}},
      {"hash_verify", {{"rho", 3U}, {"k", 2U}, {"seed", 1U}}},
      {"lemma5", {{"rho", 2U}}},
      {"break",
       {{"protocol", "toydh"},
        {"n", 40U},
        {"trials", 10000U},
        {"seed", 1U},
        {"epsilon", 0.1},
        {"parity", "even"},
        {"decider", "reference"},
        {"decider_cmd", json::array()},
        {"majority", 1U},
        {"c", 1.0},
        {"e", 2.0},
        {"t", "n2"},
        {"max_pair_len", 10U},
        {"max_prog_len", 15U},
        {"c_vm", kDefaultCvm},
        {"max_input", 0U}}},
      {"levin", {{"n", 16U}, {"c", 1.0}, {"t", "n2"}, {"trials", 100000U}, {"seed", 1U}}},
      {"decide",
       {{"pi", ""},
        {"x", ""},
        {"decider", "reference"},
        {"eve", "inverting"},
        {"c", 1.0},
        {"e", 2.0},
        {"t", "n2"},
        {"max_pair_len", 10U},
        {"max_prog_len", 15U},
        {"c_vm", kDefaultCvm},
        {"seed", 1U}}},
      {"gl", {{"n", 16U}, {"accuracy", 0.85}, {"runs", 200U}, {"seed", 1U}, {"guard", 2U}, {"max_m", 16U}}},
      {"s_count",
       {{"n", 6U},
        {"max_ell", 10U},
        {"eve", "random"},
        {"c", 1.0},
        {"t", "n2"},
        {"trials_per_pair", 9U},
        {"seed", 1U}}},
      {"cor3",
       {{"protocol", "xorkey"},
        {"n", 16U},
        {"d", 1.0},
        {"advantage", 0.0625},
        {"alpha", 0.25},
        {"trials", 50U},
        {"seed", 1U},
        {"max_m", 12U}}},
  };
  return table;
}

bool same_kind(const json& want, const json& got) {
  if (want.is_number_float()) return got.is_number();
  if (want.is_number_unsigned()) return got.is_number_unsigned() || (got.is_number_integer() && got.get<long long>() >= 0);
  return want.type() == got.type();
}

void merge_into(json& cfg, const json& src, const std::string& experiment, const char* origin) {
  if (src.is_null()) return;
  if (!src.is_object()) throw ValidationError(std::string(origin) + " must be a JSON object");
  for (const auto& [key, value] : src.items()) {
    if (!cfg.contains(key))
      throw ValidationError("unknown key '" + key + "' for experiment " + experiment + " (" + origin + ")");
    if (!same_kind(cfg[key], value))
      throw ValidationError("key '" + key + "' has the wrong type (" + origin + ")");
    cfg[key] = cfg[key].is_number_float() ? json(value.get<double>()) : value;
  }
}

BitString bits(const json& cfg, const char* key) { return BitString(cfg.at(key).get<std::string>()); }
std::uint64_t u64(const json& cfg, const char* key) { return cfg.at(key).get<std::uint64_t>(); }
std::size_t size(const json& cfg, const char* key) { return cfg.at(key).get<std::size_t>(); }
double real(const json& cfg, const char* key) { return cfg.at(key).get<double>(); }
std::string str(const json& cfg, const char* key) { return cfg.at(key).get<std::string>(); }

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

void validate(const std::string& ex, const json& cfg) {
  for (const char* key : {"pi", "x", "condition"})
    if (cfg.contains(key)) (void)bits(cfg, key);
  if (cfg.contains("t")) (void)vm::TimeBound::parse(str(cfg, "t"));
  for (const char* key : {"trials", "runs", "trials_per_pair"})
    if (cfg.contains(key)) require(u64(cfg, key) >= 1, std::string(key) + " must be >= 1");
  if (ex == "hash_verify") {
    require(size(cfg, "rho") >= 1, "rho must be >= 1");
    if (size(cfg, "rho") > 4 || size(cfg, "k") > 3) throw DomainTooLarge("hash verify needs rho <= 4 and k <= 3");
  } else if (ex == "lemma5") {
    require(size(cfg, "rho") >= 1, "rho must be >= 1");
    if (size(cfg, "rho") > 3) throw DomainTooLarge("lemma5 sweep supports rho <= 3");
  } else if (ex == "break") {
    const auto spec = protocol_by_name(str(cfg, "protocol"));
    require(size(cfg, "n") >= spec.min_n, spec.name + " needs n >= " + std::to_string(spec.min_n));
    require(real(cfg, "epsilon") > 0 && real(cfg, "epsilon") < 1, "epsilon must be in (0, 1)");
    require(str(cfg, "parity") == "even" || str(cfg, "parity") == "odd", "parity must be even or odd");
    require(size(cfg, "majority") % 2 == 1, "majority repetitions must be odd");
    const auto d = str(cfg, "decider");
    require(d == "reference" || d == "constant_N" || d == "constant_Y" || d == "subprocess",
            "decider must be reference, constant_N, constant_Y or subprocess");
    if (d == "subprocess") require(!cfg.at("decider_cmd").empty(), "subprocess decider needs decider_cmd");
    PromiseParams{real(cfg, "c"), real(cfg, "e")}.validate();
  } else if (ex == "levin") {
    require(size(cfg, "n") >= 2, "n must be >= 2");
    require(real(cfg, "c") >= 0, "c must be >= 0");
  } else if (ex == "decide") {
    const auto d = str(cfg, "decider");
    require(d == "reference" || d == "eve", "decider must be reference or eve");
    const auto e = str(cfg, "eve");
    require(e == "random" || e == "inverting" || e == "truth", "eve must be random, inverting or truth");
    PromiseParams{real(cfg, "c"), real(cfg, "e")}.validate();
  } else if (ex == "gl") {
    require(size(cfg, "n") >= 1 && size(cfg, "n") <= 32, "n must be in [1, 32]");
    require(real(cfg, "accuracy") > 0.5 && real(cfg, "accuracy") <= 1, "accuracy must be in (1/2, 1]");
    if (size(cfg, "max_m") > 20) throw DomainTooLarge("max_m above 20");
  } else if (ex == "s_count") {
    require(size(cfg, "n") >= 1, "n must be >= 1");
    if (size(cfg, "n") > 6 || size(cfg, "max_ell") > 12) throw DomainTooLarge("s_count needs n <= 6, max_ell <= 12");
    const auto e = str(cfg, "eve");
    require(e == "random" || e == "inverting", "eve must be random or inverting");
  } else if (ex == "cor3") {
    const auto spec = protocol_by_name(str(cfg, "protocol"));
    require(size(cfg, "n") >= spec.min_n, spec.name + " needs n >= " + std::to_string(spec.min_n));
    require(real(cfg, "advantage") >= 0 && real(cfg, "advantage") <= 1, "advantage must be in [0, 1]");
    require(real(cfg, "alpha") > 0, "alpha must be > 0");
  }
}

json interval(const BinomialInterval& ci) { return json::array({ci.low, ci.high}); }

vm::SearchOptions search_options(const json& cfg, unsigned threads) {
  vm::SearchOptions o;
  o.budget = std::chrono::milliseconds(u64(cfg, "budget_ms"));
  o.threads = threads;
  return o;
}

json run_ci(const json& cfg, unsigned threads) {
  const BitString pi = bits(cfg, "pi"), x = bits(cfg, "x");
  const auto t = vm::TimeBound::parse(str(cfg, "t"));
  const auto lim = t.limits(pi.size() + x.size());
  const auto v = vm::interactive_complexity(pi, x, lim, size(cfg, "max_len"), search_options(cfg, threads));
  return {{"value", complexity_json(v.bits)}, {"t_steps", lim.max_steps}};
}

json run_c(const json& cfg, unsigned threads) {
  const BitString x = bits(cfg, "x"), cond = bits(cfg, "condition");
  const auto t = vm::TimeBound::parse(str(cfg, "t"));
  const auto lim = t.limits(x.size());
  const auto v = vm::plain_complexity(x, cond, lim, size(cfg, "max_len"), search_options(cfg, threads));
  return {{"value", complexity_json(v.bits)}, {"t_steps", lim.max_steps}};
}

json run_hash_verify(const json& cfg) {
  const std::size_t rho = size(cfg, "rho"), k = size(cfg, "k");
  const auto u = hashing::verify_universality(rho, k);
  json result;
  result["universality"] = {{"pairs_checked", u.pairs_checked},
                            {"target", hashing::to_string(Rational(1, 1LL << k))},
                            {"min_fraction", hashing::to_string(u.min_fraction)},
                            {"max_fraction", hashing::to_string(u.max_fraction)},
                            {"exact", u.exact}};

  // Every A with |A| >= |W|; for rho = 4 a seeded sample of 32 such sets.
  const std::uint32_t subsets = std::uint32_t{1} << (1U << rho);
  std::vector<std::uint32_t> family;
  for (std::uint32_t m = 1; m < subsets; ++m)
    if ((std::uint64_t{1} << k) <= static_cast<std::uint64_t>(std::popcount(m))) family.push_back(m);
  bool sampled = false;
  if (rho == 4) {
    Rng rng(u64(cfg, "seed"));
    std::vector<std::uint32_t> pick;
    for (int i = 0; i < 32; ++i) pick.push_back(family[rng.below(family.size())]);
    family = std::move(pick);
    sampled = true;
  }
  bool e_ok = true, f_ok = true, uniform_ok = true;
  Rational min_support_ratio = 2, min_defined = 2;
  for (auto m : family) {
    std::vector<BitString> A;
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << rho); ++v)
      if ((m >> v) & 1U) A.push_back(BitString::from_uint(v, rho));
    const auto s = hashing::support_lower_bound_check(rho, k, A);
    e_ok = e_ok && s.bound_holds;
    min_support_ratio = std::min(min_support_ratio, Rational(static_cast<long long>(s.support),
                                                             static_cast<long long>(s.family_size * s.range_size)));
    const auto inv = hashing::inverse_pair_distribution(rho, k, A);
    f_ok = f_ok && inv.half_bound_holds;
    uniform_ok = uniform_ok && inv.conditionally_uniform;
    min_defined = std::min(min_defined, inv.defined_mass);
  }
  result["observation_e"] = {{"sets", family.size()},
                             {"sampled", sampled},
                             {"min_support_ratio", hashing::to_string(min_support_ratio)},
                             {"holds", e_ok}};
  result["observation_f"] = {{"sets", family.size()},
                             {"sampled", sampled},
                             {"min_defined_mass", hashing::to_string(min_defined)},
                             {"conditionally_uniform", uniform_ok},
                             {"holds", f_ok && uniform_ok}};
  result["pass"] = u.exact && e_ok && f_ok && uniform_ok;
  return result;
}

json run_lemma5(const json& cfg, unsigned threads) {
  const auto s = hashing::lemma5_sweep(size(cfg, "rho"), threads);
  return {{"family", s.family},
          {"families", s.families},
          {"failures", s.failures},
          {"min_defined_mass", hashing::to_string(s.min_defined_mass)},
          {"max_distance", hashing::to_string(s.max_distance)},
          {"min_incompressible_mass", hashing::to_string(s.min_incompressible_mass)},
          {"bounds", {{"defined_mass", "1/4"}, {"distance", "15/16"}, {"incompressible_mass", "1/32"}}},
          {"pass", s.pass()}};
}

PromiseParams promise(const json& cfg) {
  PromiseParams p;
  p.c = real(cfg, "c");
  p.e = real(cfg, "e");
  p.t = vm::TimeBound::parse(str(cfg, "t"));
  p.max_pair_len = size(cfg, "max_pair_len");
  p.max_prog_len = size(cfg, "max_prog_len");
  p.c_vm = size(cfg, "c_vm");
  return p;
}

json run_break(const json& cfg, unsigned threads) {
  const auto spec = protocol_by_name(str(cfg, "protocol"));
  const std::size_t n = size(cfg, "n");
  const BreakerConfig bc{real(cfg, "epsilon"), str(cfg, "parity") == "odd"};
  const auto params = promise(cfg);
  const std::string kind = str(cfg, "decider");
  std::size_t max_input = size(cfg, "max_input");
  if (max_input == 0) max_input = 2 * n + 1;
  DeciderHandle dec;
  if (kind == "reference") {
    vm::SearchOptions o;
    o.threads = threads;
    dec = reference_decider(params, max_input, o);
  } else if (kind == "constant_N") {
    dec = constant_decider(Verdict::OutsideN);
  } else if (kind == "constant_Y") {
    dec = constant_decider(Verdict::OutsideY);
  } else {
    dec = subprocess_decider(cfg.at("decider_cmd").get<std::vector<std::string>>());
  }
  if (size(cfg, "majority") > 1) dec = majority_decider(dec, size(cfg, "majority"));
  const auto r = leakage_experiment(spec, *dec, bc, n, u64(cfg, "trials"), u64(cfg, "seed"), threads);
  json result = {{"rho", breaker_rho(n, bc.epsilon)},
                 {"trials", r.trials},
                 {"hits", {{"real", r.real_hits}, {"uniform", r.uniform_hits}}},
                 {"estimates", {{"p_real", r.p_real}, {"p_uniform", r.p_uniform}, {"gap", r.gap}}},
                 {"ci", {{"real", interval(r.ci_real)}, {"uniform", interval(r.ci_uniform)}, {"gap", {r.gap_low, r.gap_high}}}},
                 {"significant", r.significant()}};
  result["warnings"] = params.warnings();
  return result;
}

json run_levin(const json& cfg, unsigned threads) {
  const std::size_t n = size(cfg, "n");
  const LevinParams lp{real(cfg, "c"), vm::TimeBound::parse(str(cfg, "t"))};
  const auto spec = levin_search_protocol(lp);
  const auto rep = estimate_agreement(spec, n, u64(cfg, "trials"), u64(cfg, "seed"), threads);
  const std::size_t k = levin_hash_rows(lp.c, n), m = n + 1;
  // Two distinct inputs differ in a non-zero column vector d.
  const BitString d = [&] {
    BitString a = hash_input(BitString(), m), b = hash_input(BitString("1"), m), out;
    for (std::size_t i = 0; i < m; ++i) out.push_back(a[i] != b[i]);
    return out;
  }();
  const Rational collision = hashing::zero_image_probability(d, k);
  Rational target = 1;
  for (std::size_t i = 0; i < k; ++i) target /= 2;
  const double p = std::ldexp(1.0, -static_cast<int>(k));
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(rep.trials));
  const std::uint64_t disagree = rep.trials - rep.agree_count;
  const double rate = static_cast<double>(disagree) / static_cast<double>(rep.trials);
  const auto sample = execute(spec, n, u64(cfg, "seed"));
  return {{"hash_rows", k},
          {"hash_columns", m},
          {"transcript_bits", sample.outcome.transcript.size()},
          {"trials", rep.trials},
          {"agree", rep.agree_count},
          {"disagree", disagree},
          {"agreement", rep.estimate},
          {"ci", {rep.ci_low, rep.ci_high}},
          {"collision_probability", hashing::to_string(collision)},
          {"collision_exact", collision == target},
          {"threshold", p + 3 * sigma},
          {"disagreement_rate", rate},
          {"pass", rate <= p + 3 * sigma}};
}

json run_decide(const json& cfg, unsigned threads) {
  const BitString pi = bits(cfg, "pi"), x = bits(cfg, "x");
  const std::uint64_t seed = u64(cfg, "seed");
  if (str(cfg, "decider") == "eve") {
    const std::string name = str(cfg, "eve");
    const EveHandle eve = name == "random" ? random_eve() : name == "truth" ? constant_eve(x) : inverting_eve(real(cfg, "c"));
    const auto v = eve_decider(*eve, pi, x, real(cfg, "c"), seed);
    return {{"verdict", to_string(v)},
            {"eve", eve->name()},
            {"transcript_bits", eve_transcript(pi, x, real(cfg, "c"), seed).size()}};
  }
  vm::SearchOptions o;
  o.threads = threads;
  const auto dec = reference_decider(promise(cfg), pi.size() + x.size(), o);
  const auto ev = dec->evaluate(pi, x);
  return {{"verdict", to_string(ev.verdict)},
          {"ci", complexity_json(ev.ci.bits)},
          {"c_pi", complexity_json(ev.c_pi.bits)},
          {"c_pair", complexity_json(ev.c_pair.bits)},
          {"log_term", ev.log_term},
          {"in_Y", ev.in_Y},
          {"in_N", ev.in_N}};
}

json run_gl(const json& cfg, unsigned threads) {
  const std::size_t n = size(cfg, "n"), guard = size(cfg, "guard"), max_m = size(cfg, "max_m");
  const double acc = real(cfg, "accuracy");
  const double adv = acc - 0.5;
  const std::uint64_t runs = u64(cfg, "runs"), seed = u64(cfg, "seed");
  const std::size_t m = gl_seed_count(n, adv, guard, max_m);
  struct Outcome {
    std::uint8_t noisy = 0, perfect = 0, perfect_best = 0;
  };
  const auto res = parallel_trials(runs, threads, [&](std::uint64_t i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(derive_seed(s, "x"));
    const BitString x = rng.bits(n);
    Rng noise(derive_seed(s, "noise"));
    const auto noisy = gl_list_decode([&](const BitString& r) { return inner_product(x, r) != noise.bernoulli(1 - acc); },
                                      n, adv, derive_seed(s, "decode"), guard, max_m);
    const auto exact = gl_list_decode([&](const BitString& r) { return inner_product(x, r); }, n, adv,
                                      derive_seed(s, "decode"), guard, max_m);
    Outcome o;
    o.noisy = std::find(noisy.begin(), noisy.end(), x) != noisy.end();
    o.perfect = std::find(exact.begin(), exact.end(), x) != exact.end();
    // Best candidate: most agreement with the oracle on 64 fresh points.
    Rng pts(derive_seed(s, "score"));
    std::vector<BitString> probe;
    for (int j = 0; j < 64; ++j) probe.push_back(pts.bits(n));
    std::size_t best_score = 0;
    const BitString* best = nullptr;
    for (const auto& cand : exact) {
      std::size_t score = 0;
      for (const auto& r : probe) score += inner_product(cand, r) == inner_product(x, r);
      if (!best || score > best_score || (score == best_score && cand < *best)) best = &cand, best_score = score;
    }
    o.perfect_best = best && *best == x;
    return o;
  });
  std::uint64_t noisy = 0, perfect = 0, best = 0;
  for (const auto& o : res) noisy += o.noisy, perfect += o.perfect, best += o.perfect_best;
  const double list_size = std::ldexp(1.0, static_cast<int>(m));
  return {{"m", m},
          {"list_size", static_cast<std::uint64_t>(list_size)},
          {"baseline", std::min(1.0, list_size / std::ldexp(1.0, static_cast<int>(n)))},
          {"noisy", {{"runs", runs}, {"hits", noisy}, {"rate", double(noisy) / double(runs)}}},
          {"perfect", {{"runs", runs}, {"hits", perfect}, {"rate", double(perfect) / double(runs)}, {"best_is_x", best}}}};
}

json run_s_count(const json& cfg, unsigned threads) {
  const double c = real(cfg, "c");
  const EveHandle eve = str(cfg, "eve") == "random" ? random_eve() : inverting_eve(c);
  const auto r = count_S(size(cfg, "n"), size(cfg, "max_ell"), *eve, c, vm::TimeBound::parse(str(cfg, "t")),
                         u64(cfg, "trials_per_pair"), u64(cfg, "seed"), threads);
  json levels = json::array();
  for (const auto& lv : r.levels) {
    json members = json::array();
    for (const auto& [pi, x] : lv.members) members.push_back({pi.to_string(), x.to_string()});
    levels.push_back({{"ell", lv.ell}, {"pairs", lv.pairs_at_ell}, {"size", lv.size}, {"ratio", lv.ratio}, {"members", members}});
  }
  return {{"K", r.K}, {"bound", r.bound}, {"bound_holds", r.bound_holds}, {"levels", levels}};
}

json run_cor3(const json& cfg, unsigned threads) {
  const auto spec = protocol_by_name(str(cfg, "protocol"));
  const auto r = cor3_pipeline(spec, planted_distinguisher(real(cfg, "advantage")), size(cfg, "n"), real(cfg, "d"),
                               real(cfg, "alpha"), u64(cfg, "trials"), u64(cfg, "seed"), threads, size(cfg, "max_m"));
  return {{"ell", r.ell},
          {"key_bits", r.key_bits},
          {"padded", r.padded},
          {"trials", r.trials},
          {"successes", r.successes},
          {"success_rate", r.success_rate},
          {"baseline", r.baseline},
          {"ci", interval(r.ci)},
          {"above_baseline", r.ci.low > r.baseline}};
}

void csv_walk(const json& j, const std::string& path, std::ostringstream& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) csv_walk(v, path.empty() ? k : path + "." + k, out);
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) csv_walk(j[i], path + "." + std::to_string(i), out);
  } else {
    const std::string v = j.is_string() ? j.get<std::string>() : j.dump();
    out << path << "," << v << "\n";
  }
}

}  // namespace

std::vector<std::string> experiments() {
  std::vector<std::string> out;
  for (const auto& [name, cfg] : default_table()) out.push_back(name);
  return out;
}

json defaults(const std::string& experiment) {
  const auto& t = default_table();
  const auto it = t.find(experiment);
  if (it == t.end()) throw ValidationError("unknown experiment '" + experiment + "'");
  return it->second;
}

json resolve(const std::string& experiment, const json& file, const json& flags) {
  json cfg = defaults(experiment);
  merge_into(cfg, file, experiment, "config file");
  merge_into(cfg, flags, experiment, "flags");
  validate(experiment, cfg);
  return cfg;
}

json run(const std::string& experiment, const json& config, unsigned threads) {
  validate(experiment, config);
  json result;
  if (experiment == "ci") result = run_ci(config, threads);
  else if (experiment == "c") result = run_c(config, threads);
  else if (experiment == "hash_verify") result = run_hash_verify(config);
  else if (experiment == "lemma5") result = run_lemma5(config, threads);
  else if (experiment == "break") result = run_break(config, threads);
  else if (experiment == "levin") result = run_levin(config, threads);
  else if (experiment == "decide") result = run_decide(config, threads);
  else if (experiment == "gl") result = run_gl(config, threads);
  else if (experiment == "s_count") result = run_s_count(config, threads);
  else if (experiment == "cor3") result = run_cor3(config, threads);
  else throw ValidationError("unknown experiment '" + experiment + "'");
  return {{"schema", kSchema},
          {"version", KCAGREE_VERSION},
          {"experiment", experiment},
          {"config", config},
          {"result", result}};
}

json complexity_json(const std::optional<std::size_t>& bits) { return bits ? json(*bits) : json("inf"); }

std::string to_csv(const json& doc) {
  std::ostringstream out;
  out << "key,value\n";
  csv_walk(doc, "", out);
  return out.str();
}

}  // namespace kcagree::reports
