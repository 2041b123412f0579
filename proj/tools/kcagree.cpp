// kcagree command-line harness. Every experiment subcommand resolves its
// configuration (flags > --config file > KCAGREE_BUDGET_MS > defaults), runs it
// and writes one report.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <list>
#include <map>
#include <memory>
#include <string>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "kcagree/error.hpp"
#include "kcagree/protocols.hpp"
#include "kcagree/reports.hpp"
#include "kcagree/rng.hpp"

using nlohmann::json;
namespace reports = kcagree::reports;

namespace {

using Value = std::variant<std::string, std::uint64_t, double, std::vector<std::string>>;

struct Bound {
  std::string key;
  CLI::Option* opt;
  Value* value;
};

struct Experiment {
  std::string name;
  CLI::App* app;
  std::vector<Bound> options;
};

std::string flag_name(std::string key) {
  for (auto& ch : key)
    if (ch == '_') ch = '-';
  return "--" + key;
}

// One option per config key, typed after the default value.
Experiment add_experiment(CLI::App& parent, const std::string& cmd, const std::string& name, const std::string& help,
                          std::list<Value>& storage) {
  Experiment ex{name, parent.add_subcommand(cmd, help), {}};
  const json defaults = reports::defaults(name);
  for (const auto& [key, def] : defaults.items()) {
    const std::string desc = "config key " + key + " (default " + def.dump() + ")";
    CLI::Option* opt = nullptr;
    if (def.is_string()) {
      auto& v = std::get<std::string>(storage.emplace_back(std::string()));
      opt = ex.app->add_option(flag_name(key), v, desc);
    } else if (def.is_number_float()) {
      auto& v = std::get<double>(storage.emplace_back(0.0));
      opt = ex.app->add_option(flag_name(key), v, desc);
    } else if (def.is_number_unsigned()) {
      auto& v = std::get<std::uint64_t>(storage.emplace_back(std::uint64_t{0}));
      opt = ex.app->add_option(flag_name(key), v, desc);
    } else {
      auto& v = std::get<std::vector<std::string>>(storage.emplace_back(std::vector<std::string>()));
      opt = ex.app->add_option(flag_name(key), v, desc);
    }
    ex.options.push_back({key, opt, &storage.back()});
  }
  return ex;
}

json collect_flags(const Experiment& ex) {
  json flags = json::object();
  for (const auto& b : ex.options) {
    if (b.opt->count() == 0) continue;
    std::visit([&](const auto& v) { flags[b.key] = v; }, *b.value);
  }
  return flags;
}

json load_config(const std::string& path, const std::string& experiment) {
  json layer = json::object();
  if (const char* env = std::getenv("KCAGREE_BUDGET_MS"); env && reports::defaults(experiment).contains("budget_ms")) {
    try {
      layer["budget_ms"] = std::stoull(env);
    } catch (const std::exception&) {
      throw kcagree::ValidationError("KCAGREE_BUDGET_MS must be a non-negative integer");
    }
  }
  if (path.empty()) return layer;
  std::ifstream in(path);
  if (!in) throw kcagree::ValidationError("cannot read config file " + path);
  json file;
  try {
    file = json::parse(in);
  } catch (const json::parse_error& e) {
    throw kcagree::ValidationError(std::string("malformed config file: ") + e.what());
  }
  if (!file.is_object()) throw kcagree::ValidationError("config file must hold a JSON object");
  // A file may hold settings for several experiments under their names.
  if (file.contains(experiment) && file[experiment].is_object()) file = file[experiment];
  for (const auto& [k, v] : file.items()) layer[k] = v;
  return layer;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw kcagree::ValidationError("cannot write " + path);
  out << text;
}

std::string render(const json& doc, const std::string& format) {
  return format == "csv" ? reports::to_csv(doc) : doc.dump(2) + "\n";
}

// JSON lines, one per protocol run: {trial, seed, rand_a, rand_b, pi, x, y}.
std::string run_protocol(const std::string& protocol, std::size_t n, std::uint64_t count, std::uint64_t seed, double c) {
  kcagree::LevinParams lp;
  lp.c = c;
  const auto spec = kcagree::protocol_by_name(protocol, lp);
  if (n < spec.min_n) throw kcagree::ValidationError(spec.name + " needs n >= " + std::to_string(spec.min_n));
  std::string out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t s = kcagree::derive_seed(seed, i);
    const auto r = kcagree::execute(spec, n, s);
    out += json{{"trial", i},
                {"seed", s},
                {"rand_a", r.rand_a.to_string()},
                {"rand_b", r.rand_b.to_string()},
                {"pi", r.outcome.transcript.to_string()},
                {"x", r.outcome.out_a.to_string()},
                {"y", r.outcome.out_b.to_string()}}
               .dump() +
           "\n";
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kcagree: desk-scale experiments on key agreement and interactive Kolmogorov complexity"};
  app.set_version_flag("--version", KCAGREE_VERSION);
  std::string config_path, output_path, format = "json";
  unsigned threads = 1;
  app.add_option("--config", config_path, "JSON config file (flags override it)");
  app.add_option("--threads", threads, "worker threads; reports do not depend on it")->check(CLI::Range(1U, 256U));
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("-o,--output", output_path, "write the report here instead of stdout");
  app.require_subcommand(1);
  app.fallthrough();  // global options may follow the subcommand

  std::list<Value> storage;
  std::vector<Experiment> exps;
  exps.push_back(add_experiment(app, "ci", "ci", "exact interactive complexity CI^t(pi, x)", storage));
  exps.push_back(add_experiment(app, "c", "c", "exact plain complexity C(x | condition)", storage));
  CLI::App* hash = app.add_subcommand("hash", "hash family checks");
  hash->require_subcommand(1);
  exps.push_back(add_experiment(*hash, "verify", "hash_verify", "universality, support bound and inverse-pair distribution", storage));
  exps.push_back(add_experiment(app, "lemma5", "lemma5", "exhaustive partition sweep", storage));
  exps.push_back(add_experiment(app, "break", "break", "breaker leakage gap experiment", storage));
  exps.push_back(add_experiment(app, "levin", "levin", "Levin-search protocol agreement", storage));
  exps.push_back(add_experiment(app, "decide", "decide", "reference or Eve-driven decider on one pair", storage));
  exps.push_back(add_experiment(app, "gl", "gl", "Goldreich-Levin list decoding demo", storage));
  exps.push_back(add_experiment(app, "s-count", "s_count", "enumerate S_{n,l}", storage));
  exps.push_back(add_experiment(app, "cor3", "cor3", "inner-product key extension attack", storage));

  CLI::App* run = app.add_subcommand("run", "run a protocol and print one JSON line per trial");
  std::string protocol = "toydh";
  std::size_t run_n = 40;
  std::uint64_t run_count = 1, run_seed = 1;
  double run_c = 1.0;
  run->add_option("--protocol", protocol, "protocol name")->check(CLI::IsMember(kcagree::protocol_names()));
  run->add_option("--n", run_n, "input size");
  run->add_option("--count", run_count, "number of runs");
  run->add_option("--seed", run_seed, "base seed; run i uses derive_seed(seed, i)");
  run->add_option("--c", run_c, "Levin-search parameter c");

  if (argc <= 1) {
    std::cerr << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      write_output(run_protocol(protocol, run_n, run_count, run_seed, run_c), output_path);
      return 0;
    }
    for (const auto& ex : exps) {
      if (!ex.app->parsed()) continue;
      const json cfg = reports::resolve(ex.name, load_config(config_path, ex.name), collect_flags(ex));
      write_output(render(reports::run(ex.name, cfg, threads), format), output_path);
      return 0;
    }
    std::cerr << app.help();
    return 2;
  } catch (const kcagree::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const kcagree::BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
