#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kcagree/bitstring.hpp"
#include "kcagree/error.hpp"
#include "kcagree/hashing.hpp"
#include "kcagree/protocols.hpp"
#include "kcagree/reductions.hpp"
#include "kcagree/reports.hpp"
#include "kcagree/toyvm.hpp"

namespace py = pybind11;
using namespace kcagree;

namespace {

std::optional<std::size_t> value_of(const vm::ComplexityValue& v) { return v.bits; }

py::dict outcome_dict(const vm::InteractionOutcome& o) {
  py::dict d;
  d["transcript"] = o.transcript.to_string();
  d["out_a"] = o.out_a.to_string();
  d["out_b"] = o.out_b.to_string();
  d["steps_a"] = o.steps_a;
  d["steps_b"] = o.steps_b;
  d["halted_a"] = o.halted_a;
  d["halted_b"] = o.halted_b;
  return d;
}

vm::VmLimits limits_for(const std::string& t, std::size_t n) { return vm::TimeBound::parse(t).limits(n); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Bindings for the kcagree C++ core";
  m.attr("__version__") = KCAGREE_VERSION;

  // Translators registered later are tried first, so subclasses follow the base.
  const auto& error = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", error.ptr());
  py::register_exception<BudgetError>(m, "BudgetError", error.ptr());
  py::register_exception<RuntimeBoundExceeded>(m, "RuntimeBoundExceeded", error.ptr());

  // bitcore
  m.def("encode_pair", [](const std::string& pi, const std::string& x) {
    return encode_pair(BitString(pi), BitString(x)).encoded.to_string();
  }, py::arg("pi"), py::arg("x"));
  m.def("decode_pair", [](const std::string& code) {
    const auto [pi, x] = decode_pair(BitString(code));
    return std::pair{pi.to_string(), x.to_string()};
  }, py::arg("code"));
  m.def("pad_pair", [](const std::string& pi, const std::string& z, std::size_t ell) {
    const auto p = pad_pair(BitString(pi), BitString(z), ell);
    return py::make_tuple(p.pi.to_string(), p.x.to_string(), p.encoded.to_string());
  }, py::arg("pi"), py::arg("z"), py::arg("ell"));

  // toyvm
  m.def("run_single", [](const std::string& program, const std::string& condition, std::uint64_t max_steps,
                         std::size_t max_output) -> std::optional<std::string> {
    const auto out = vm::run_single(BitString(program), BitString(condition), {max_steps, max_output, max_output});
    if (!out) return std::nullopt;
    return out->to_string();
  }, py::arg("program"), py::arg("condition") = "", py::arg("max_steps") = 64, py::arg("max_output") = 256);
  m.def("run_interactive", [](const std::string& a, const std::string& b, std::uint64_t max_steps,
                              std::size_t max_output, std::size_t max_transcript) {
    return outcome_dict(vm::run_interactive(BitString(a), BitString(b), {max_steps, max_output, max_transcript}));
  }, py::arg("a"), py::arg("b"), py::arg("max_steps") = 64, py::arg("max_output") = 256,
        py::arg("max_transcript") = 256);
  m.def("plain_complexity", [](const std::string& x, const std::string& condition, const std::string& t,
                               std::size_t max_len) {
    py::gil_scoped_release release;
    return value_of(vm::plain_complexity(BitString(x), BitString(condition), limits_for(t, x.size()), max_len));
  }, py::arg("x"), py::arg("condition") = "", py::arg("t") = "n2", py::arg("max_len") = 15,
        "Exact C^t(x | condition); None when no program fits in max_len bits.");
  m.def("interactive_complexity", [](const std::string& pi, const std::string& x, const std::string& t,
                                     std::size_t max_len) {
    py::gil_scoped_release release;
    return value_of(vm::interactive_complexity(BitString(pi), BitString(x), limits_for(t, pi.size() + x.size()), max_len));
  }, py::arg("pi"), py::arg("x"), py::arg("t") = "n2", py::arg("max_len") = 10,
        "Exact CI^t(pi, x); None when no program pair fits in max_len bits.");

  // hashing
  m.def("hash_apply", [](std::size_t rows, std::size_t cols, const std::string& matrix, const std::string& a) {
    return hashing::MatrixHash::from_bits(rows, cols, BitString(matrix)).apply(BitString(a)).to_string();
  }, py::arg("rows"), py::arg("cols"), py::arg("matrix"), py::arg("a"), "M a over GF(2); matrix bits row-major.");
  m.def("pseudo_inverse", [](std::size_t rows, std::size_t cols, const std::string& matrix,
                             const std::vector<std::string>& A, const std::string& w) -> std::optional<std::string> {
    std::vector<BitString> set;
    for (const auto& s : A) set.emplace_back(s);
    const auto r = hashing::pseudo_inverse(hashing::MatrixHash::from_bits(rows, cols, BitString(matrix)), set, BitString(w));
    if (!r) return std::nullopt;
    return r->to_string();
  }, py::arg("rows"), py::arg("cols"), py::arg("matrix"), py::arg("A"), py::arg("w"));
  m.def("collision_fraction", [](std::size_t rho, std::size_t k, const std::string& a, const std::string& b) {
    const auto s = hashing::collision_stats(rho, k, BitString(a), BitString(b));
    return std::pair{s.collisions, s.matrices};
  }, py::arg("rho"), py::arg("k"), py::arg("a"), py::arg("b"), "(collisions, matrices) over H_{rho,k}.");

  // protocols
  m.def("protocol_names", &protocol_names);
  m.def("execute", [](const std::string& protocol, std::size_t n, std::uint64_t seed) {
    const auto run = execute(protocol_by_name(protocol), n, seed);
    py::dict d = outcome_dict(run.outcome);
    d["rand_a"] = run.rand_a.to_string();
    d["rand_b"] = run.rand_b.to_string();
    return d;
  }, py::arg("protocol"), py::arg("n"), py::arg("seed"));
  m.def("check_dh_like", [](const std::string& protocol, std::size_t n) {
    const auto r = check_dh_like(protocol_by_name(protocol), n);
    py::dict d;
    d["bijective"] = r.bijective;
    d["domain_size"] = r.domain_size;
    d["image_size"] = r.image_size;
    d["transcript_entropy_bits"] = r.transcript_entropy_bits;
    return d;
  }, py::arg("protocol"), py::arg("n"));

  // reductions
  m.def("reference_verdict", [](const std::string& pi, const std::string& x, std::size_t c_vm) {
    PromiseParams p;
    p.c_vm = c_vm;
    py::gil_scoped_release release;
    return to_string(ReferenceDecider(p, pi.size() + x.size()).evaluate(BitString(pi), BitString(x)).verdict);
  }, py::arg("pi"), py::arg("x"), py::arg("c_vm") = 9);

  // experiment reports, exchanged as JSON text
  m.def("experiments", &reports::experiments);
  m.def("_defaults", [](const std::string& name) { return reports::defaults(name).dump(); });
  m.def("_run_experiment", [](const std::string& name, const std::string& config, unsigned threads) {
    const auto flags = nlohmann::json::parse(config);
    py::gil_scoped_release release;
    return reports::run(name, reports::resolve(name, nlohmann::json::object(), flags), threads).dump();
  }, py::arg("name"), py::arg("config"), py::arg("threads") = 1);
}
