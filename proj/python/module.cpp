#include "nodice/bench.hpp"
#include "nodice/frontend.hpp"
#include "nodice/oracle.hpp"
#include "nodice/pipeline.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace nodice;

namespace {

py::object fraction(const Rational& r) {
  return py::module_::import("fractions").attr("Fraction")(rational_to_string(r));
}

Value value_of(const CoreProgram& p, const std::string& text) {
  const auto v = parse_value_literal(text, p.surface_output_type());
  if (!v) throw py::value_error("'" + text + "' is not a literal of type " + p.surface_output_type().to_string());
  return *v;
}

InferOptions options(const std::string& method, double tol, bool compress, std::size_t max_fanout) {
  InferOptions o;
  const auto m = parse_method(method);
  if (!m) throw py::value_error("unknown method '" + method + "'");
  o.method = *m;
  o.tol = tol;
  o.compress = compress;
  o.max_fanout = max_fanout;
  return o;
}

}  // namespace

PYBIND11_MODULE(nodice, m) {
  m.doc() = "Maximum conditional probabilities of loop-free probabilistic programs with nondeterminism";

  py::register_exception<Error>(m, "NodiceError");

  py::class_<CoreProgram>(m, "Program")
      .def_property_readonly("type", [](const CoreProgram& p) { return p.surface_output_type().to_string(); })
      .def_property_readonly("flips", [](const CoreProgram& p) { return count_flips(p); })
      .def("core", [](const CoreProgram& p) { return print_core(p); })
      .def("values", [](const CoreProgram& p) {
        std::vector<std::string> out;
        for (const auto& v : enumerate_output_values(p.type())) out.push_back(render_value(v, p.surface_output_type()));
        return out;
      });

  m.def("load", [](const std::string& source) { return load_program(source); }, py::arg("source"),
        "Parse, type check and normalize a program.");
  m.def("load_file", &load_program_file, py::arg("path"));

  m.def(
      "infer",
      [](const CoreProgram& p, std::optional<std::string> value, const std::string& method, double tol,
         bool compress, std::size_t max_fanout) {
        std::optional<Value> q;
        if (value) q = value_of(p, *value);
        QueryResult r;
        {
          py::gil_scoped_release release;
          r = infer(p, q, options(method, tol, compress, max_fanout));
        }
        py::list out;
        for (const auto& v : r.values) {
          py::dict d;
          d["value"] = render_value(v.value, p.surface_output_type());
          d["probability"] = v.probability;
          d["method"] = method_name(v.method);
          d["iterations"] = v.iterations;
          d["add_nodes"] = v.add_nodes;
          d["mdp_states_pre"] = v.mdp_states_pre;
          d["mdp_states_post"] = v.mdp_states_post;
          out.append(d);
        }
        return out;
      },
      py::arg("program"), py::arg("value") = py::none(), py::arg("method") = "bisection", py::arg("tol") = 1e-6,
      py::arg("compress") = true, py::arg("max_fanout") = 40,
      "Maximum conditional probability per output value.");

  m.def(
      "oracle",
      [](const CoreProgram& p, const std::string& value) {
        return fraction(oracle_max_conditional(build_exec_tree(p), value_of(p, value)));
      },
      py::arg("program"), py::arg("value"), "Exact maximum from the execution-tree oracle.");

  m.def(
      "export_mdp",
      [](const CoreProgram& p, bool compress) {
        InferOptions o;
        o.compress = compress;
        return export_explicit(build_mdp(p, o).checked);
      },
      py::arg("program"), py::arg("compress") = true, "Lifted MDP of the program in explicit text format.");

  m.def(
      "check_mdp",
      [](const std::string& text, const std::string& value, const std::string& method, double tol) {
        std::istringstream in(text);
        const Mdp mdp = load_explicit_mdp(in);
        const auto v = Value::parse(value);
        if (!v) throw py::value_error("cannot parse label value '" + value + "'");
        return check_mdp(mdp, Target::of_value(*v), options(method, tol, true, 40)).probability;
      },
      py::arg("text"), py::arg("value"), py::arg("method") = "bisection", py::arg("tol") = 1e-6);

  m.def(
      "generate",
      [](const std::string& family, int size, std::optional<int> extra, std::uint64_t seed) {
        const auto f = parse_family(family);
        if (!f) throw py::value_error("unknown benchmark family '" + family + "'");
        BenchmarkSpec s;
        s.family = *f;
        s.size = size;
        s.extra = extra;
        s.seed = seed;
        return generate(s);
      },
      py::arg("family"), py::arg("size"), py::arg("extra") = py::none(), py::arg("seed") = 1,
      "Source text of a benchmark program.");
}
