#include "nodice/cli.hpp"

#include "nodice/bench.hpp"
#include "nodice/frontend.hpp"
#include "nodice/oracle.hpp"
#include "nodice/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace nodice {

namespace {

struct UsageError : Error {
  using Error::Error;
};

std::string fixed6(double p) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << p;
  return os.str();
}

nlohmann::json times_json(const PhaseTimes& t) {
  return {{"compile", t.compile}, {"guard", t.guard}, {"lift", t.lift},
          {"compress", t.compress}, {"check", t.check}, {"total", t.total()}};
}

nlohmann::json witness_json(const SchedulerWitness& w) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [s, a] : w.choice) j[std::to_string(s)] = std::string(1, action_char(a));
  return j;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path + "'");
  f << text;
}

struct InferArgs {
  std::string file;
  std::string value;
  bool all = false;
  std::string method = "bisection";
  double tol = 1e-6;
  bool no_compress = false;
  std::size_t max_fanout = 40;
  std::string export_mdp;
  bool oracle = false;
  bool stats = false;
  bool json = false;
  bool parallel = false;
  bool no_reduce = false;
};

int run_infer(const InferArgs& a, std::ostream& out) {
  if (!(a.tol > 0) || a.tol >= 1) throw UsageError("--tol must lie in (0, 1)");
  if (a.max_fanout < 2) throw UsageError("--max-fanout must be at least 2");
  const auto method = parse_method(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "' (expected bisection, restart or both)");
  if (!a.value.empty() && a.all) throw UsageError("--value and --all are mutually exclusive");

  std::ifstream probe(a.file);
  if (!probe) throw UsageError("cannot read '" + a.file + "'");
  const CoreProgram p = load_program_file(a.file);
  const SType out_ty = p.surface_output_type();

  std::optional<Value> query;
  if (!a.value.empty()) {
    query = parse_value_literal(a.value, out_ty);
    if (!query) throw UsageError("value '" + a.value + "' is not a literal of the program's type " + out_ty.to_string());
  }

  InferOptions o;
  o.method = *method;
  o.tol = a.tol;
  o.compress = !a.no_compress;
  o.max_fanout = a.max_fanout;
  o.parallel = a.parallel;
  o.boolean_reduction = !a.no_reduce;
  o.keep_mdp = !a.export_mdp.empty();
  const QueryResult q = infer(p, query, o);

  if (!a.export_mdp.empty()) {
    const bool shared = p.type().is_bool() || a.no_reduce || q.values.size() == 1;
    if (shared) {
      write_file(a.export_mdp, export_explicit(*q.values.front().mdp));
    } else {
      for (std::size_t i = 0; i < q.values.size(); ++i)
        write_file(a.export_mdp + "." + std::to_string(i), export_explicit(*q.values[i].mdp));
    }
  }

  std::vector<std::optional<Rational>> oracle(q.values.size());
  if (a.oracle) {
    const ExecTree tree = build_exec_tree(p);
    for (std::size_t i = 0; i < q.values.size(); ++i) oracle[i] = oracle_max_conditional(tree, q.values[i].value);
  }

  if (a.json) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      const ValueResult& v = q.values[i];
      nlohmann::json j{{"value", render_value(v.value, out_ty)},
                       {"probability", v.probability},
                       {"method", method_name(v.method)},
                       {"iterations", v.iterations},
                       {"add_nodes", v.add_nodes},
                       {"mdp_states_pre", v.mdp_states_pre},
                       {"mdp_states_post", v.mdp_states_post},
                       {"times", times_json(v.times)}};
      if (v.bisection && v.restart) {
        j["bisection"] = *v.bisection;
        j["restart"] = *v.restart;
      }
      if (a.stats) {
        j["flips"] = v.flips;
        j["mdp_transitions_post"] = v.mdp_transitions_post;
        j["witness"] = witness_json(v.witness);
      }
      if (oracle[i]) {
        j["oracle"] = to_double(*oracle[i]);
        j["oracle_exact"] = rational_to_string(*oracle[i]);
      }
      arr.push_back(std::move(j));
    }
    out << arr.dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < q.values.size(); ++i) {
      const ValueResult& v = q.values[i];
      out << render_value(v.value, out_ty) << ": " << fixed6(v.probability) << "\n";
      if (a.stats) {
        out << "  method=" << method_name(v.method) << " iterations=" << v.iterations << " flips=" << v.flips
            << " add_nodes=" << v.add_nodes << " mdp_states_pre=" << v.mdp_states_pre
            << " mdp_states_post=" << v.mdp_states_post << "\n";
        if (v.bisection && v.restart)
          out << "  bisection=" << fixed6(*v.bisection) << " restart=" << fixed6(*v.restart) << "\n";
        out << "  times compile=" << v.times.compile << "s guard=" << v.times.guard << "s lift=" << v.times.lift
            << "s compress=" << v.times.compress << "s check=" << v.times.check << "s\n";
      }
      if (oracle[i])
        out << "  oracle=" << fixed6(to_double(*oracle[i])) << " (" << rational_to_string(*oracle[i]) << ")\n";
    }
  }

  for (std::size_t i = 0; i < q.values.size(); ++i) {
    if (!oracle[i]) continue;
    const double diff = std::abs(q.values[i].probability - to_double(*oracle[i]));
    if (diff > 2 * a.tol)
      throw Error("oracle mismatch for " + render_value(q.values[i].value, out_ty) + ": pipeline " +
                  fixed6(q.values[i].probability) + ", oracle " + rational_to_string(*oracle[i]));
  }
  return kExitOk;
}

struct CheckArgs {
  std::string file;
  std::string value;
  std::string method = "bisection";
  double tol = 1e-6;
};

std::optional<Value> parse_label_value(std::string text) {
  for (auto [from, to] : {std::pair<std::string, std::string>{"true", "T"}, {"false", "F"}}) {
    for (std::size_t pos; (pos = text.find(from)) != std::string::npos;) text.replace(pos, from.size(), to);
  }
  return Value::parse(text);
}

int run_check(const CheckArgs& a, std::ostream& out) {
  if (!(a.tol > 0) || a.tol >= 1) throw UsageError("--tol must lie in (0, 1)");
  const auto method = parse_method(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "' (expected bisection, restart or both)");
  const auto v = parse_label_value(a.value);
  if (!v) throw UsageError("cannot parse value '" + a.value + "'");
  std::ifstream probe(a.file);
  if (!probe) throw UsageError("cannot read '" + a.file + "'");
  const Mdp m = load_explicit_mdp_file(a.file);
  InferOptions o;
  o.method = *method;
  o.tol = a.tol;
  const ValueResult r = check_mdp(m, Target::of_value(*v), o);
  out << v->to_string() << ": " << fixed6(r.probability) << "\n";
  return kExitOk;
}

struct BenchArgs {
  std::string family;
  std::vector<int> sizes;
  std::optional<int> extra;
  std::uint64_t seed = 1;
  int ndet = 50;
  double timeout = 60;
  bool json = false;
  bool parallel = false;
  bool leaves = false;
  bool no_compress = false;
  std::string method = "bisection";
  bool print = false;
};

int run_bench_cmd(const BenchArgs& a, std::ostream& out) {
  const auto family = parse_family(a.family);
  if (!family) throw UsageError("unknown benchmark family '" + a.family + "'");
  const auto method = parse_method(a.method);
  if (!method) throw UsageError("unknown method '" + a.method + "'");
  if (!(a.timeout > 0)) throw UsageError("--timeout must be positive");
  std::vector<BenchmarkSpec> specs;
  for (int s : a.sizes) {
    BenchmarkSpec spec;
    spec.family = *family;
    spec.size = s;
    spec.extra = a.extra;
    spec.seed = a.seed;
    spec.ndet_percent = a.ndet;
    specs.push_back(spec);
  }
  if (a.print) {
    for (const auto& s : specs) {
      try {
        out << "// " << s.label() << "\n" << generate(s) << "\n";
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    return kExitOk;
  }
  BenchOptions o;
  o.infer.method = *method;
  o.infer.compress = !a.no_compress;
  o.timeout_seconds = a.timeout;
  o.parallel = a.parallel;
  o.count_leaves = a.leaves;
  const auto rows = run_bench(specs, o);
  out << (a.json ? render_bench_json(rows) : render_bench_table(rows));
  return kExitOk;
}

struct CompileArgs {
  std::string file;
  bool core = false;
  std::string dot;
};

int run_compile(const CompileArgs& a, std::ostream& out) {
  std::ifstream probe(a.file);
  if (!probe) throw UsageError("cannot read '" + a.file + "'");
  const CoreProgram p = load_program_file(a.file);
  if (a.core) out << print_core(p) << "\n";
  DDStore store;
  const CompiledTriple t = compile_program(store, p);
  out << dump_triple(store, t);
  const AddRef add = store.guard(t.model, t.accept);
  const Mdp m = lift(store, add, t.trace);
  out << "add: " << store.add_inner_count(add) << " inner, " << store.add_terminal_count(add) << " terminal\n";
  out << "mdp: " << m.size() << " states, " << compress(m, 40).size() << " after compression\n";
  if (!a.dot.empty()) write_file(a.dot, store.to_dot(add));
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Exact maximum conditional probabilities for loop-free probabilistic programs with nondeterminism",
               "nodice");
  app.require_subcommand(1);

  InferArgs ia;
  auto* infer_cmd = app.add_subcommand("infer", "Maximum conditional probability of output values");
  infer_cmd->add_option("file", ia.file, "Program file")->required();
  infer_cmd->add_option("--value", ia.value, "Output value literal, e.g. true or (true, 2)");
  infer_cmd->add_flag("--all", ia.all, "Query every output value (default)");
  infer_cmd->add_option("--method", ia.method, "bisection, restart or both");
  infer_cmd->add_option("--tol", ia.tol, "Accuracy of the checker");
  infer_cmd->add_flag("--no-compress", ia.no_compress, "Skip probabilistic state compression");
  infer_cmd->add_option("--max-fanout", ia.max_fanout, "Fan-out cap for compression");
  infer_cmd->add_option("--export-mdp", ia.export_mdp, "Write the checked MDP in explicit format");
  infer_cmd->add_flag("--oracle", ia.oracle, "Cross-check against the exact execution-tree oracle");
  infer_cmd->add_flag("--stats", ia.stats, "Print sizes, iterations and timings");
  infer_cmd->add_flag("--json", ia.json, "Machine-readable output");
  infer_cmd->add_flag("--parallel", ia.parallel, "Check values on worker threads");
  infer_cmd->add_flag("--no-reduce", ia.no_reduce, "Query tuple programs directly instead of per-value reduction");

  CheckArgs ca;
  auto* check_cmd = app.add_subcommand("check-mdp", "Run the checker on an explicit MDP file");
  check_cmd->add_option("file", ca.file, "Explicit MDP file")->required();
  check_cmd->add_option("--value", ca.value, "Terminal label to aim for, e.g. T or (T,F)")->required();
  check_cmd->add_option("--method", ca.method, "bisection, restart or both");
  check_cmd->add_option("--tol", ca.tol, "Accuracy of the checker");

  BenchArgs ba;
  auto* bench_cmd = app.add_subcommand("bench", "Generate and run benchmark programs");
  bench_cmd->add_option("family", ba.family, "runway, coupon_prob, coupon_ndet, network, bayes_net or threesat")
      ->required();
  bench_cmd->add_option("size", ba.sizes, "One or more sizes")->required();
  bench_cmd->add_option("--extra", ba.extra, "Secondary size parameter of the family");
  bench_cmd->add_option("--seed", ba.seed, "Seed for threesat");
  bench_cmd->add_option("--ndet", ba.ndet, "Percentage of nondeterministic threesat variables");
  bench_cmd->add_option("--timeout", ba.timeout, "Per-run time limit in seconds");
  bench_cmd->add_option("--method", ba.method, "bisection, restart or both");
  bench_cmd->add_flag("--no-compress", ba.no_compress, "Skip probabilistic state compression");
  bench_cmd->add_flag("--leaves", ba.leaves, "Also count execution-tree leaves");
  bench_cmd->add_flag("--json", ba.json, "Machine-readable output");
  bench_cmd->add_flag("--parallel", ba.parallel, "Run specs concurrently");
  bench_cmd->add_flag("--print", ba.print, "Print the generated programs instead of running them");

  CompileArgs ka;
  auto* compile_cmd = app.add_subcommand("compile", "Show formulas, trace and diagram sizes");
  compile_cmd->add_option("file", ka.file, "Program file")->required();
  compile_cmd->add_flag("--core", ka.core, "Also print the core program");
  compile_cmd->add_option("--dot", ka.dot, "Write the guarded ADD as Graphviz");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*infer_cmd) return run_infer(ia, out);
    if (*check_cmd) return run_check(ca, out);
    if (*bench_cmd) return run_bench_cmd(ba, out);
    if (*compile_cmd) return run_compile(ka, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return kExitUsage;
}

}  // namespace nodice
