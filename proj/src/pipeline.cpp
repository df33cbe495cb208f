#include "nodice/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <future>

namespace nodice {

namespace {

class Stopwatch {
 public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

 private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

struct Job {
  Value value;
  Target target;
  const BuiltMdp* built;
};

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Bisection: return "bisection";
    case Method::Restart: return "restart";
    case Method::Both: return "both";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view s) {
  if (s == "bisection") return Method::Bisection;
  if (s == "restart") return Method::Restart;
  if (s == "both") return Method::Both;
  return std::nullopt;
}

BuiltMdp build_mdp(const CoreProgram& p, const InferOptions& options) {
  BuiltMdp b;
  Stopwatch sw;
  DDStore store;
  CompileOptions copts;
  copts.inline_calls = options.inline_calls;
  copts.deadline = options.deadline;
  const CompiledTriple t = compile_program(store, p, copts);
  b.flips = t.trace.size();
  b.times.compile = sw.lap();
  check_deadline(options.deadline);
  const AddRef root = store.guard(t.model, t.accept);
  b.add_nodes = store.add_inner_count(root) + store.add_terminal_count(root);
  b.times.guard = sw.lap();
  check_deadline(options.deadline);
  b.lifted = lift(store, root, t.trace);
  b.times.lift = sw.lap();
  check_deadline(options.deadline);
  b.checked = options.compress ? compress(b.lifted, options.max_fanout) : b.lifted;
  b.times.compress = sw.lap();
  return b;
}

ValueResult check_mdp(const Mdp& m, const Target& target, const InferOptions& options) {
  ValueResult r;
  r.method = options.method;
  Stopwatch sw;
  if (options.method != Method::Restart) {
    ConditionalResult c = conditional_bisection(m, target, options.tol, options.deadline);
    r.bisection = c.probability;
    r.probability = c.probability;
    r.iterations = c.iterations;
    r.witness = std::move(c.witness);
  }
  if (options.method != Method::Bisection) {
    ConditionalResult c = conditional_restart(m, target, options.tol, options.deadline);
    r.restart = c.probability;
    if (options.method == Method::Restart) {
      r.probability = c.probability;
      r.iterations = c.iterations;
      r.witness = std::move(c.witness);
    } else {
      r.iterations += c.iterations;
    }
  }
  if (r.bisection && r.restart && std::abs(*r.bisection - *r.restart) > 2 * options.tol)
    throw Error("bisection (" + std::to_string(*r.bisection) + ") and restart (" + std::to_string(*r.restart) +
                ") disagree beyond twice the tolerance");
  r.times.check = sw.lap();
  r.mdp_states_post = m.size();
  r.mdp_transitions_post = m.transition_count();
  return r;
}

QueryResult infer(const CoreProgram& p, const std::optional<Value>& query, const InferOptions& options) {
  if (!(options.tol > 0)) throw Error("tolerance must be positive");
  if (options.max_fanout < 2) throw Error("fan-out cap must be at least 2");
  const auto start = std::chrono::steady_clock::now();
  QueryResult out;
  out.output_type = p.type();
  if (query && !query->has_type(p.type()))
    throw Error("value " + query->to_string() + " does not have the program's type " + p.type().to_string());
  const std::vector<Value> values = query ? std::vector<Value>{*query} : enumerate_output_values(p.type());

  // Compile everything on this thread; only checking fans out.
  const bool direct = !options.boolean_reduction || p.type().is_bool();
  std::vector<BuiltMdp> built;
  std::vector<Job> jobs;
  built.reserve(direct ? 1 : values.size());
  if (direct) built.push_back(build_mdp(p, options));
  for (const Value& v : values) {
    if (direct) {
      jobs.push_back({v, Target::of_value(v), &built.front()});
    } else {
      built.push_back(build_mdp(boolean_reduce(p, v), options));
      jobs.push_back({v, Target::of_value(Value::t()), &built.back()});
    }
  }

  auto run = [&](const Job& j) {
    ValueResult r = check_mdp(j.built->checked, j.target, options);
    r.value = j.value;
    r.flips = j.built->flips;
    r.add_nodes = j.built->add_nodes;
    r.mdp_states_pre = j.built->lifted.size();
    const double check = r.times.check;
    r.times = j.built->times;
    r.times.check = check;
    if (options.keep_mdp) r.mdp = j.built->checked;
    return r;
  };

  if (options.parallel && jobs.size() > 1) {
    std::vector<std::future<ValueResult>> futures;
    for (const Job& j : jobs) futures.push_back(std::async(std::launch::async, run, std::cref(j)));
    for (auto& f : futures) out.values.push_back(f.get());
  } else {
    for (const Job& j : jobs) out.values.push_back(run(j));
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace nodice
