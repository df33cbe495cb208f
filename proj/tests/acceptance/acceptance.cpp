// Acceptance suite: prints one [PASS]/[FAIL] line per criterion and exits
// non-zero when any criterion fails.

#include "../support/random_program.hpp"

#include "nodice/bench.hpp"
#include "nodice/checker.hpp"
#include "nodice/compiler.hpp"
#include "nodice/frontend.hpp"
#include "nodice/oracle.hpp"
#include "nodice/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace nodice;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_dir = NODICE_PROGRAMS_DIR;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

CoreProgram bundled(const std::string& name) { return load_program(read_text(g_dir + "/" + name)); }

std::vector<std::pair<std::string, CoreProgram>> bundled_all() {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(g_dir))
    if (e.path().extension() == ".nd") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  std::vector<std::pair<std::string, CoreProgram>> out;
  for (const auto& n : names) out.emplace_back(n, bundled(n));
  return out;
}

/// Collects failure reasons for one criterion.
struct Check {
  std::vector<std::string> failures;
  std::ostringstream notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void near(double got, double want, double tol, const std::string& what) {
    if (!(std::abs(got - want) <= tol)) {
      std::ostringstream s;
      s << std::setprecision(12) << what << ": got " << got << ", want " << want << " +- " << tol;
      failures.push_back(s.str());
    }
  }
};

double infer_one(const CoreProgram& p, const Value& v, const InferOptions& o = {}) {
  return infer(p, v, o).values.at(0).probability;
}

std::uint32_t only_choice_state(const Mdp& m) {
  for (std::uint32_t s = 0; s < m.size(); ++s)
    if (m.actions(s).size() == 2) return s;
  throw Error("no choice state");
}

std::vector<testing::RandomProgram> random_corpus(std::size_t n, std::uint64_t seed) {
  std::vector<testing::RandomProgram> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = testing::random_program(seed);
    seed = r.seed + 1;
    out.push_back(std::move(r));
  }
  return out;
}

const std::vector<testing::RandomProgram>& randoms() {
  static const auto corpus = random_corpus(300, 1);
  return corpus;
}

std::vector<Value> values_of(const CoreProgram& p) { return enumerate_output_values(p.type()); }

// Worked example: 301/420, witness picks F, and T once the first branch uses 0.55.
void ac1(Check& c) {
  const auto t0 = Clock::now();
  InferOptions o;
  o.keep_mdp = true;
  const auto r = infer(bundled("noncompositional.nd"), Value::t(), o).values.at(0);
  c.near(r.probability, 301.0 / 420.0, 1e-6, "P(T)");
  const auto choice = only_choice_state(*r.mdp);
  c.expect(r.witness.choice.count(choice) && r.witness.choice.at(choice) == Action::R, "witness should pick F");
  const auto alt = infer(bundled("noncompositional_alt.nd"), Value::t(), o).values.at(0);
  const auto alt_choice = only_choice_state(*alt.mdp);
  c.expect(alt.witness.choice.count(alt_choice) && alt.witness.choice.at(alt_choice) == Action::L,
           "variant witness should pick T");
  const double t = seconds_since(t0);
  c.expect(t < 1.0, "runtime " + std::to_string(t) + "s");
  c.notes << "P(T)=" << std::setprecision(9) << r.probability << " t=" << std::setprecision(3) << t << "s";
}

void ac2(Check& c) {
  const auto p = bundled("runway.nd");
  const auto t0 = Clock::now();
  const double got = infer_one(p, Value::t());
  const double t = seconds_since(t0);
  const Rational exact = oracle_max_conditional(build_exec_tree(p), Value::t());
  c.expect(std::round(got * 1000.0) / 10.0 == 3.6, "does not round to 3.6%");
  c.near(got, to_double(exact), 1e-6, "oracle");
  c.expect(t < 5.0, "runtime " + std::to_string(t) + "s");
  c.notes << "P(T)=" << std::setprecision(7) << got << " oracle=" << rational_to_string(exact)
          << " t=" << std::setprecision(3) << t << "s";
}

void ac3(Check& c) {
  const auto t0 = Clock::now();
  c.near(infer_one(bundled("choice_then_flip.nd"), Value::t()), 2.0 / 3.0, 1e-6, "ExLet1 P(T)");
  c.near(infer_one(bundled("flip_then_choice.nd"), Value::t()), 1.0, 1e-6, "ExLet2 P(T)");
  const auto obs = bundled("observe_choice.nd");
  c.near(infer_one(obs, Value::t()), 1.0, 1e-6, "ExObs P(T)");
  c.near(infer_one(obs, Value::f()), 1.0 / 3.0, 1e-6, "ExObs P(F)");
  const double t = seconds_since(t0);
  c.expect(t < 1.0, "runtime " + std::to_string(t) + "s");
  c.notes << "t=" << std::setprecision(3) << t << "s";
}

Mdp expected_pipeline_mdp() {
  // root f1, f2 (choice), f3, f4, terminals T, F, R
  Mdp m;
  m.states.resize(7);
  auto d = [](std::vector<std::pair<std::uint32_t, double>> e) {
    MdpState s;
    for (auto [dst, p] : e) s.out.push_back({Action::D, dst, p});
    return s;
  };
  m.states[0] = d({{3, 0.3}, {1, 0.7}});
  m.states[1].out = {{Action::L, 2, 1.0}, {Action::R, 6, 1.0}};
  m.states[2] = d({{3, 0.4}, {5, 0.6}});
  m.states[3] = d({{4, 0.2}, {5, 0.8}});
  for (std::uint32_t s : {4u, 5u, 6u}) m.states[s].absorbing = true;
  m.states[4].label = {true, false, Value::t()};
  m.states[5].label = {true, false, Value::f()};
  m.states[6].label = {false, true, std::nullopt};
  m.initial = 0;
  return m;
}

void ac4(Check& c) {
  const auto p = bundled("pipeline_example.nd");
  DDStore s;
  const auto t = compile_program(s, p);
  const BddRef f1 = s.mk_var(0), f2 = s.mk_var(1), f3 = s.mk_var(2), f4 = s.mk_var(3);
  c.expect(t.model.bool_leaf() == s.apply(BoolOp::And, s.apply(BoolOp::Or, f1, f3), f4), "model formula");
  c.expect(t.accept == s.apply(BoolOp::Or, f1, f2), "accepting formula");
  c.expect(trace_to_string(t.trace) == "f1:0.3, f2:n, f3:0.4, f4:0.2", "trace " + trace_to_string(t.trace));
  const AddRef add = s.guard(t.model, t.accept);
  c.expect(s.add_inner_count(add) == 4, "inner nodes " + std::to_string(s.add_inner_count(add)));
  c.expect(s.add_terminal_count(add) == 3, "terminals " + std::to_string(s.add_terminal_count(add)));
  const auto root = s.add_node(add);
  c.expect(root.level == 0 && s.add_node(root.then_child).level == 3, "f1 then-edge should skip to f4");
  const Mdp m = lift(s, add, t.trace);
  c.expect(isomorphic(m, expected_pipeline_mdp()), "lifted MDP differs from the expected seven-state MDP");
  const auto choice = only_choice_state(m);
  std::vector<double> ratios;
  for (Action a : {Action::L, Action::R}) {
    SchedulerWitness w;
    w.choice[choice] = a;
    ratios.push_back(evaluate_witness(m, w, Target::of_value(Value::t())).ratio());
  }
  c.near(ratios[0], 0.116, 1e-12, "scheduler l");
  c.near(ratios[1], 0.2, 1e-12, "scheduler r");
  const double got = infer_one(p, Value::t());
  c.near(got, 0.2, 1e-6, "max P(T)");
  c.notes << "schedulers " << ratios[0] << " / " << ratios[1] << ", P(T)=" << got;
}

void ac5(Check& c) {
  const auto t0 = Clock::now();
  std::size_t cases = 0, max_flips = 0, max_ndet = 0;
  for (const auto& r : randoms()) {
    const auto tree = build_exec_tree(r.program);
    max_flips = std::max(max_flips, count_flips(r.program));
    max_ndet = std::max(max_ndet, tree.ndet_count());
    const auto q = infer(r.program, std::nullopt);
    for (const auto& v : q.values) {
      const Rational exact = oracle_max_conditional(tree, v.value);
      c.near(v.probability, to_double(exact), 2e-6, "seed " + std::to_string(r.seed) + " value " + v.value.to_string());
      c.expect(exact == brute_force_max_conditional(tree, v.value),
               "pareto differs from brute force, seed " + std::to_string(r.seed));
      ++cases;
    }
  }
  const double t = seconds_since(t0);
  c.expect(randoms().size() == 300, "corpus size");
  c.expect(max_flips <= 12 && max_ndet <= 6, "corpus limits");
  c.expect(t < 300.0, "runtime " + std::to_string(t) + "s");
  c.notes << randoms().size() << " programs, " << cases << " queries, t=" << std::setprecision(3) << t << "s";
}

bool compressible(const Mdp& m) {
  for (std::uint32_t s = 0; s < m.size(); ++s) {
    const auto& st = m.states[s];
    if (s == m.initial || st.absorbing || !st.label.empty()) continue;
    if (m.actions(s) == std::vector<Action>{Action::D}) return true;
  }
  return false;
}

void ac6(Check& c) {
  std::vector<std::pair<std::string, CoreProgram>> all = bundled_all();
  for (const auto& r : randoms()) all.emplace_back("seed " + std::to_string(r.seed), r.program);
  std::size_t eligible = 0;
  for (const auto& [name, p] : all) {
    InferOptions off;
    off.compress = false;
    const auto a = infer(p, std::nullopt);
    const auto b = infer(p, std::nullopt, off);
    for (std::size_t i = 0; i < a.values.size(); ++i)
      c.near(a.values[i].probability, b.values[i].probability, 2e-6, name + " " + a.values[i].value.to_string());
    InferOptions direct;
    direct.boolean_reduction = false;
    const auto built = build_mdp(p, direct);
    if (compressible(built.lifted)) {
      ++eligible;
      c.expect(built.checked.size() < built.lifted.size(), name + ": compression removed nothing");
    }
  }
  c.notes << all.size() << " programs, " << eligible << " with an eligible state";
}

void ac7(Check& c) {
  std::size_t checked = 0;
  for (const auto& [name, p] : bundled_all()) {
    if (p.type().is_bool()) continue;
    InferOptions direct;
    direct.boolean_reduction = false;
    for (const auto& v : values_of(p)) {
      const double a = infer_one(p, v, direct);
      const double b = infer_one(boolean_reduce(p, v), Value::t(), direct);
      c.near(a, b, 2e-6, name + " " + v.to_string());
      ++checked;
    }
  }
  c.expect(checked > 0, "no tuple-typed bundled programs");
  c.notes << checked << " value queries";
}

void ac8(Check& c) {
  std::vector<std::pair<std::string, CoreProgram>> all = bundled_all();
  for (const auto& r : randoms()) all.emplace_back("seed " + std::to_string(r.seed), r.program);
  std::size_t queries = 0;
  double worst = 0;
  for (const auto& [name, p] : all) {
    InferOptions o;
    o.boolean_reduction = false;
    const Mdp m = build_mdp(p, o).checked;
    for (const auto& v : values_of(p)) {
      const double b = conditional_bisection(m, Target::of_value(v)).probability;
      const double r = conditional_restart(m, Target::of_value(v)).probability;
      worst = std::max(worst, std::abs(b - r));
      c.near(b, r, 2e-6, name + " " + v.to_string());
      ++queries;
    }
  }
  c.notes << queries << " queries, worst gap " << worst;
}

void ac9(Check& c) {
  std::size_t programs = 0, assignments = 0;
  for (const auto& [name, p] : bundled_all()) {
    DDStore s;
    const auto t = compile_program(s, p);
    const std::size_t n = t.trace.size();
    if (n > 14) continue;
    ++programs;
    const AddRef add = s.guard(t.model, t.accept);
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
      std::vector<bool> b(n);
      for (std::size_t i = 0; i < n; ++i) b[i] = (x >> i) & 1;
      ++assignments;
      if (execute(p, b) != s.eval_add(add, b)) {
        c.expect(false, name + ": mismatch at assignment " + std::to_string(x));
        break;
      }
    }
  }
  c.expect(programs > 0, "no bundled program within 14 flips");
  c.notes << programs << " programs, " << assignments << " assignments";
}

void ac10(Check& c) {
  std::vector<std::pair<std::string, CoreProgram>> all;
  for (auto& [name, p] : bundled_all())
    if (build_exec_tree(p, 64).ndet_count() == 0) all.emplace_back(name, p);
  testing::RandomProgramLimits lim;
  lim.probabilistic_only = true;
  std::uint64_t seed = 1;
  for (int i = 0; i < 150; ++i) {
    auto r = testing::random_program(seed, lim);
    seed = r.seed + 1;
    all.emplace_back("seed " + std::to_string(r.seed), std::move(r.program));
  }
  for (int n = 2; n <= 3; ++n) {
    BenchmarkSpec spec;
    spec.family = Family::CouponProb;
    spec.size = n;
    all.emplace_back(spec.label(), load_program(generate(spec)));
  }
  std::size_t queries = 0;
  for (const auto& [name, p] : all) {
    DDStore s;
    const auto t = compile_program(s, p);
    for (const auto& v : values_of(p)) {
      const auto w = wmc_probabilistic(s, t, v);
      const double ratio = w.den == 0 ? 0.0 : to_double(w.num / w.den);
      c.near(infer_one(p, v), ratio, 1e-9, name + " " + v.to_string());
      ++queries;
    }
  }
  c.notes << all.size() << " programs, " << queries << " queries";
}

void ac11(Check& c) {
  BenchmarkSpec spec;
  spec.family = Family::CouponNdet;
  spec.size = 6;
  const auto t0 = Clock::now();
  const auto p = load_program(generate(spec));
  const auto r = infer(p, Value::t()).values.at(0);
  const double t = seconds_since(t0);
  const BigInt leaves = exec_tree_leaf_count(p);
  c.expect(t < 10.0, "runtime " + std::to_string(t) + "s");
  c.expect(BigInt(r.mdp_states_post) < leaves, "compressed MDP is not smaller than the execution tree");
  c.notes << "t=" << std::setprecision(3) << t << "s, mdp=" << r.mdp_states_post << " states, tree=" << leaves.str()
          << " leaves";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_dir = argv[1];
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3}, {"AC4", ac4},   {"AC5", ac5},  {"AC6", ac6},
      {"AC7", ac7}, {"AC8", ac8}, {"AC9", ac9}, {"AC10", ac10}, {"AC11", ac11}};
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      run(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const bool ok = c.failures.empty();
    failed += !ok;
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "  " << c.notes.str() << "\n";
    for (std::size_t i = 0; i < std::min<std::size_t>(c.failures.size(), 5); ++i)
      std::cout << "       " << c.failures[i] << "\n";
    if (c.failures.size() > 5) std::cout << "       ... " << c.failures.size() - 5 << " more\n";
  }
  return failed == 0 ? 0 : 1;
}
