#include "../support/random_program.hpp"
#include "test_util.hpp"

#include "nodice/checker.hpp"
#include "nodice/oracle.hpp"
#include "nodice/pipeline.hpp"

#include <doctest.h>

#include <algorithm>

using namespace nodice;
using namespace nodice::testing;

namespace {

constexpr double kTol = 1e-6;

Mdp lifted(const CoreProgram& p) {
  InferOptions o;
  o.compress = false;
  return build_mdp(p, o).lifted;
}

std::uint32_t only_choice_state(const Mdp& m) {
  std::vector<std::uint32_t> found;
  for (std::uint32_t s = 0; s < m.size(); ++s)
    if (m.actions(s).size() == 2) found.push_back(s);
  REQUIRE(found.size() == 1);
  return found.front();
}

std::vector<CoreProgram> corpus(std::size_t randoms, std::uint64_t seed) {
  std::vector<CoreProgram> out;
  for (const auto& b : bundled_programs()) out.push_back(b.program);
  for (std::size_t i = 0; i < randoms; ++i) {
    auto r = random_program(seed);
    seed = r.seed + 1;
    out.push_back(std::move(r.program));
  }
  return out;
}

double reward_for(const StateLabel& l, const Value& v, double lambda) {
  if (!l.accept) return 0.0;
  return l.value == v ? 1.0 - lambda : -lambda;
}

}  // namespace

TEST_SUITE("checker") {
  TEST_CASE("single target terminal") {
    const Mdp m = lifted(load_program("true"));
    CHECK(max_reach_dag(m, Target::of_value(Value::t())) == 1.0);
    CHECK(max_reach_dag(m, Target::of_value(Value::f())) == 0.0);
    CHECK(max_reach_dag(m, Target::accept()) == 1.0);
  }

  TEST_CASE("pipeline example reachability") {
    const Mdp m = lifted(bundled("pipeline_example.nd"));
    const auto choice = only_choice_state(m);
    SchedulerWitness w;
    CHECK(max_reach_dag(m, Target::of_value(Value::t()), &w) == doctest::Approx(0.116).epsilon(1e-12));
    CHECK(w.choice.at(choice) == Action::L);
    CHECK(max_reach_dag(m, Target::reject(), &w) == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(w.choice.at(choice) == Action::R);
  }

  TEST_CASE("weighted terminal values") {
    const Mdp m = lifted(bundled("pipeline_example.nd"));
    CHECK(weighted_terminal_value(m, [](const StateLabel&) { return 0.0; }) == 0.0);
    const Value t = Value::t();
    const double indicator = weighted_terminal_value(m, [&](const StateLabel& l) { return l.accept && l.value == t ? 1.0 : 0.0; });
    CHECK(indicator == max_reach_dag(m, Target::of_value(t)));
    CHECK(weighted_terminal_value(m, [&](const StateLabel& l) { return reward_for(l, t, 0.15); }) > 0.0);
    CHECK(weighted_terminal_value(m, [&](const StateLabel& l) { return reward_for(l, t, 0.25); }) < 0.0);
  }

  TEST_CASE("bisection on the pipeline example") {
    const Mdp m = lifted(bundled("pipeline_example.nd"));
    const auto r = conditional_bisection(m, Target::of_value(Value::t()), kTol);
    CHECK(std::abs(r.probability - 0.2) <= kTol);
    CHECK(r.witness.choice.at(only_choice_state(m)) == Action::R);
    CHECK(r.iterations > 0);
    const auto restart = conditional_restart(m, Target::of_value(Value::t()), kTol);
    CHECK(std::abs(restart.probability - 0.2) <= kTol);
  }

  TEST_CASE("zero accepting probability yields zero") {
    const Mdp m = lifted(load_program("let o = observe(false) in true"));
    CHECK(conditional_bisection(m, Target::of_value(Value::t())).probability == 0.0);
    CHECK(conditional_restart(m, Target::of_value(Value::t())).probability == 0.0);
    const Mdp n = lifted(load_program("flip(0.5)"));
    CHECK(conditional_restart(n, Target::of_value(Value::pair(Value::t(), Value::t()))).probability == 0.0);
  }

  TEST_CASE("non-compositional example") {
    const Mdp m = lifted(bundled("noncompositional.nd"));
    const auto r = conditional_bisection(m, Target::of_value(Value::t()), kTol);
    CHECK(std::abs(r.probability - 301.0 / 420.0) <= kTol);
    CHECK(r.witness.choice.at(only_choice_state(m)) == Action::R);
    const Mdp alt = lifted(bundled("noncompositional_alt.nd"));
    const auto a = conditional_bisection(alt, Target::of_value(Value::t()), kTol);
    CHECK(a.witness.choice.at(only_choice_state(alt)) == Action::L);
  }

  TEST_CASE("observation that only a nondeterministic choice can satisfy") {
    const auto p = bundled("observe_choice.nd");
    const Mdp m = lifted(p);
    CHECK(std::abs(conditional_restart(m, Target::of_value(Value::t()), kTol).probability - 1.0) <= kTol);
    CHECK(std::abs(conditional_bisection(m, Target::of_value(Value::f()), kTol).probability - 1.0 / 3.0) <= kTol);
  }

  TEST_CASE("choice-free MDPs give the exact ratio") {
    const Mdp m = lifted(load_program("let a = flip(0.3) in let b = flip(0.6) in let o = observe(a || b) in a"));
    const double exact = 0.3 / (1.0 - 0.7 * 0.4);
    const auto b = conditional_bisection(m, Target::of_value(Value::t()), kTol);
    CHECK(b.probability == doctest::Approx(exact).epsilon(1e-14));
    CHECK(b.iterations == 0);
    CHECK(conditional_restart(m, Target::of_value(Value::t()), kTol).probability == doctest::Approx(exact).epsilon(1e-14));
  }

  TEST_CASE("non-positive tolerance is rejected") {
    const Mdp m = lifted(load_program("flip(0.5)"));
    CHECK_THROWS_AS(conditional_bisection(m, Target::of_value(Value::t()), 0.0), Error);
    CHECK_THROWS_AS(conditional_restart(m, Target::of_value(Value::t()), -1.0), Error);
  }

  TEST_CASE("cycles are structural errors") {
    Mdp m;
    m.states.resize(2);
    m.states[0].out = {{Action::D, 1, 1.0}};
    m.states[1].out = {{Action::D, 0, 1.0}};
    CHECK_THROWS_AS(reverse_topological_order(m), MdpError);
    CHECK_THROWS_AS(max_reach_dag(m, Target::accept()), MdpError);
  }

  TEST_CASE("infer on the small examples") {
    CHECK(std::abs(infer(bundled("runway.nd"), Value::t()).values.at(0).probability - 0.036) < 0.0005);
    CHECK(std::abs(infer(bundled("choice_then_flip.nd"), Value::t()).values.at(0).probability - 2.0 / 3.0) <= kTol);
    CHECK(std::abs(infer(bundled("flip_then_choice.nd"), Value::t()).values.at(0).probability - 1.0) <= kTol);
  }

  TEST_CASE("bisection probes are monotone in lambda") {
    for (const auto& p : corpus(60, 7000)) {
      const Mdp m = lifted(p);
      for (const auto& v : enumerate_output_values(p.type())) {
        auto steps = conditional_bisection(m, Target::of_value(v), kTol).steps;
        std::sort(steps.begin(), steps.end(), [](auto& a, auto& b) { return a.lambda < b.lambda; });
        for (std::size_t i = 1; i < steps.size(); ++i) CHECK(steps[i].m <= steps[i - 1].m + 1e-12);
      }
    }
  }

  TEST_CASE("methods agree and witnesses are valid") {
    for (const auto& p : corpus(200, 8000)) {
      for (const bool compressed : {false, true}) {
        InferOptions o;
        o.compress = compressed;
        const Mdp m = build_mdp(p, o).checked;
        for (const auto& v : enumerate_output_values(p.type())) {
          const auto b = conditional_bisection(m, Target::of_value(v), kTol);
          const auto r = conditional_restart(m, Target::of_value(v), kTol);
          CHECK(std::abs(b.probability - r.probability) <= 2 * kTol);
          const double replay = evaluate_witness(m, b.witness, Target::of_value(v)).ratio();
          CHECK(std::abs(replay - b.probability) <= 2 * kTol);
          for (const auto& [s, a] : b.witness.choice) {
            CHECK(m.actions(s).size() == 2);
            CHECK(a != Action::D);
          }
        }
      }
    }
  }

  TEST_CASE("results are probabilities and cover every accepted run") {
    for (const auto& p : corpus(150, 9000)) {
      InferOptions o;
      o.method = Method::Both;
      const auto q = infer(p, std::nullopt, o);
      const double accept = max_reach_dag(lifted(p), Target::accept());
      double sum = 0;
      for (const auto& r : q.values) {
        CHECK(r.probability >= 0.0);
        CHECK(r.probability <= 1.0);
        sum += r.probability;
      }
      if (accept > 0) CHECK(sum >= 1.0 - kTol * static_cast<double>(q.values.size()));
    }
  }

  TEST_CASE("infer agrees with the oracle, with and without compression and reduction") {
    for (const auto& p : corpus(120, 10000)) {
      const auto tree = build_exec_tree(p);
      InferOptions direct;
      direct.boolean_reduction = false;
      direct.compress = false;
      const auto a = infer(p, std::nullopt, {});
      const auto b = infer(p, std::nullopt, direct);
      REQUIRE(a.values.size() == b.values.size());
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        const double exact = to_double(oracle_max_conditional(tree, a.values[i].value));
        CHECK(std::abs(a.values[i].probability - exact) <= 2 * kTol);
        CHECK(std::abs(b.values[i].probability - exact) <= 2 * kTol);
        CHECK(a.values[i].mdp_states_post <= a.values[i].mdp_states_pre);
      }
    }
  }

  TEST_CASE("parallel checking matches sequential checking") {
    const auto p = bundled("tuple_int.nd");
    InferOptions par;
    par.parallel = true;
    const auto a = infer(p, std::nullopt, {});
    const auto b = infer(p, std::nullopt, par);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) {
      CHECK(a.values[i].value == b.values[i].value);
      CHECK(a.values[i].probability == b.values[i].probability);
    }
  }

  TEST_CASE("expired deadline aborts inference") {
    InferOptions o;
    o.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK_THROWS_AS(infer(bundled("runway.nd"), Value::t(), o), TimeoutError);
  }
}
