#include "../support/random_program.hpp"
#include "test_util.hpp"

#include "nodice/compiler.hpp"
#include "nodice/oracle.hpp"
#include "nodice/pipeline.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace nodice;
using namespace nodice::testing;

namespace {

const ExecNode& node(const ExecTree& t, std::uint32_t i) { return t.nodes.at(i); }

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t at = s.find(from); at != std::string::npos; at = s.find(from, at + to.size()))
    s.replace(at, from.size(), to);
  return s;
}

}  // namespace

TEST_SUITE("oracle") {
  TEST_CASE("single flip tree") {
    const auto t = build_exec_tree(load_program("flip(0.3)"));
    const auto& root = node(t, t.root);
    REQUIRE(root.kind == ExecNode::Kind::Prob);
    CHECK(root.theta == Rational(3, 10));
    CHECK(node(t, root.then_child).outcome == Outcome(Value::t()));
    CHECK(node(t, root.then_child).weight == Rational(3, 10));
    CHECK(node(t, root.else_child).outcome == Outcome(Value::f()));
    CHECK(node(t, root.else_child).weight == Rational(7, 10));
  }

  TEST_CASE("observation after a choice") {
    const auto t = build_exec_tree(bundled("observe_choice.nd"));
    const auto& root = node(t, t.root);
    REQUIRE(root.kind == ExecNode::Kind::Ndet);
    const auto& left = node(t, root.then_child);
    const auto& right = node(t, root.else_child);
    REQUIRE(left.kind == ExecNode::Kind::Prob);
    REQUIRE(right.kind == ExecNode::Kind::Prob);
    CHECK(node(t, left.then_child).outcome == Outcome(Value::t()));
    CHECK(node(t, left.then_child).weight == Rational(2, 3));
    CHECK(node(t, left.else_child).outcome == Outcome(Value::f()));
    CHECK(node(t, left.else_child).weight == Rational(1, 3));
    CHECK(node(t, right.then_child).outcome == Outcome(Value::t()));
    CHECK(node(t, right.else_child).outcome == Outcome());
    CHECK(node(t, right.else_child).weight == Rational(1, 3));
    CHECK(oracle_max_conditional(t, Value::t()) == 1);
    CHECK(oracle_max_conditional(t, Value::f()) == Rational(1, 3));
  }

  TEST_CASE("failed observation is a single reject leaf") {
    const auto t = build_exec_tree(load_program("observe false"));
    CHECK(t.leaf_count() == 1);
    CHECK(node(t, t.root).outcome == Outcome());
    CHECK(node(t, t.root).weight == 1);
    CHECK(oracle_max_conditional(t, Value::t()) == 0);
  }

  TEST_CASE("non-compositional example and its variant") {
    const auto t = build_exec_tree(bundled("noncompositional.nd"));
    CHECK(oracle_max_conditional(t, Value::t()) == Rational(301, 420));
    const auto choose_t = brute_force_ratios(t, Value::t());
    REQUIRE(choose_t.size() == 2);
    CHECK(choose_t[0] > choose_t[1]);

    const auto alt = build_exec_tree(bundled("noncompositional_alt.nd"));
    const auto ratios = brute_force_ratios(alt, Value::t());
    REQUIRE(ratios.size() == 2);
    CHECK(ratios[1] > ratios[0]);
    CHECK(oracle_max_conditional(alt, Value::t()) == ratios[1]);
  }

  TEST_CASE("let examples") {
    CHECK(oracle_max_conditional(build_exec_tree(bundled("choice_then_flip.nd")), Value::t()) == Rational(2, 3));
    CHECK(oracle_max_conditional(build_exec_tree(bundled("flip_then_choice.nd")), Value::t()) == 1);
    CHECK(oracle_max_conditional(build_exec_tree(bundled("flip_then_choice.nd")), Value::f()) == 1);
  }

  TEST_CASE("convex combinations of strategies are in the hull") {
    const auto t = build_exec_tree(bundled("choice_then_flip.nd"));
    const auto full = pareto_set(t, Value::t(), false);
    const auto hull = convex_hull(full);
    for (const Rational p : {Rational(1, 3), Rational(5, 12), Rational(1, 2), Rational(2, 3)})
      CHECK(hull_contains(hull, ParetoPoint{p, 1}));
    CHECK_FALSE(hull_contains(hull, ParetoPoint{Rational(3, 4), 1}));
    CHECK_FALSE(hull_contains(hull, ParetoPoint{Rational(1, 4), 1}));
  }

  TEST_CASE("hull helpers") {
    const ParetoSet square{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {Rational(1, 2), Rational(1, 2)}};
    const auto h = convex_hull(square);
    CHECK(h.size() == 4);
    CHECK(hull_contains(h, {Rational(1, 2), Rational(1, 2)}));
    CHECK(hull_contains(h, {1, Rational(1, 3)}));
    CHECK_FALSE(hull_contains(h, {2, 0}));
    CHECK(max_ratio({{0, 0}}) == 0);
    CHECK(max_ratio({{Rational(1, 4), Rational(1, 2)}, {0, 0}, {Rational(1, 5), Rational(1, 5)}}) == 1);
  }

  TEST_CASE("flip cap and environment override") {
    std::string big = "let a = flip(0.5) in ";
    for (int i = 0; i < 19; ++i) big += "let b" + std::to_string(i) + " = flip(0.5) in ";
    big += "a";
    const auto p = load_program(big);
    CHECK_THROWS_AS(build_exec_tree(p), LimitError);
    CHECK_THROWS_AS(build_exec_tree(p, 3), LimitError);
    ::setenv("NODICE_ORACLE_CAP", "4", 1);
    CHECK(oracle_flip_cap() == 4);
    ::setenv("NODICE_ORACLE_CAP", "30", 1);
    CHECK(oracle_flip_cap() == 30);
    ::unsetenv("NODICE_ORACLE_CAP");
    CHECK(oracle_flip_cap() == 18);
    CHECK(exec_tree_leaf_count(p) == BigInt(1) << 20);
  }

  TEST_CASE("weighted model counting on probabilistic triples") {
    {
      DDStore s;
      const auto t = compile_program(s, load_program("flip(0.3)"));
      const auto w = wmc_probabilistic(s, t, Value::t());
      CHECK(w.num == Rational(3, 10));
      CHECK(w.den == 1);
    }
    {
      const auto p = load_program(replace_all(program_source("observe_choice.nd"), "nflip()", "flip(1/2)"));
      DDStore s;
      const auto w = wmc_probabilistic(s, compile_program(s, p), Value::t());
      CHECK(w.num == Rational(2, 3));
      CHECK(w.den == Rational(5, 6));
    }
    {
      const auto p = load_program(replace_all(program_source("pipeline_example.nd"), "nflip()", "flip(1/2)"));
      DDStore s;
      const auto w = wmc_probabilistic(s, compile_program(s, p), Value::t());
      CHECK(std::abs(infer(p, Value::t()).values.at(0).probability - to_double(w.num / w.den)) <= 2e-6);
      CHECK(oracle_max_conditional(build_exec_tree(p), Value::t()) == w.num / w.den);
    }
    DDStore s;
    const auto nd = compile_program(s, load_program("nflip()"));
    CHECK_THROWS_AS(wmc_probabilistic(s, nd, Value::t()), Error);
  }

  TEST_CASE("pareto sets agree with brute force on random programs") {
    std::uint64_t seed = 20000;
    for (int i = 0; i < 200; ++i) {
      auto r = random_program(seed);
      seed = r.seed + 1;
      CAPTURE(r.source);
      const auto t = build_exec_tree(r.program);
      CHECK(t.total_weight() == 1);
      CHECK(exec_tree_leaf_count(r.program) == BigInt(t.leaf_count()));
      for (const auto& v : enumerate_output_values(r.program.type())) {
        const Rational pruned = oracle_max_conditional(t, v, true);
        CHECK(pruned == brute_force_max_conditional(t, v));
        CHECK(pruned == oracle_max_conditional(t, v, false));
        for (const auto& pt : pareto_set(t, v, true)) {
          CHECK(pt.num >= 0);
          CHECK(pt.num <= pt.den);
          CHECK(pt.den <= 1);
        }
      }
    }
  }

  TEST_CASE("oracle equals weighted model count without nondeterminism") {
    RandomProgramLimits lim;
    lim.probabilistic_only = true;
    std::uint64_t seed = 30000;
    for (int i = 0; i < 120; ++i) {
      auto r = random_program(seed, lim);
      seed = r.seed + 1;
      const auto t = build_exec_tree(r.program);
      DDStore s;
      const auto triple = compile_program(s, r.program);
      for (const auto& v : enumerate_output_values(r.program.type())) {
        const auto w = wmc_probabilistic(s, triple, v);
        const Rational ratio = w.den == 0 ? Rational(0) : Rational(w.num / w.den);
        CHECK(oracle_max_conditional(t, v) == ratio);
      }
    }
  }

  TEST_CASE("total weight is one on bundled programs") {
    for (const auto& b : bundled_programs()) {
      if (count_flips(b.program) > oracle_flip_cap()) continue;
      CAPTURE(b.name);
      CHECK(build_exec_tree(b.program).total_weight() == 1);
    }
  }
}
