#include "../support/random_program.hpp"
#include "test_util.hpp"

#include "nodice/compiler.hpp"
#include "nodice/oracle.hpp"

#include <doctest.h>

#include <map>

using namespace nodice;
using namespace nodice::testing;

namespace {

std::vector<CoreProgram> corpus(std::size_t randoms) {
  std::vector<CoreProgram> out;
  for (const auto& b : bundled_programs()) out.push_back(b.program);
  std::uint64_t seed = 1000;
  for (std::size_t i = 0; i < randoms; ++i) {
    auto r = random_program(seed);
    seed = r.seed + 1;
    out.push_back(std::move(r.program));
  }
  return out;
}

std::vector<bool> bits_of(std::uint64_t x, std::size_t n) {
  std::vector<bool> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (x >> i) & 1;
  return b;
}

}  // namespace

TEST_SUITE("compiler") {
  TEST_CASE("flip and nflip triples") {
    DDStore s;
    const auto t = compile_program(s, load_program("flip(0.3)"));
    CHECK(t.model.bool_leaf() == s.mk_var(0));
    CHECK(t.accept == s.bdd_true());
    REQUIRE(t.trace.size() == 1);
    CHECK(t.trace[0].theta == Rational(3, 10));
    CHECK(trace_to_string(t.trace) == "f1:0.3");

    DDStore s2;
    const auto n = compile_program(s2, load_program("nflip()"));
    CHECK(n.model.bool_leaf() == s2.mk_var(0));
    REQUIRE(n.trace.size() == 1);
    CHECK(n.trace[0].nondet());
    CHECK(trace_to_string(n.trace) == "f1:n");
  }

  TEST_CASE("values compile to constants") {
    DDStore s;
    const auto t = compile_program(s, load_program("(true, false)"));
    CHECK(t.trace.empty());
    CHECK(t.model == s.constant(Value::pair(Value::t(), Value::f())));
    CHECK(t.accept == s.bdd_true());
  }

  TEST_CASE("observe moves its argument into the accepting formula") {
    DDStore s;
    const auto t = compile_program(s, load_program("observe(flip(0.4))"));
    CHECK(t.model.bool_leaf() == s.bdd_true());
    CHECK(t.accept == s.mk_var(0));
  }

  TEST_CASE("tuple with observation") {
    DDStore s;
    const auto t = compile_program(s, bundled("tuple_observe.nd"));
    const BddRef f1 = s.mk_var(0), f2 = s.mk_var(1);
    CHECK(t.model.first().bool_leaf() == s.apply(BoolOp::And, f1, f2));
    CHECK(t.model.second().bool_leaf() == f2);
    CHECK(t.accept == s.apply(BoolOp::Or, f1, f2));
    CHECK(trace_to_string(t.trace) == "f1:2/3, f2:n");
    CHECK(dump_triple(s, t).find("((f1 & f2), f2)") != std::string::npos);
  }

  TEST_CASE("compile_program equals compile_expr on a bare expression") {
    const auto p = load_program("flip(0.5)");
    DDStore a, b;
    const auto ta = compile_program(a, p);
    Compiler c(b, p);
    Compiler::Env env;
    const auto tb = c.compile_expr(env, *p.main);
    CHECK(dump_triple(a, ta) == dump_triple(b, tb));
    CHECK(ta.trace == tb.trace);
  }

  TEST_CASE("pipeline example formulas and trace") {
    DDStore s;
    const auto t = compile_program(s, bundled("pipeline_example.nd"));
    CHECK(trace_to_string(t.trace) == "f1:0.3, f2:n, f3:0.4, f4:0.2");
    const BddRef f1 = s.mk_var(0), f2 = s.mk_var(1), f3 = s.mk_var(2), f4 = s.mk_var(3);
    CHECK(t.model.bool_leaf() == s.apply(BoolOp::And, s.apply(BoolOp::Or, f1, f3), f4));
    CHECK(t.accept == s.apply(BoolOp::Or, f1, f2));
  }

  TEST_CASE("two calls draw independent flips") {
    const auto p = load_program("fun g(x: bool): bool { flip(0.5) }\n(g(true), g(false))");
    DDStore s;
    const auto t = compile_program(s, p);
    REQUIRE(t.trace.size() == 2);
    CHECK(t.trace[0].level != t.trace[1].level);
    CHECK(t.model.first().bool_leaf() == s.mk_var(0));
    CHECK(t.model.second().bool_leaf() == s.mk_var(1));
    CHECK(oracle_max_conditional(build_exec_tree(p), Value::pair(Value::t(), Value::t())) == Rational(1, 4));
  }

  TEST_CASE("call sites get disjoint blocks with identical flip sequences") {
    const auto p = load_program(
        "fun g(x: bool): bool { flip(0.3) && (x || nflip()) }\n"
        "let a = g(true) in\nlet b = g(flip(0.5)) in\n(a, b)");
    DDStore s;
    Compiler c(s, p);
    const auto t = c.compile_main();
    CHECK(c.instantiations() >= 2);
    std::vector<FlipEntry> first, second;
    for (const auto& e : t.trace) {
      if (e.origin.line != 1) continue;
      (first.size() < 2 ? first : second).push_back(e);
    }
    REQUIRE(first.size() == 2);
    REQUIRE(second.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(first[i].theta == second[i].theta);
      CHECK(first[i].origin == second[i].origin);
      CHECK(first[i].level != second[i].level);
      CHECK(first[i].level < second[0].level);
    }
  }

  TEST_CASE("template instantiation agrees with inlining") {
    for (const auto& p : corpus(80)) {
      DDStore a, b;
      const auto ta = compile_program(a, p);
      const auto tb = compile_program(b, p, CompileOptions{true, std::nullopt});
      CHECK(dump_triple(a, ta) == dump_triple(b, tb));
      CHECK(ta.trace == tb.trace);
    }
  }

  TEST_CASE("trace position equals level and every symbol is housed") {
    for (const auto& p : corpus(150)) {
      DDStore s;
      const auto t = compile_program(s, p);
      for (std::size_t i = 0; i < t.trace.size(); ++i) CHECK(t.trace[i].level == i);
      CHECK(s.level_count() == t.trace.size());
      auto housed = [&](BddRef f) {
        for (const Level l : s.support(f)) CHECK(l < t.trace.size());
      };
      housed(t.accept);
      for (const BddRef f : t.model.leaves) housed(f);
      CHECK(t.model.shape == p.type());
    }
  }

  TEST_CASE("big-step execution equals the guarded ADD") {
    for (const auto& p : corpus(150)) {
      DDStore s;
      const auto t = compile_program(s, p);
      const std::size_t n = t.trace.size();
      if (n > 14) continue;
      const AddRef add = s.guard(t.model, t.accept);
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        const auto b = bits_of(x, n);
        REQUIRE(execute(p, b) == s.eval_add(add, b));
      }
    }
  }

  TEST_CASE("compilation is deterministic") {
    for (const auto& p : corpus(40)) {
      DDStore a, b;
      const auto ta = compile_program(a, p);
      const auto tb = compile_program(b, p);
      CHECK(dump_triple(a, ta) == dump_triple(b, tb));
      CHECK(ta.trace == tb.trace);
      CHECK(a.bdd_table_size() == b.bdd_table_size());
    }
  }

  TEST_CASE("boolean reduction") {
    const auto bool_prog = load_program("flip(0.3)");
    const auto reduced = boolean_reduce(bool_prog, Value::t());
    CHECK(reduced.type() == Ty::boolean());
    CHECK(oracle_max_conditional(build_exec_tree(reduced), Value::t()) == Rational(3, 10));

    const auto pair = load_program("(flip(0.5), flip(0.5))");
    const Value tt = Value::pair(Value::t(), Value::t());
    CHECK(oracle_max_conditional(build_exec_tree(boolean_reduce(pair, tt)), Value::t()) == Rational(1, 4));

    const auto excomp = bundled("tuple_observe.nd");
    const auto tree = build_exec_tree(excomp);
    for (const auto& v : enumerate_output_values(excomp.type())) {
      const auto r = boolean_reduce(excomp, v);
      CHECK(is_well_formed(r));
      CHECK(oracle_max_conditional(build_exec_tree(r), Value::t()) == oracle_max_conditional(tree, v));
    }
    CHECK_THROWS_AS(boolean_reduce(excomp, Value::t()), Error);
  }

  TEST_CASE("output value enumeration") {
    CHECK(enumerate_output_values(Ty::boolean()) == std::vector<Value>{Value::t(), Value::f()});
    const auto four = enumerate_output_values(Ty::pair(Ty::boolean(), Ty::boolean()));
    CHECK(four.size() == 4);
    CHECK(four.front() == Value::pair(Value::t(), Value::t()));
    CHECK(enumerate_output_values(Ty::bits(20)).size() == (std::size_t{1} << 20));
    CHECK_THROWS_AS(enumerate_output_values(Ty::bits(21)), LimitError);
  }
}
