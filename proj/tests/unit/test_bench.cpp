#include "test_util.hpp"

#include "nodice/bench.hpp"
#include "nodice/oracle.hpp"

#include <doctest.h>
#include <json.hpp>

using namespace nodice;
using namespace nodice::testing;

namespace {

BenchmarkSpec spec(Family f, int size, std::optional<int> extra = std::nullopt, std::uint64_t seed = 1) {
  BenchmarkSpec s;
  s.family = f;
  s.size = size;
  s.extra = extra;
  s.seed = seed;
  return s;
}

}  // namespace

TEST_SUITE("bench") {
  TEST_CASE("family names round trip") {
    for (const Family f : all_families()) CHECK(parse_family(family_name(f)) == f);
    CHECK_FALSE(parse_family("nope").has_value());
  }

  TEST_CASE("runway generator reproduces the bundled runway program") {
    const auto generated = load_program(generate(spec(Family::Runway, 3)));
    CHECK(print_core(generated) == print_core(bundled("runway.nd")));
  }

  TEST_CASE("coupon generator observes distinct draws") {
    const std::string src = generate(spec(Family::CouponNdet, 2));
    CHECK(src.find("observe") != std::string::npos);
    CHECK(src.find("choose") != std::string::npos);
    CHECK(generate(spec(Family::CouponProb, 2)).find("choose") == std::string::npos);
    CHECK_NOTHROW(load_program(src));
  }

  TEST_CASE("threesat is deterministic per seed") {
    const auto a = generate(spec(Family::ThreeSat, 6, 10, 1));
    CHECK(a == generate(spec(Family::ThreeSat, 6, 10, 1)));
    CHECK(a != generate(spec(Family::ThreeSat, 6, 10, 2)));
    CHECK_NOTHROW(load_program(a));
  }

  TEST_CASE("unsupported sizes are rejected") {
    CHECK_THROWS_AS(generate(spec(Family::Runway, 0)), Error);
    CHECK_THROWS_AS(generate(spec(Family::CouponNdet, -1)), Error);
    CHECK_THROWS_AS(generate(spec(Family::BayesNet, 9)), Error);
  }

  TEST_CASE("empty spec list gives an empty report") {
    CHECK(run_bench({}).empty());
    CHECK(nlohmann::json::parse(render_bench_json({})).empty());
  }

  TEST_CASE("timeouts become rows") {
    BenchOptions o;
    o.timeout_seconds = 1e-4;
    const auto rows = run_bench({spec(Family::ThreeSat, 30), spec(Family::CouponProb, 2)}, o);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].status == BenchRow::Status::Timeout);
    CHECK(render_bench_table(rows).find("TO") != std::string::npos);
    const auto doc = nlohmann::json::parse(render_bench_json(rows));
    CHECK(doc.size() == 2);
  }

  TEST_CASE("runway at seven steps beats the execution tree") {
    BenchOptions o;
    o.count_leaves = true;
    const auto rows = run_bench({spec(Family::Runway, 7)}, o);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].status == BenchRow::Status::Ok);
    REQUIRE(rows[0].exec_tree_leaves.has_value());
    CHECK(BigInt(rows[0].add_nodes) < BigInt(*rows[0].exec_tree_leaves));
  }

  TEST_CASE("small instances match the oracle and shrink monotonically") {
    std::vector<BenchmarkSpec> specs{spec(Family::Runway, 2), spec(Family::Runway, 3),
                                     spec(Family::CouponProb, 2), spec(Family::CouponNdet, 2),
                                     spec(Family::CouponNdet, 3, 2), spec(Family::Network, 1),
                                     spec(Family::Network, 2)};
    for (int e = 0; e <= 3; ++e) specs.push_back(spec(Family::BayesNet, e));
    for (std::uint64_t seed = 1; seed <= 6; ++seed) specs.push_back(spec(Family::ThreeSat, 6, 8, seed));
    const auto rows = run_bench(specs);
    REQUIRE(rows.size() == specs.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      CAPTURE(specs[i].label());
      REQUIRE(rows[i].status == BenchRow::Status::Ok);
      CHECK(rows[i].mdp_states_post <= rows[i].mdp_states_pre);
      CHECK(rows[i].mdp_states_pre <= rows[i].add_nodes);
      CHECK(rows[i].compile_seconds >= 0);
      CHECK(rows[i].check_seconds >= 0);
      const auto p = load_program(generate(specs[i]));
      const Rational exact = oracle_max_conditional(build_exec_tree(p, 24), Value::t());
      CHECK(std::abs(rows[i].probability - to_double(exact)) <= 2e-6);
    }
  }

  TEST_CASE("json rows carry the table columns") {
    const auto rows = run_bench({spec(Family::CouponProb, 2)});
    const auto doc = nlohmann::json::parse(render_bench_json(rows));
    REQUIRE(doc.size() == 1);
    for (const char* key : {"add_nodes", "mdp_states_pre", "mdp_states_post", "probability"})
      CHECK(doc[0].contains(key));
  }
}
