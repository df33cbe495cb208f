#pragma once

#include "nodice/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nodice {

enum class Family { Runway, CouponProb, CouponNdet, Network, BayesNet, ThreeSat };

std::string family_name(Family f);
std::optional<Family> parse_family(std::string_view s);
std::vector<Family> all_families();

/// `size` is the primary parameter; `extra` optionally overrides the
/// family's secondary parameter (runway locations, coupon rounds, network
/// width, clause count).
struct BenchmarkSpec {
  Family family = Family::Runway;
  int size = 1;
  std::optional<int> extra;
  std::uint64_t seed = 1;
  /// ThreeSat: percentage of variables drawn by nondeterministic choice.
  int ndet_percent = 50;

  std::string label() const;
};

/// Source text of the benchmark program; throws Error for unsupported sizes.
std::string generate(const BenchmarkSpec& spec);

struct BenchRow {
  BenchmarkSpec spec;
  enum class Status { Ok, Timeout, Failed } status = Status::Ok;
  std::string message;
  double compile_seconds = 0;
  double check_seconds = 0;
  std::size_t flips = 0;
  std::size_t add_nodes = 0;
  std::size_t mdp_states_pre = 0;
  std::size_t mdp_states_post = 0;
  double probability = 0;
  /// Filled when BenchOptions::count_leaves is set.
  std::optional<std::string> exec_tree_leaves;
};

struct BenchOptions {
  InferOptions infer;
  double timeout_seconds = 60;
  bool parallel = false;
  bool count_leaves = false;
};

/// Runs infer for value T on every spec. Timeouts and failures become rows.
std::vector<BenchRow> run_bench(const std::vector<BenchmarkSpec>& specs, const BenchOptions& options = {});

std::string render_bench_table(const std::vector<BenchRow>& rows);
std::string render_bench_json(const std::vector<BenchRow>& rows);

}  // namespace nodice
