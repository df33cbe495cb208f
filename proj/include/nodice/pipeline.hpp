#pragma once

#include "nodice/checker.hpp"
#include "nodice/compiler.hpp"
#include "nodice/core.hpp"
#include "nodice/mdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nodice {

enum class Method { Bisection, Restart, Both };

std::string method_name(Method m);
std::optional<Method> parse_method(std::string_view s);

struct InferOptions {
  Method method = Method::Bisection;
  double tol = 1e-6;
  bool compress = true;
  std::size_t max_fanout = 40;
  /// Rewrite non-Bool queries into Bool programs before compiling. When off,
  /// one MDP is built and every value is queried on it directly.
  bool boolean_reduction = true;
  bool inline_calls = false;
  /// Check several values on worker threads.
  bool parallel = false;
  /// Keep the checked MDP in each result.
  bool keep_mdp = false;
  Deadline deadline;
};

struct PhaseTimes {
  double compile = 0;
  double guard = 0;
  double lift = 0;
  double compress = 0;
  double check = 0;
  double total() const { return compile + guard + lift + compress + check; }
};

struct ValueResult {
  Value value;
  double probability = 0;
  Method method = Method::Bisection;
  std::size_t iterations = 0;
  std::optional<double> bisection;
  std::optional<double> restart;
  SchedulerWitness witness;
  std::size_t flips = 0;
  std::size_t add_nodes = 0;
  std::size_t mdp_states_pre = 0;
  std::size_t mdp_states_post = 0;
  std::size_t mdp_transitions_post = 0;
  PhaseTimes times;
  std::optional<Mdp> mdp;
};

struct QueryResult {
  Ty output_type;
  std::vector<ValueResult> values;
  double wall_seconds = 0;
};

/// Maximum conditional probability of `query` (every output value when
/// nullopt) over all schedulers.
QueryResult infer(const CoreProgram& p, const std::optional<Value>& query, const InferOptions& options = {});

/// One guarded ADD lifted to an MDP, with the sizes of each stage.
struct BuiltMdp {
  Mdp lifted;
  Mdp checked;
  std::size_t flips = 0;
  std::size_t add_nodes = 0;
  PhaseTimes times;
};

/// Compiles `p`, lifts its guarded ADD and compresses when enabled.
BuiltMdp build_mdp(const CoreProgram& p, const InferOptions& options = {});

/// Runs the configured method(s) on a prepared MDP.
ValueResult check_mdp(const Mdp& m, const Target& target, const InferOptions& options);

}  // namespace nodice
