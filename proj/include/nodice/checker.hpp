#pragma once

#include "nodice/deadline.hpp"
#include "nodice/mdp.hpp"

#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace nodice {

/// Memoryless deterministic choice at every state with more than one action.
struct SchedulerWitness {
  std::map<std::uint32_t, Action> choice;
  friend bool operator==(const SchedulerWitness&, const SchedulerWitness&) = default;
};

using TerminalReward = std::function<double(const StateLabel&)>;

/// Maximum probability of reaching a target-labeled absorbing state.
/// Requires an MDP that is acyclic apart from absorbing self-loops.
double max_reach_dag(const Mdp& m, const Target& target, SchedulerWitness* witness = nullptr);

/// Maximum expected reward collected at absorbing states; non-absorbing
/// states carry no reward.
double weighted_terminal_value(const Mdp& m, const TerminalReward& reward, SchedulerWitness* witness = nullptr);

struct BisectionStep {
  double lambda;
  double m;
};

struct ConditionalResult {
  double probability = 0;
  std::size_t iterations = 0;
  SchedulerWitness witness;
  /// Bisection only: every probed lambda with its signed value.
  std::vector<BisectionStep> steps;
};

/// Maximum of Pr(target | accept) by bisection on lambda.
ConditionalResult conditional_bisection(const Mdp& m, const Target& target, double tol = 1e-6,
                                        const Deadline& deadline = std::nullopt);

/// Same quantity by redirecting rejected runs to the initial state and
/// running Gauss-Seidel value iteration.
ConditionalResult conditional_restart(const Mdp& m, const Target& target, double tol = 1e-6,
                                      const Deadline& deadline = std::nullopt,
                                      std::size_t max_sweeps = 10'000'000);

/// Accepted mass on the target and total accepted mass under a fixed
/// scheduler; states missing from the witness take their first action.
struct ConditionalMass {
  double num = 0;
  double den = 0;
  double ratio() const { return den > 0 ? num / den : 0.0; }
};
ConditionalMass evaluate_witness(const Mdp& m, const SchedulerWitness& w, const Target& target);

/// States ordered children first; throws MdpError on a cycle that is not
/// an absorbing self-loop.
std::vector<std::uint32_t> reverse_topological_order(const Mdp& m);

}  // namespace nodice
