#pragma once

#include "nodice/compiler.hpp"
#include "nodice/core.hpp"
#include "nodice/rational.hpp"

#include <optional>
#include <vector>

namespace nodice {

struct ExecNode {
  enum class Kind { Prob, Ndet, Leaf };
  Kind kind = Kind::Leaf;
  Rational theta;  // Prob only
  std::uint32_t then_child = 0;
  std::uint32_t else_child = 0;
  Outcome outcome;  // Leaf only
  Rational weight;  // Leaf only: product of the probabilities on its path
};

/// Full execution tree of a program: one branch per flip outcome, in
/// evaluation order.
struct ExecTree {
  std::vector<ExecNode> nodes;
  std::uint32_t root = 0;

  std::size_t leaf_count() const;
  std::size_t ndet_count() const;
  /// Leaf mass under any fixed strategy; throws if the two branches of a
  /// choice node carry different mass.
  Rational total_weight() const;
};

/// Default flip cap of the oracle, overridden by NODICE_ORACLE_CAP.
std::size_t oracle_flip_cap();

/// Throws LimitError when the program has more flips than `cap`.
ExecTree build_exec_tree(const CoreProgram& p, std::optional<std::size_t> cap = std::nullopt);

struct ParetoPoint {
  Rational num;
  Rational den;
  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};
using ParetoSet = std::vector<ParetoPoint>;

/// Achievable (target mass, accepted mass) pairs at the root. With pruning
/// only the vertices of the convex hull are kept.
ParetoSet pareto_set(const ExecTree& tree, const Value& v, bool prune = true);

/// Vertices of the convex hull of `points`, counter-clockwise.
ParetoSet convex_hull(ParetoSet points);

/// True when `p` lies in the convex hull of `set` (boundary included).
bool hull_contains(const ParetoSet& set, const ParetoPoint& p);

/// Largest num/den over the set; 0 when every den is 0.
Rational max_ratio(const ParetoSet& set);

/// Exact maximum of Pr(v | accepted) over all schedulers.
Rational oracle_max_conditional(const ExecTree& tree, const Value& v, bool prune = true);

/// Conditional probability under every deterministic history-dependent
/// strategy. Strategy index bit i is the choice at the i-th choice node in
/// preorder (1 takes the then branch).
std::vector<Rational> brute_force_ratios(const ExecTree& tree, const Value& v, std::size_t max_ndet = 20);
Rational brute_force_max_conditional(const ExecTree& tree, const Value& v, std::size_t max_ndet = 20);

/// Weighted model count over a nondeterminism-free compiled triple:
/// (mass of accepted runs returning v, accepted mass).
struct WmcResult {
  Rational num;
  Rational den;
};
WmcResult wmc_probabilistic(const DDStore& store, const CompiledTriple& t, const Value& v,
                            std::size_t max_levels = 20);

/// Number of leaves the execution tree would have, counted without
/// building it.
BigInt exec_tree_leaf_count(const CoreProgram& p);

/// Big-step run where flip number i (in evaluation order, counting every
/// branch of every if) returns assignment[i].
Outcome execute(const CoreProgram& p, const std::vector<bool>& assignment);

}  // namespace nodice
