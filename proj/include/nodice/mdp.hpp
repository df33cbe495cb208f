#pragma once

#include "nodice/compiler.hpp"
#include "nodice/dd.hpp"
#include "nodice/value.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace nodice {

enum class Action : std::uint8_t { L, R, D };

char action_char(Action a);

struct Transition {
  Action action;
  std::uint32_t dst;
  double prob;
};

struct StateLabel {
  bool accept = false;
  bool reject = false;
  std::optional<Value> value;

  bool empty() const { return !accept && !reject && !value; }
  friend bool operator==(const StateLabel&, const StateLabel&) = default;
};

struct MdpState {
  /// Sorted by action; the then-successor precedes the else-successor.
  std::vector<Transition> out;
  StateLabel label;
  /// Implicit d-self-loop with probability 1.
  bool absorbing = false;
  /// ADD level this state was lifted from, -1 for terminals.
  std::int64_t origin_level = -1;
};

/// What a reachability query aims at.
struct Target {
  enum class Kind { Value, Accept, Reject };
  Kind kind;
  Value value;

  static Target of_value(const Value& v) { return {Kind::Value, v}; }
  static Target accept() { return {Kind::Accept, Value()}; }
  static Target reject() { return {Kind::Reject, Value()}; }
  bool matches(const StateLabel& l) const;
};

class Mdp {
 public:
  std::vector<MdpState> states;
  std::uint32_t initial = 0;

  std::size_t size() const { return states.size(); }
  std::size_t transition_count() const;
  /// Distinct enabled actions of a state (an absorbing state has just d).
  std::vector<Action> actions(std::uint32_t s) const;
  std::vector<Transition> transitions(std::uint32_t s, Action a) const;
  /// Number of outgoing transitions including an implicit self-loop.
  std::size_t fan_out(std::uint32_t s) const;

  /// Throws MdpError if a row is empty, does not sum to 1 within `tol`,
  /// or points outside the state range.
  void validate(double tol = 1e-12) const;
  /// Shape of a freshly lifted MDP: one d action, or l and r each Dirac.
  bool has_lifted_shape() const;
};

struct CompressionReport {
  std::size_t removed = 0;
  std::size_t max_fanout_cap = 0;
  std::size_t max_fanout_after = 0;
};

/// One state per ADD node, rooted at the initial state.
Mdp lift(const DDStore& store, AddRef root, const Trace& trace);

/// Splices out unlabeled single-action states, bounded by `max_fanout`
/// outgoing transitions per predecessor, and drops unreachable states.
Mdp compress(const Mdp& m, std::size_t max_fanout, CompressionReport* report = nullptr);

/// Redirects every reject state to the initial state.
Mdp normalize_restart(const Mdp& m);

/// Explicit text format: STATES, INITIAL, LABEL and TRANS lines.
void export_explicit(const Mdp& m, std::ostream& out);
std::string export_explicit(const Mdp& m);
Mdp load_explicit_mdp(std::istream& in);
Mdp load_explicit_mdp_file(const std::string& path);

/// True when the two MDPs coincide up to a renaming of states.
bool isomorphic(const Mdp& a, const Mdp& b, double tol = 1e-12);

}  // namespace nodice
