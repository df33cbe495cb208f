#pragma once

#include "nodice/error.hpp"
#include "nodice/value.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

namespace nodice {

using Level = std::uint32_t;

/// Levels at or above this value are parameter placeholders. They sort after
/// every flip level and must be composed away before an ADD is built.
inline constexpr Level kPlaceholderBase = Level{1} << 30;
inline constexpr Level kTerminalLevel = ~Level{0};

inline bool is_placeholder(Level l) { return l >= kPlaceholderBase && l != kTerminalLevel; }

/// Handle to a BDD node. Only meaningful together with the store that made it.
struct BddRef {
  std::uint32_t store = 0;
  std::uint32_t index = 0;
  friend bool operator==(const BddRef&, const BddRef&) = default;
};

/// Handle to an ADD node with Value or R terminals.
struct AddRef {
  std::uint32_t store = 0;
  std::uint32_t index = 0;
  friend bool operator==(const AddRef&, const AddRef&) = default;
};

enum class BoolOp { And, Or, Xor, Iff };

/// Nested tuple of BDDs, one per Bool leaf of `shape` (preorder).
struct FormulaTuple {
  Ty shape;
  std::vector<BddRef> leaves;

  static FormulaTuple leaf(BddRef f) { return FormulaTuple{Ty::boolean(), {f}}; }
  static FormulaTuple pair(const FormulaTuple& a, const FormulaTuple& b);
  FormulaTuple first() const;
  FormulaTuple second() const;
  const BddRef& bool_leaf() const;
  friend bool operator==(const FormulaTuple&, const FormulaTuple&) = default;
};

struct AddNodeView {
  bool terminal;
  Level level;        // kTerminalLevel for terminals
  AddRef then_child;  // undefined for terminals
  AddRef else_child;
  Outcome outcome;    // terminals only; nullopt is R
};

/// Hash-consed store of reduced ordered BDDs and ADDs. Level order is the
/// numeric order of Level values. Single owner for mutation; const members
/// may be called concurrently once construction is finished.
class DDStore {
 public:
  explicit DDStore(Level flip_levels = 0);
  DDStore(const DDStore&) = delete;
  DDStore& operator=(const DDStore&) = delete;

  std::uint32_t id() const { return id_; }

  Level level_count() const { return flip_levels_; }
  /// Appends `n` flip levels and returns the first one.
  Level allocate_levels(Level n);
  /// Reserves `n` placeholder levels and returns the first one.
  Level allocate_placeholders(Level n);

  BddRef bdd_false() const { return {id_, 0}; }
  BddRef bdd_true() const { return {id_, 1}; }
  BddRef constant(bool b) const { return b ? bdd_true() : bdd_false(); }

  BddRef mk_var(Level level);
  BddRef apply(BoolOp op, BddRef a, BddRef b);
  BddRef neg(BddRef a);
  BddRef ite(BddRef g, BddRef t, BddRef e);

  /// target[level := replacement]
  BddRef compose(BddRef target, Level level, BddRef replacement);
  /// Simultaneous substitution of several levels.
  BddRef compose(BddRef target, const std::vector<std::pair<Level, BddRef>>& substitution);
  /// Adds `offset` to every flip level; placeholder levels are left alone.
  BddRef shift_levels(BddRef root, std::int64_t offset);

  FormulaTuple constant(const Value& v) const;
  FormulaTuple broadcast_and(BddRef g, const FormulaTuple& t);
  FormulaTuple pointwise_or(const FormulaTuple& a, const FormulaTuple& b);
  FormulaTuple ite(BddRef g, const FormulaTuple& t, const FormulaTuple& e);
  FormulaTuple compose(const FormulaTuple& t, const std::vector<std::pair<Level, BddRef>>& substitution);
  FormulaTuple shift_levels(const FormulaTuple& t, std::int64_t offset);

  /// Evaluates a BDD under a total assignment of the flip levels.
  bool eval(BddRef f, const std::vector<bool>& assignment) const;

  /// The guarded ADD: each assignment maps to the model value if accept
  /// holds, else to R.
  AddRef guard(const FormulaTuple& model, BddRef accept);
  Outcome eval_add(AddRef root, const std::vector<bool>& assignment) const;

  // Inspection.
  bool is_terminal(BddRef f) const;
  Level level(BddRef f) const;
  BddRef high(BddRef f) const;
  BddRef low(BddRef f) const;
  AddNodeView add_node(AddRef a) const;
  /// Reachable nodes, each before its children.
  std::vector<AddRef> add_reachable(AddRef root) const;
  std::size_t bdd_inner_count(BddRef root) const;
  std::size_t add_inner_count(AddRef root) const;
  std::size_t add_terminal_count(AddRef root) const;
  /// Levels tested anywhere in the BDD, ascending.
  std::vector<Level> support(BddRef root) const;
  std::size_t bdd_table_size() const { return bdd_.size(); }
  std::size_t add_table_size() const { return add_.size(); }

  /// Scans all tables; returns a description of every violated reduction
  /// rule (empty when the store is reduced and ordered).
  std::vector<std::string> check_reduced() const;

  /// Formula text over f1..fk, e.g. "(f1 | f2)".
  std::string to_string(BddRef f) const;
  std::string to_string(const FormulaTuple& t) const;
  std::string to_dot(BddRef root) const;
  std::string to_dot(AddRef root) const;

  static std::string level_name(Level l);

 private:
  struct Node {
    Level level;
    std::uint32_t hi, lo;
  };
  struct AddNode {
    Level level;
    std::uint32_t hi, lo;
    std::int32_t terminal;  // index into add_terminals_ or -1
  };
  struct Key {
    Level level;
    std::uint32_t hi, lo;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
      std::uint64_t h = (std::uint64_t{k.level} * 0x9E3779B97F4A7C15ull) ^ (std::uint64_t{k.hi} << 32 | k.lo);
      h ^= h >> 29;
      return static_cast<std::size_t>(h * 0xBF58476D1CE4E5B9ull);
    }
  };
  struct Triple {
    std::uint32_t a, b, c;
    friend bool operator==(const Triple&, const Triple&) = default;
  };
  struct TripleHash {
    std::size_t operator()(const Triple& t) const noexcept {
      std::uint64_t h = (std::uint64_t{t.a} << 32 | t.b) * 0x9E3779B97F4A7C15ull;
      h ^= std::uint64_t{t.c} * 0xC2B2AE3D27D4EB4Full;
      return static_cast<std::size_t>(h ^ (h >> 31));
    }
  };

  void check(BddRef f) const;
  void check(AddRef a) const;
  void check_level(Level l) const;
  std::uint32_t make(Level level, std::uint32_t hi, std::uint32_t lo);
  std::uint32_t apply_rec(BoolOp op, std::uint32_t a, std::uint32_t b);
  std::uint32_t ite_rec(std::uint32_t g, std::uint32_t t, std::uint32_t e);
  std::uint32_t neg_rec(std::uint32_t a);
  std::uint32_t var_index(Level level);
  std::uint32_t cofactor(std::uint32_t f, Level level, bool branch) const;
  std::uint32_t add_make(Level level, std::uint32_t hi, std::uint32_t lo);
  std::uint32_t add_terminal(const Outcome& o);

  std::uint32_t id_;
  Level flip_levels_;
  Level placeholder_count_ = 0;
  std::vector<Node> bdd_;
  std::unordered_map<Key, std::uint32_t, KeyHash> unique_;
  std::unordered_map<Triple, std::uint32_t, TripleHash> apply_cache_;
  std::unordered_map<Triple, std::uint32_t, TripleHash> ite_cache_;
  std::unordered_map<std::uint32_t, std::uint32_t> neg_cache_;

  std::vector<AddNode> add_;
  std::unordered_map<Key, std::uint32_t, KeyHash> add_unique_;
  std::vector<Outcome> add_terminals_;
  std::unordered_map<Value, std::uint32_t> value_terminal_;
  std::int64_t reject_terminal_ = -1;
};

}  // namespace nodice
