#pragma once

#include "nodice/error.hpp"
#include "nodice/rational.hpp"
#include "nodice/surface.hpp"
#include "nodice/value.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nodice {

/// A variable or a constant value.
struct Atom {
  std::variant<std::string, Value> v;

  static Atom var(std::string name) { return Atom{std::move(name)}; }
  static Atom value(Value val) { return Atom{std::move(val)}; }
  bool is_var() const { return std::holds_alternative<std::string>(v); }
  const std::string& name() const { return std::get<std::string>(v); }
  const Value& constant() const { return std::get<Value>(v); }
  std::string to_string() const { return is_var() ? name() : constant().to_string(); }
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

namespace core {

struct AtomE { Atom atom; };
struct TupleE { Atom first, second; };
struct FstE { Atom arg; };
struct SndE { Atom arg; };
struct IfE {
  Atom guard;
  ExprPtr then_branch, else_branch;
};
struct LetE {
  std::string name;
  ExprPtr bound, body;
};
struct CallE {
  std::string callee;
  Atom arg;
};
struct FlipE { Rational theta; };
struct NFlipE {};
struct ObserveE { Atom arg; };

using Node = std::variant<AtomE, TupleE, FstE, SndE, IfE, LetE, CallE, FlipE, NFlipE, ObserveE>;

}  // namespace core

/// Core expression. The node variant only admits atoms where A-normal form
/// requires them, so ANF holds by construction.
struct Expr {
  Ty ty;
  SourcePos pos;
  core::Node node;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

template <class T>
ExprPtr make_expr(Ty ty, SourcePos pos, T node) {
  return std::make_shared<const Expr>(Expr{std::move(ty), pos, core::Node(std::move(node))});
}

struct Function {
  std::string name;
  std::string param;
  Ty param_type;
  Ty return_type;
  ExprPtr body;
};

struct CoreProgram {
  std::vector<Function> functions;
  ExprPtr main;
  /// Surface type of main, used to print and parse output values.
  std::optional<SType> output_type;

  const Function* find(const std::string& name) const;
  Ty type() const { return main->ty; }
  /// Surface type of the output (falls back to a Bool/tuple reading of the core type).
  SType surface_output_type() const;
};

/// Checks that the program is closed, well typed and in A-normal form; throws
/// ProgramError describing the first violation.
void check_core(const CoreProgram& p);
bool is_well_formed(const CoreProgram& p);

/// Core syntax printer: "let x = flip(1/3) in (x, T)".
std::string print_core(const Expr& e);
std::string print_core(const CoreProgram& p);

/// Counts flip and nflip nodes reachable through calls (each call counts its body).
std::size_t count_flips(const CoreProgram& p);

}  // namespace nodice
