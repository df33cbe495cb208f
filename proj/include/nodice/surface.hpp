#pragma once

#include "nodice/error.hpp"
#include "nodice/rational.hpp"
#include "nodice/value.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nodice {

/// Surface type: bool, int<w> or a pair. Integer widths are positive once
/// type checking is done; before that 0 means "program default width" and
/// negative values are inference variables.
class SType {
 public:
  enum class Kind { Bool, Int, Pair };

  static SType boolean() { return SType(Kind::Bool, 0, nullptr, nullptr); }
  static SType integer(int width) { return SType(Kind::Int, width, nullptr, nullptr); }
  static SType pair(const SType& a, const SType& b) {
    return SType(Kind::Pair, 0, std::make_shared<SType>(a), std::make_shared<SType>(b));
  }

  Kind kind() const { return kind_; }
  bool is_bool() const { return kind_ == Kind::Bool; }
  bool is_int() const { return kind_ == Kind::Int; }
  bool is_pair() const { return kind_ == Kind::Pair; }
  int width() const { return width_; }
  const SType& first() const { return *first_; }
  const SType& second() const { return *second_; }

  /// Bool leaves after integers are expanded to bit tuples.
  std::size_t bit_width() const;
  /// The core type this surface type lowers to.
  Ty lower() const;

  /// "bool", "int<3>", "(bool, int<2>)".
  std::string to_string() const;

  friend bool operator==(const SType& a, const SType& b);

 private:
  SType(Kind k, int w, std::shared_ptr<const SType> a, std::shared_ptr<const SType> b)
      : kind_(k), width_(w), first_(std::move(a)), second_(std::move(b)) {}

  Kind kind_;
  int width_;
  std::shared_ptr<const SType> first_, second_;
};

struct SExpr;
using SExprPtr = std::shared_ptr<SExpr>;

namespace surface {

struct BoolLit { bool value; };
struct IntLit { std::uint64_t value; };
struct Var { std::string name; };
/// Binary pair; n-ary tuples are nested to the right by the parser.
struct Tuple { SExprPtr first, second; };
struct Fst { SExprPtr arg; };
struct Snd { SExprPtr arg; };
struct If { SExprPtr cond, then_branch, else_branch; };
struct Let {
  std::string name;
  std::optional<SType> annotation;
  SExprPtr bound, body;
};
struct Call {
  std::string callee;
  std::vector<SExprPtr> args;
};
struct Flip { Rational theta; };
struct NFlip {};
struct Observe { SExprPtr arg; };
struct Not { SExprPtr arg; };

enum class BinOp { Iff, Or, Xor, And, Eq, Neq, Lt, Le, Gt, Ge, Add, Sub };
struct Binary {
  BinOp op;
  SExprPtr lhs, rhs;
};
/// uniform(lo, hi) draws from [lo, hi); choose(lo, hi) picks nondeterministically.
struct Uniform { std::uint64_t lo, hi; };
struct Choose { std::uint64_t lo, hi; };

using Node = std::variant<BoolLit, IntLit, Var, Tuple, Fst, Snd, If, Let, Call, Flip, NFlip, Observe,
                          Not, Binary, Uniform, Choose>;

const char* binop_symbol(BinOp op);

}  // namespace surface

struct SExpr {
  SourcePos pos;
  surface::Node node;
  /// Filled in by the type checker.
  std::optional<SType> type;

  template <class T>
  const T* as() const { return std::get_if<T>(&node); }
};

template <class T>
SExprPtr make_sexpr(SourcePos pos, T node) {
  return std::make_shared<SExpr>(SExpr{pos, surface::Node(std::move(node)), std::nullopt});
}

struct SParam {
  std::string name;
  SType type;
};

struct SFunction {
  SourcePos pos;
  std::string name;
  std::vector<SParam> params;
  SType return_type;
  SExprPtr body;
};

struct SurfaceProgram {
  std::vector<SFunction> functions;
  SExprPtr main;
  /// Width substituted for a bare `int`; set by the type checker.
  int default_int_width = 0;
  /// Type of main before desugaring lowered integers to bit tuples.
  std::optional<SType> output_type;
};

/// Renders a core value in surface syntax according to its surface type.
std::string render_value(const Value& v, const SType& type);

/// Parses a surface literal ("true", "3", "(true, 2)") of the given type.
/// Tuples may be written flat or nested. Returns nullopt on any mismatch.
std::optional<Value> parse_value_literal(std::string_view text, const SType& type);

}  // namespace nodice
