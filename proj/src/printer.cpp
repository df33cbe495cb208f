#include "nodice/frontend.hpp"

namespace nodice {

namespace {

constexpr int kExprLevel = 0;
constexpr int kUnaryLevel = 8;
constexpr int kPrimaryLevel = 9;

int binop_level(surface::BinOp op) {
  using surface::BinOp;
  switch (op) {
    case BinOp::Iff: return 1;
    case BinOp::Or: return 2;
    case BinOp::Xor: return 3;
    case BinOp::And: return 4;
    case BinOp::Eq:
    case BinOp::Neq: return 5;
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 6;
    case BinOp::Add:
    case BinOp::Sub: return 7;
  }
  return kPrimaryLevel;
}

int level_of(const SExpr& e) {
  using namespace surface;
  if (e.as<Let>() || e.as<If>() || e.as<Observe>()) return kExprLevel;
  if (const auto* b = e.as<Binary>()) return binop_level(b->op);
  if (e.as<Not>() || e.as<Fst>() || e.as<Snd>()) return kUnaryLevel;
  return kPrimaryLevel;
}

void print(const SExpr& e, int min_level, std::string& out);

void print_at(const SExprPtr& e, int min_level, std::string& out) { print(*e, min_level, out); }

void print(const SExpr& e, int min_level, std::string& out) {
  using namespace surface;
  const bool parens = level_of(e) < min_level;
  if (parens) out += "(";
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, BoolLit>) {
          out += n.value ? "true" : "false";
        } else if constexpr (std::is_same_v<T, IntLit>) {
          out += std::to_string(n.value);
        } else if constexpr (std::is_same_v<T, Var>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, Tuple>) {
          out += "(";
          print_at(n.first, kExprLevel, out);
          out += ", ";
          print_at(n.second, kExprLevel, out);
          out += ")";
        } else if constexpr (std::is_same_v<T, Fst>) {
          out += "fst ";
          print_at(n.arg, kUnaryLevel, out);
        } else if constexpr (std::is_same_v<T, Snd>) {
          out += "snd ";
          print_at(n.arg, kUnaryLevel, out);
        } else if constexpr (std::is_same_v<T, Not>) {
          out += "!";
          print_at(n.arg, kUnaryLevel, out);
        } else if constexpr (std::is_same_v<T, If>) {
          out += "if ";
          print_at(n.cond, kExprLevel, out);
          out += " then ";
          print_at(n.then_branch, kExprLevel, out);
          out += " else ";
          print_at(n.else_branch, kExprLevel, out);
        } else if constexpr (std::is_same_v<T, Let>) {
          out += "let " + n.name;
          if (n.annotation) out += ": " + n.annotation->to_string();
          out += " = ";
          print_at(n.bound, kExprLevel, out);
          out += " in\n";
          print_at(n.body, kExprLevel, out);
        } else if constexpr (std::is_same_v<T, Call>) {
          out += n.callee + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i) out += ", ";
            print_at(n.args[i], kExprLevel, out);
          }
          out += ")";
        } else if constexpr (std::is_same_v<T, Flip>) {
          out += "flip(" + rational_to_literal(n.theta) + ")";
        } else if constexpr (std::is_same_v<T, NFlip>) {
          out += "nflip()";
        } else if constexpr (std::is_same_v<T, Observe>) {
          out += "observe ";
          print_at(n.arg, kExprLevel, out);
        } else if constexpr (std::is_same_v<T, Binary>) {
          const int level = binop_level(n.op);
          print_at(n.lhs, level, out);
          out += std::string(" ") + binop_symbol(n.op) + " ";
          print_at(n.rhs, level + 1, out);
        } else if constexpr (std::is_same_v<T, Uniform>) {
          out += "uniform(" + std::to_string(n.lo) + ", " + std::to_string(n.hi) + ")";
        } else if constexpr (std::is_same_v<T, Choose>) {
          out += "choose(" + std::to_string(n.lo) + ", " + std::to_string(n.hi) + ")";
        }
      },
      e.node);
  if (parens) out += ")";
}

}  // namespace

std::string print_surface(const SExpr& e) {
  std::string out;
  print(e, kExprLevel, out);
  return out;
}

std::string print_surface(const SurfaceProgram& p) {
  std::string out;
  for (const auto& f : p.functions) {
    out += "fun " + f.name + "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) {
      if (i) out += ", ";
      out += f.params[i].name + ": " + f.params[i].type.to_string();
    }
    out += "): " + f.return_type.to_string() + " {\n";
    print(*f.body, kExprLevel, out);
    out += "\n}\n\n";
  }
  print(*p.main, kExprLevel, out);
  out += "\n";
  return out;
}

}  // namespace nodice
