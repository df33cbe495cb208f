#include "nodice/frontend.hpp"

#include <algorithm>
#include <unordered_map>

namespace nodice {

namespace {

int bits_needed(std::uint64_t n) {
  int w = 1;
  while (w < 63 && (n >> w) != 0) ++w;
  return w;
}

// Finds the widest literal (and uniform/choose bound) to size bare `int`.
struct WidthScan {
  int width = 1;

  void expr(const SExprPtr& e) {
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, surface::IntLit>) {
            width = std::max(width, bits_needed(n.value));
          } else if constexpr (std::is_same_v<T, surface::Uniform> || std::is_same_v<T, surface::Choose>) {
            if (n.hi > n.lo) width = std::max(width, bits_needed(n.hi - 1));
          } else if constexpr (std::is_same_v<T, surface::Tuple>) {
            expr(n.first), expr(n.second);
          } else if constexpr (std::is_same_v<T, surface::Fst> || std::is_same_v<T, surface::Snd> ||
                               std::is_same_v<T, surface::Observe> || std::is_same_v<T, surface::Not>) {
            expr(n.arg);
          } else if constexpr (std::is_same_v<T, surface::If>) {
            expr(n.cond), expr(n.then_branch), expr(n.else_branch);
          } else if constexpr (std::is_same_v<T, surface::Let>) {
            expr(n.bound), expr(n.body);
          } else if constexpr (std::is_same_v<T, surface::Call>) {
            for (const auto& a : n.args) expr(a);
          } else if constexpr (std::is_same_v<T, surface::Binary>) {
            expr(n.lhs), expr(n.rhs);
          }
        },
        e->node);
  }
};

struct FunSig {
  std::vector<SType> params;
  SType ret;
};

class TypeChecker {
 public:
  explicit TypeChecker(int default_width) : default_width_(default_width) {}

  SurfaceProgram run(const SurfaceProgram& in) {
    SurfaceProgram out;
    out.default_int_width = default_width_;
    for (const auto& f : in.functions) {
      SFunction g = f;
      for (auto& prm : g.params) prm.type = fix_declared(prm.type);
      g.return_type = fix_declared(g.return_type);
      std::vector<std::pair<std::string, SType>> env;
      for (const auto& prm : g.params) env.emplace_back(prm.name, prm.type);
      g.body = copy(f.body);
      SType body_ty = check(g.body, env);
      unify(g.return_type, body_ty, g.body->pos, "function '" + g.name + "' body");
      FunSig sig{{}, g.return_type};
      for (const auto& prm : g.params) sig.params.push_back(prm.type);
      sigs_.emplace(g.name, std::move(sig));
      out.functions.push_back(std::move(g));
    }
    out.main = copy(in.main);
    std::vector<std::pair<std::string, SType>> env;
    check(out.main, env);
    for (const auto& [width_var, lit] : literal_checks_) {
      int w = resolve_width(width_var);
      if (w < 63 && (lit.value >> w) != 0)
        throw ProgramError(lit.pos, "integer literal " + std::to_string(lit.value) + " exceeds width " +
                                        std::to_string(w));
    }
    for (auto& f : out.functions) {
      for (auto& prm : f.params) prm.type = zonk(prm.type);
      f.return_type = zonk(f.return_type);
      zonk_expr(f.body);
    }
    zonk_expr(out.main);
    return out;
  }

 private:
  struct Literal {
    std::uint64_t value;
    SourcePos pos;
  };

  static SExprPtr copy(const SExprPtr& e) {
    auto c = std::make_shared<SExpr>(*e);
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, surface::Tuple>) {
            n.first = copy(n.first), n.second = copy(n.second);
          } else if constexpr (std::is_same_v<T, surface::Fst> || std::is_same_v<T, surface::Snd> ||
                               std::is_same_v<T, surface::Observe> || std::is_same_v<T, surface::Not>) {
            n.arg = copy(n.arg);
          } else if constexpr (std::is_same_v<T, surface::If>) {
            n.cond = copy(n.cond), n.then_branch = copy(n.then_branch), n.else_branch = copy(n.else_branch);
          } else if constexpr (std::is_same_v<T, surface::Let>) {
            n.bound = copy(n.bound), n.body = copy(n.body);
          } else if constexpr (std::is_same_v<T, surface::Call>) {
            for (auto& a : n.args) a = copy(a);
          } else if constexpr (std::is_same_v<T, surface::Binary>) {
            n.lhs = copy(n.lhs), n.rhs = copy(n.rhs);
          }
        },
        c->node);
    return c;
  }

  SType fix_declared(const SType& t) {
    switch (t.kind()) {
      case SType::Kind::Bool: return t;
      case SType::Kind::Int: return t.width() == 0 ? SType::integer(default_width_) : t;
      case SType::Kind::Pair: return SType::pair(fix_declared(t.first()), fix_declared(t.second()));
    }
    return t;
  }

  SType fresh_int() {
    parent_.push_back(static_cast<int>(parent_.size()));
    fixed_.push_back(0);
    return SType::integer(-static_cast<int>(parent_.size()));
  }

  int find(int v) {
    while (parent_[v] != v) v = parent_[v] = parent_[parent_[v]];
    return v;
  }

  // 0 when still unknown.
  int width_of(int w) {
    if (w > 0) return w;
    return fixed_[find(-w - 1)];
  }

  int resolve_width(int w) {
    int r = width_of(w);
    return r > 0 ? r : default_width_;
  }

  bool unify_widths(int a, int b) {
    if (a > 0 && b > 0) return a == b;
    if (a > 0) std::swap(a, b);
    int ra = find(-a - 1);
    if (b > 0) {
      if (fixed_[ra] != 0) return fixed_[ra] == b;
      fixed_[ra] = b;
      return true;
    }
    int rb = find(-b - 1);
    if (ra == rb) return true;
    if (fixed_[ra] != 0 && fixed_[rb] != 0 && fixed_[ra] != fixed_[rb]) return false;
    parent_[rb] = ra;
    if (fixed_[ra] == 0) fixed_[ra] = fixed_[rb];
    return true;
  }

  std::string show(const SType& t) {
    switch (t.kind()) {
      case SType::Kind::Bool: return "bool";
      case SType::Kind::Int: {
        int w = width_of(t.width());
        return w > 0 ? "int<" + std::to_string(w) + ">" : "int";
      }
      case SType::Kind::Pair: return "(" + show(t.first()) + ", " + show(t.second()) + ")";
    }
    return "?";
  }

  bool unify_rec(const SType& a, const SType& b) {
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
      case SType::Kind::Bool: return true;
      case SType::Kind::Int: return unify_widths(a.width(), b.width());
      case SType::Kind::Pair: return unify_rec(a.first(), b.first()) && unify_rec(a.second(), b.second());
    }
    return false;
  }

  void unify(const SType& expected, const SType& found, SourcePos pos, const std::string& what) {
    if (!unify_rec(expected, found))
      throw ProgramError(pos, "type mismatch in " + what + ": expected " + show(expected) + ", found " + show(found));
  }

  SType zonk(const SType& t) {
    switch (t.kind()) {
      case SType::Kind::Bool: return t;
      case SType::Kind::Int: return SType::integer(resolve_width(t.width()));
      case SType::Kind::Pair: return SType::pair(zonk(t.first()), zonk(t.second()));
    }
    return t;
  }

  void zonk_expr(const SExprPtr& e) {
    if (e->type) e->type = zonk(*e->type);
    std::visit(
        [&](auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, surface::Tuple>) {
            zonk_expr(n.first), zonk_expr(n.second);
          } else if constexpr (std::is_same_v<T, surface::Fst> || std::is_same_v<T, surface::Snd> ||
                               std::is_same_v<T, surface::Observe> || std::is_same_v<T, surface::Not>) {
            zonk_expr(n.arg);
          } else if constexpr (std::is_same_v<T, surface::If>) {
            zonk_expr(n.cond), zonk_expr(n.then_branch), zonk_expr(n.else_branch);
          } else if constexpr (std::is_same_v<T, surface::Let>) {
            if (n.annotation) n.annotation = zonk(*n.annotation);
            zonk_expr(n.bound), zonk_expr(n.body);
          } else if constexpr (std::is_same_v<T, surface::Call>) {
            for (auto& a : n.args) zonk_expr(a);
          } else if constexpr (std::is_same_v<T, surface::Binary>) {
            zonk_expr(n.lhs), zonk_expr(n.rhs);
          }
        },
        e->node);
  }

  void expect_bool(const SType& t, SourcePos pos, const char* msg) {
    if (!t.is_bool()) throw ProgramError(pos, std::string(msg) + ", found " + show(t));
  }

  using Env = std::vector<std::pair<std::string, SType>>;

  SType check(const SExprPtr& e, Env& env) {
    SType t = infer(e, env);
    e->type = t;
    return t;
  }

  SType infer(const SExprPtr& e, Env& env) {
    using namespace surface;
    const SourcePos pos = e->pos;
    return std::visit(
        [&](auto& n) -> SType {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BoolLit> || std::is_same_v<T, Flip> || std::is_same_v<T, NFlip>) {
            return SType::boolean();
          } else if constexpr (std::is_same_v<T, IntLit>) {
            SType t = fresh_int();
            literal_checks_.emplace_back(t.width(), Literal{n.value, pos});
            return t;
          } else if constexpr (std::is_same_v<T, Uniform> || std::is_same_v<T, Choose>) {
            if (n.hi <= n.lo)
              throw ProgramError(pos, "empty range: upper bound " + std::to_string(n.hi) +
                                          " must exceed lower bound " + std::to_string(n.lo));
            SType t = fresh_int();
            literal_checks_.emplace_back(t.width(), Literal{n.hi - 1, pos});
            return t;
          } else if constexpr (std::is_same_v<T, Var>) {
            for (auto it = env.rbegin(); it != env.rend(); ++it)
              if (it->first == n.name) return it->second;
            throw ProgramError(pos, "unbound variable '" + n.name + "'");
          } else if constexpr (std::is_same_v<T, Tuple>) {
            SType a = check(n.first, env);
            SType b = check(n.second, env);
            return SType::pair(a, b);
          } else if constexpr (std::is_same_v<T, Fst> || std::is_same_v<T, Snd>) {
            SType a = check(n.arg, env);
            if (!a.is_pair())
              throw ProgramError(pos, std::string(std::is_same_v<T, Fst> ? "fst" : "snd") +
                                          " expects a tuple, found " + show(a));
            return std::is_same_v<T, Fst> ? a.first() : a.second();
          } else if constexpr (std::is_same_v<T, If>) {
            expect_bool(check(n.cond, env), n.cond->pos, "if guard must be bool");
            SType a = check(n.then_branch, env);
            SType b = check(n.else_branch, env);
            if (!unify_rec(a, b))
              throw ProgramError(pos, "branch type mismatch: then is " + show(a) + ", else is " + show(b));
            return a;
          } else if constexpr (std::is_same_v<T, Let>) {
            SType a = check(n.bound, env);
            if (n.annotation) {
              n.annotation = fix_declared(*n.annotation);
              unify(*n.annotation, a, n.bound->pos, "let '" + n.name + "'");
              a = *n.annotation;
            }
            env.emplace_back(n.name, a);
            SType b = check(n.body, env);
            env.pop_back();
            return b;
          } else if constexpr (std::is_same_v<T, Call>) {
            auto it = sigs_.find(n.callee);
            if (it == sigs_.end())
              throw ProgramError(pos, "call to undefined or later-defined function '" + n.callee + "'");
            const FunSig& sig = it->second;
            if (sig.params.size() != n.args.size())
              throw ProgramError(pos, "call arity mismatch: '" + n.callee + "' takes " +
                                          std::to_string(sig.params.size()) + " argument(s), given " +
                                          std::to_string(n.args.size()));
            for (std::size_t i = 0; i < n.args.size(); ++i) {
              SType a = check(n.args[i], env);
              unify(sig.params[i], a, n.args[i]->pos,
                    "argument " + std::to_string(i + 1) + " of '" + n.callee + "'");
            }
            return sig.ret;
          } else if constexpr (std::is_same_v<T, Observe>) {
            expect_bool(check(n.arg, env), pos, "observe expects Bool");
            return SType::boolean();
          } else if constexpr (std::is_same_v<T, Not>) {
            expect_bool(check(n.arg, env), pos, "'!' expects bool");
            return SType::boolean();
          } else if constexpr (std::is_same_v<T, Binary>) {
            SType a = check(n.lhs, env);
            SType b = check(n.rhs, env);
            const std::string sym = binop_symbol(n.op);
            switch (n.op) {
              case BinOp::Iff:
              case BinOp::Or:
              case BinOp::Xor:
              case BinOp::And:
                expect_bool(a, n.lhs->pos, ("'" + sym + "' expects bool operands").c_str());
                expect_bool(b, n.rhs->pos, ("'" + sym + "' expects bool operands").c_str());
                return SType::boolean();
              case BinOp::Eq:
              case BinOp::Neq:
                unify(a, b, pos, "'" + sym + "' operands");
                return SType::boolean();
              case BinOp::Lt:
              case BinOp::Le:
              case BinOp::Gt:
              case BinOp::Ge:
              case BinOp::Add:
              case BinOp::Sub:
                if (!a.is_int()) throw ProgramError(n.lhs->pos, "'" + sym + "' expects int operands, found " + show(a));
                if (!b.is_int()) throw ProgramError(n.rhs->pos, "'" + sym + "' expects int operands, found " + show(b));
                unify(a, b, pos, "'" + sym + "' operands");
                return (n.op == BinOp::Add || n.op == BinOp::Sub) ? a : SType::boolean();
            }
            return SType::boolean();
          }
        },
        e->node);
  }

  int default_width_;
  std::vector<int> parent_, fixed_;
  std::vector<std::pair<int, Literal>> literal_checks_;
  std::unordered_map<std::string, FunSig> sigs_;
};

}  // namespace

SurfaceProgram typecheck(const SurfaceProgram& p) {
  WidthScan scan;
  for (const auto& f : p.functions) scan.expr(f.body);
  scan.expr(p.main);
  return TypeChecker(scan.width).run(p);
}

}  // namespace nodice
