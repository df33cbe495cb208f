#include "nodice/frontend.hpp"

namespace nodice {

namespace {

SType from_ty(const Ty& t) {
  if (t.is_bool()) return SType::boolean();
  return SType::pair(from_ty(t.first()), from_ty(t.second()));
}

bool is_atomic(const SExprPtr& e) {
  if (e->as<surface::Var>() || e->as<surface::BoolLit>()) return true;
  if (const auto* t = e->as<surface::Tuple>()) return is_atomic(t->first) && is_atomic(t->second);
  return false;
}

class Desugarer {
 public:
  SurfaceProgram run(const SurfaceProgram& in) {
    SurfaceProgram out;
    out.default_int_width = in.default_int_width;
    for (const auto& f : in.functions) {
      out.functions.push_back(function(f));
    }
    out.main = expr(in.main);
    out.output_type = in.output_type ? in.output_type : in.main->type;
    return out;
  }

 private:
  // A run of let bindings wrapped around a final expression.
  struct Block {
    SourcePos pos;
    std::vector<std::pair<std::string, SExprPtr>> binds;
  };

  std::string fresh(const char* hint) { return std::string("$") + hint + std::to_string(counter_++); }

  static SExprPtr typed(SExprPtr e, SType t) {
    e->type = std::move(t);
    return e;
  }

  template <class T>
  static SExprPtr mk(SourcePos pos, T node, SType t) {
    return typed(make_sexpr(pos, std::move(node)), std::move(t));
  }

  static SExprPtr lit(SourcePos pos, bool b) { return mk(pos, surface::BoolLit{b}, SType::boolean()); }

  SExprPtr bind(Block& blk, SExprPtr e, const char* hint = "t") {
    if (is_atomic(e)) return e;
    std::string name = fresh(hint);
    SType t = *e->type;
    blk.binds.emplace_back(name, e);
    return mk(blk.pos, surface::Var{name}, t);
  }

  static SExprPtr finish(Block& blk, SExprPtr body) {
    for (auto it = blk.binds.rbegin(); it != blk.binds.rend(); ++it) {
      SType t = *body->type;
      body = mk(blk.pos, surface::Let{it->first, std::nullopt, it->second, body}, t);
    }
    return body;
  }

  static std::optional<bool> literal_value(const SExprPtr& e) {
    if (const auto* b = e->as<surface::BoolLit>()) return b->value;
    return std::nullopt;
  }

  SExprPtr not_(Block& blk, const SExprPtr& x) {
    if (auto v = literal_value(x)) return lit(blk.pos, !*v);
    return bind(blk, mk(blk.pos, surface::If{x, lit(blk.pos, false), lit(blk.pos, true)}, SType::boolean()));
  }

  SExprPtr and_(Block& blk, const SExprPtr& x, const SExprPtr& y) {
    if (auto v = literal_value(x)) return *v ? y : lit(blk.pos, false);
    if (auto v = literal_value(y)) return *v ? x : lit(blk.pos, false);
    return bind(blk, mk(blk.pos, surface::If{x, y, lit(blk.pos, false)}, SType::boolean()));
  }

  SExprPtr or_(Block& blk, const SExprPtr& x, const SExprPtr& y) {
    if (auto v = literal_value(x)) return *v ? lit(blk.pos, true) : y;
    if (auto v = literal_value(y)) return *v ? lit(blk.pos, true) : x;
    return bind(blk, mk(blk.pos, surface::If{x, lit(blk.pos, true), y}, SType::boolean()));
  }

  SExprPtr iff_(Block& blk, const SExprPtr& x, const SExprPtr& y) {
    if (auto v = literal_value(x)) return *v ? y : not_(blk, y);
    if (auto v = literal_value(y)) return *v ? x : not_(blk, x);
    SExprPtr ny = not_(blk, y);
    return bind(blk, mk(blk.pos, surface::If{x, y, ny}, SType::boolean()));
  }

  SExprPtr xor_(Block& blk, const SExprPtr& x, const SExprPtr& y) {
    if (auto v = literal_value(x)) return *v ? not_(blk, y) : y;
    if (auto v = literal_value(y)) return *v ? not_(blk, x) : x;
    SExprPtr ny = not_(blk, y);
    return bind(blk, mk(blk.pos, surface::If{x, ny, y}, SType::boolean()));
  }

  // Boolean leaves of an atomic expression, in preorder.
  void leaves(Block& blk, const SExprPtr& x, std::vector<SExprPtr>& out) {
    const SType& t = *x->type;
    if (t.is_bool()) {
      out.push_back(x);
      return;
    }
    if (const auto* tup = x->as<surface::Tuple>()) {
      leaves(blk, tup->first, out);
      leaves(blk, tup->second, out);
      return;
    }
    SExprPtr a = bind(blk, mk(blk.pos, surface::Fst{x}, t.first()), "f");
    SExprPtr b = bind(blk, mk(blk.pos, surface::Snd{x}, t.second()), "s");
    leaves(blk, a, out);
    leaves(blk, b, out);
  }

  // Rebuilds a right-nested bit tuple from MSB-first bits.
  static SExprPtr bit_tuple(SourcePos pos, const std::vector<SExprPtr>& bits) {
    SExprPtr acc = bits.back();
    for (std::size_t i = bits.size() - 1; i-- > 0;)
      acc = mk(pos, surface::Tuple{bits[i], acc}, SType::pair(*bits[i]->type, *acc->type));
    return acc;
  }

  static SExprPtr int_const(SourcePos pos, std::uint64_t n, int width) {
    std::vector<SExprPtr> bits;
    for (int i = width - 1; i >= 0; --i) bits.push_back(lit(pos, (n >> i) & 1u));
    return bit_tuple(pos, bits);
  }

  SExprPtr less_than(Block& blk, const std::vector<SExprPtr>& a, const std::vector<SExprPtr>& b) {
    SExprPtr lt = lit(blk.pos, false);
    for (std::size_t i = a.size(); i-- > 0;) {
      SExprPtr strict = and_(blk, not_(blk, a[i]), b[i]);
      SExprPtr keep = and_(blk, iff_(blk, a[i], b[i]), lt);
      lt = or_(blk, strict, keep);
    }
    return lt;
  }

  SExprPtr add(Block& blk, const std::vector<SExprPtr>& a, std::vector<SExprPtr> b, bool subtract) {
    SExprPtr carry = lit(blk.pos, subtract);
    if (subtract)
      for (auto& bit : b) bit = not_(blk, bit);
    std::vector<SExprPtr> sum(a.size());
    for (std::size_t i = a.size(); i-- > 0;) {
      SExprPtr half = xor_(blk, a[i], b[i]);
      sum[i] = xor_(blk, half, carry);
      if (i > 0) carry = or_(blk, and_(blk, a[i], b[i]), and_(blk, carry, half));
    }
    return bit_tuple(blk.pos, sum);
  }

  SExprPtr range(SourcePos pos, std::uint64_t lo, std::uint64_t hi, int width, bool nondet) {
    const std::uint64_t n = hi - lo;
    if (n == 1) return int_const(pos, lo, width);
    const std::uint64_t k = n / 2;
    SExprPtr guard = nondet ? mk(pos, surface::NFlip{}, SType::boolean())
                            : mk(pos, surface::Flip{Rational(k, n)}, SType::boolean());
    SExprPtr a = range(pos, lo, lo + k, width, nondet);
    SExprPtr b = range(pos, lo + k, hi, width, nondet);
    SType t = *a->type;
    return mk(pos, surface::If{guard, a, b}, t);
  }

  SFunction function(const SFunction& f) {
    SFunction g{f.pos, f.name, {}, from_ty(f.return_type.lower()), nullptr};
    SExprPtr body = expr(f.body);
    if (f.params.size() == 1) {
      g.params.push_back({f.params[0].name, from_ty(f.params[0].type.lower())});
    } else if (f.params.empty()) {
      g.params.push_back({fresh("unit"), SType::boolean()});
    } else {
      std::string arg = fresh("args");
      SType whole = from_ty(f.params.back().type.lower());
      for (std::size_t i = f.params.size() - 1; i-- > 0;)
        whole = SType::pair(from_ty(f.params[i].type.lower()), whole);
      g.params.push_back({arg, whole});
      Block blk{f.pos, {}};
      SExprPtr rest = mk(f.pos, surface::Var{arg}, whole);
      for (std::size_t i = 0; i < f.params.size(); ++i) {
        const bool last = i + 1 == f.params.size();
        SType rt = *rest->type;
        SExprPtr part = last ? rest : mk(f.pos, surface::Fst{rest}, rt.first());
        blk.binds.emplace_back(f.params[i].name, part);
        if (!last) rest = bind(blk, mk(f.pos, surface::Snd{rest}, rt.second()), "rest");
      }
      body = finish(blk, body);
    }
    g.body = body;
    return g;
  }

  SExprPtr expr(const SExprPtr& e) {
    using namespace surface;
    const SourcePos pos = e->pos;
    const SType lowered = from_ty(e->type->lower());
    return std::visit(
        [&](const auto& n) -> SExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, BoolLit> || std::is_same_v<T, Flip> || std::is_same_v<T, NFlip> ||
                        std::is_same_v<T, Var>) {
            return mk(pos, n, lowered);
          } else if constexpr (std::is_same_v<T, IntLit>) {
            return int_const(pos, n.value, e->type->width());
          } else if constexpr (std::is_same_v<T, Uniform>) {
            return range(pos, n.lo, n.hi, e->type->width(), false);
          } else if constexpr (std::is_same_v<T, Choose>) {
            return range(pos, n.lo, n.hi, e->type->width(), true);
          } else if constexpr (std::is_same_v<T, Tuple>) {
            return mk(pos, Tuple{expr(n.first), expr(n.second)}, lowered);
          } else if constexpr (std::is_same_v<T, Fst>) {
            return mk(pos, Fst{expr(n.arg)}, lowered);
          } else if constexpr (std::is_same_v<T, Snd>) {
            return mk(pos, Snd{expr(n.arg)}, lowered);
          } else if constexpr (std::is_same_v<T, Observe>) {
            return mk(pos, Observe{expr(n.arg)}, lowered);
          } else if constexpr (std::is_same_v<T, If>) {
            return mk(pos, If{expr(n.cond), expr(n.then_branch), expr(n.else_branch)}, lowered);
          } else if constexpr (std::is_same_v<T, Let>) {
            return mk(pos, Let{n.name, std::nullopt, expr(n.bound), expr(n.body)}, lowered);
          } else if constexpr (std::is_same_v<T, Call>) {
            SExprPtr arg;
            if (n.args.empty()) {
              arg = lit(pos, true);
            } else {
              arg = expr(n.args.back());
              for (std::size_t i = n.args.size() - 1; i-- > 0;) {
                SExprPtr a = expr(n.args[i]);
                arg = mk(n.args[i]->pos, Tuple{a, arg}, SType::pair(*a->type, *arg->type));
              }
            }
            return mk(pos, Call{n.callee, {arg}}, lowered);
          } else if constexpr (std::is_same_v<T, Not>) {
            return mk(pos, If{expr(n.arg), lit(pos, false), lit(pos, true)}, lowered);
          } else if constexpr (std::is_same_v<T, Binary>) {
            Block blk{pos, {}};
            SExprPtr a = bind(blk, expr(n.lhs), "l");
            SExprPtr b = bind(blk, expr(n.rhs), "r");
            return finish(blk, binary(blk, n.op, a, b));
          }
        },
        e->node);
  }

  SExprPtr binary(Block& blk, surface::BinOp op, const SExprPtr& a, const SExprPtr& b) {
    using surface::BinOp;
    switch (op) {
      case BinOp::And: return and_(blk, a, b);
      case BinOp::Or: return or_(blk, a, b);
      case BinOp::Xor: return xor_(blk, a, b);
      case BinOp::Iff: return iff_(blk, a, b);
      default: break;
    }
    std::vector<SExprPtr> la, lb;
    leaves(blk, a, la);
    leaves(blk, b, lb);
    switch (op) {
      case BinOp::Eq:
      case BinOp::Neq: {
        SExprPtr acc = lit(blk.pos, true);
        for (std::size_t i = 0; i < la.size(); ++i) acc = and_(blk, acc, iff_(blk, la[i], lb[i]));
        return op == BinOp::Eq ? acc : not_(blk, acc);
      }
      case BinOp::Lt: return less_than(blk, la, lb);
      case BinOp::Gt: return less_than(blk, lb, la);
      case BinOp::Le: return not_(blk, less_than(blk, lb, la));
      case BinOp::Ge: return not_(blk, less_than(blk, la, lb));
      case BinOp::Add: return add(blk, la, lb, false);
      case BinOp::Sub: return add(blk, la, lb, true);
      default: break;
    }
    throw Error("unhandled operator");
  }

  int counter_ = 0;
};

}  // namespace

SurfaceProgram desugar(const SurfaceProgram& p) {
  for (const auto& f : p.functions)
    if (!f.body->type) throw Error("desugar requires a type-checked program");
  if (!p.main->type) throw Error("desugar requires a type-checked program");
  return Desugarer().run(p);
}

}  // namespace nodice
