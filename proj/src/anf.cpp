#include "nodice/frontend.hpp"

#include <functional>

namespace nodice {

namespace {

class Normalizer {
 public:
  CoreProgram run(const SurfaceProgram& p) {
    CoreProgram out;
    for (const auto& f : p.functions) {
      if (f.params.size() != 1) throw Error("a_normalize requires a desugared program");
      out.functions.push_back(
          Function{f.name, f.params[0].name, f.params[0].type.lower(), f.return_type.lower(), norm(f.body)});
    }
    out.main = norm(p.main);
    out.output_type = p.output_type ? p.output_type : p.main->type;
    return out;
  }

 private:
  using Cont = std::function<ExprPtr(const Atom&)>;

  static Ty type_of(const SExprPtr& e) {
    if (!e->type) throw Error("a_normalize requires a type-checked program");
    return e->type->lower();
  }

  // Constant tuples fold into a single value atom.
  static std::optional<Value> constant(const SExprPtr& e) {
    if (const auto* b = e->as<surface::BoolLit>()) return Value::boolean(b->value);
    if (const auto* t = e->as<surface::Tuple>()) {
      auto a = constant(t->first);
      if (!a) return std::nullopt;
      auto b = constant(t->second);
      if (!b) return std::nullopt;
      return Value::pair(*a, *b);
    }
    return std::nullopt;
  }

  ExprPtr atomize(const SExprPtr& e, const Cont& k) {
    if (const auto* v = e->as<surface::Var>()) return k(Atom::var(v->name));
    if (auto c = constant(e)) return k(Atom::value(*c));
    ExprPtr bound = norm(e);
    std::string name = "$a" + std::to_string(counter_++);
    ExprPtr body = k(Atom::var(name));
    Ty ty = body->ty;
    return make_expr(ty, e->pos, core::LetE{name, bound, body});
  }

  ExprPtr norm(const SExprPtr& e) {
    using namespace surface;
    const Ty ty = type_of(e);
    const SourcePos pos = e->pos;
    if (auto c = constant(e)) return make_expr(ty, pos, core::AtomE{Atom::value(*c)});
    return std::visit(
        [&](const auto& n) -> ExprPtr {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, Var>) {
            return make_expr(ty, pos, core::AtomE{Atom::var(n.name)});
          } else if constexpr (std::is_same_v<T, Tuple>) {
            return atomize(n.first, [&](const Atom& a) {
              return atomize(n.second, [&](const Atom& b) { return make_expr(ty, pos, core::TupleE{a, b}); });
            });
          } else if constexpr (std::is_same_v<T, Fst>) {
            return atomize(n.arg, [&](const Atom& a) { return make_expr(ty, pos, core::FstE{a}); });
          } else if constexpr (std::is_same_v<T, Snd>) {
            return atomize(n.arg, [&](const Atom& a) { return make_expr(ty, pos, core::SndE{a}); });
          } else if constexpr (std::is_same_v<T, Observe>) {
            return atomize(n.arg, [&](const Atom& a) { return make_expr(ty, pos, core::ObserveE{a}); });
          } else if constexpr (std::is_same_v<T, If>) {
            return atomize(n.cond, [&](const Atom& g) {
              ExprPtr t = norm(n.then_branch);
              ExprPtr f = norm(n.else_branch);
              return make_expr(ty, pos, core::IfE{g, t, f});
            });
          } else if constexpr (std::is_same_v<T, Let>) {
            ExprPtr bound = norm(n.bound);
            ExprPtr body = norm(n.body);
            return make_expr(ty, pos, core::LetE{n.name, bound, body});
          } else if constexpr (std::is_same_v<T, Call>) {
            if (n.args.size() != 1) throw Error("a_normalize requires a desugared program");
            return atomize(n.args[0], [&](const Atom& a) { return make_expr(ty, pos, core::CallE{n.callee, a}); });
          } else if constexpr (std::is_same_v<T, Flip>) {
            return make_expr(ty, pos, core::FlipE{n.theta});
          } else if constexpr (std::is_same_v<T, NFlip>) {
            return make_expr(ty, pos, core::NFlipE{});
          } else {
            throw ProgramError(pos, "a_normalize requires a desugared program");
          }
        },
        e->node);
  }

  int counter_ = 0;
};

}  // namespace

CoreProgram a_normalize(const SurfaceProgram& p) { return Normalizer().run(p); }

}  // namespace nodice
