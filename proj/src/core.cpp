#include "nodice/core.hpp"

#include <unordered_map>

namespace nodice {

const Function* CoreProgram::find(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

namespace {

SType surface_from_ty(const Ty& t) {
  if (t.is_bool()) return SType::boolean();
  return SType::pair(surface_from_ty(t.first()), surface_from_ty(t.second()));
}

class CoreChecker {
 public:
  explicit CoreChecker(const CoreProgram& p) : p_(p) {}

  void run() {
    for (std::size_t i = 0; i < p_.functions.size(); ++i) {
      const Function& f = p_.functions[i];
      for (std::size_t j = 0; j < i; ++j)
        if (p_.functions[j].name == f.name) fail(f.body->pos, "duplicate function '" + f.name + "'");
      Env env{{f.param, f.param_type}};
      visible_ = i;
      expr(*f.body, env);
      if (!(f.body->ty == f.return_type)) fail(f.body->pos, "function '" + f.name + "' body type mismatch");
    }
    visible_ = p_.functions.size();
    Env env;
    expr(*p_.main, env);
  }

 private:
  using Env = std::vector<std::pair<std::string, Ty>>;

  [[noreturn]] static void fail(SourcePos pos, const std::string& msg) { throw ProgramError(pos, msg); }

  Ty atom(const Atom& a, const Env& env, SourcePos pos) {
    if (!a.is_var()) return a.constant().type();
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == a.name()) return it->second;
    fail(pos, "unbound variable '" + a.name() + "'");
  }

  void expect(const Ty& got, const Ty& want, SourcePos pos, const char* what) {
    if (!(got == want))
      fail(pos, std::string(what) + ": expected " + want.to_string() + ", found " + got.to_string());
  }

  void expr(const Expr& e, Env& env) {
    using namespace core;
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AtomE>) {
            expect(atom(n.atom, env, e.pos), e.ty, e.pos, "atom");
          } else if constexpr (std::is_same_v<T, TupleE>) {
            expect(Ty::pair(atom(n.first, env, e.pos), atom(n.second, env, e.pos)), e.ty, e.pos, "tuple");
          } else if constexpr (std::is_same_v<T, FstE> || std::is_same_v<T, SndE>) {
            Ty a = atom(n.arg, env, e.pos);
            if (!a.is_pair()) fail(e.pos, "projection of a non-tuple");
            expect(std::is_same_v<T, FstE> ? a.first() : a.second(), e.ty, e.pos, "projection");
          } else if constexpr (std::is_same_v<T, IfE>) {
            expect(atom(n.guard, env, e.pos), Ty::boolean(), e.pos, "if guard");
            expr(*n.then_branch, env);
            expr(*n.else_branch, env);
            expect(n.then_branch->ty, e.ty, n.then_branch->pos, "then branch");
            expect(n.else_branch->ty, e.ty, n.else_branch->pos, "else branch");
          } else if constexpr (std::is_same_v<T, LetE>) {
            expr(*n.bound, env);
            env.emplace_back(n.name, n.bound->ty);
            expr(*n.body, env);
            env.pop_back();
            expect(n.body->ty, e.ty, e.pos, "let body");
          } else if constexpr (std::is_same_v<T, CallE>) {
            const Function* f = nullptr;
            for (std::size_t i = 0; i < visible_; ++i)
              if (p_.functions[i].name == n.callee) f = &p_.functions[i];
            if (!f) fail(e.pos, "call to undefined or later-defined function '" + n.callee + "'");
            expect(atom(n.arg, env, e.pos), f->param_type, e.pos, "call argument");
            expect(f->return_type, e.ty, e.pos, "call result");
          } else if constexpr (std::is_same_v<T, FlipE>) {
            if (n.theta < 0 || n.theta > 1) fail(e.pos, "probability out of range");
            expect(e.ty, Ty::boolean(), e.pos, "flip");
          } else if constexpr (std::is_same_v<T, NFlipE>) {
            expect(e.ty, Ty::boolean(), e.pos, "nflip");
          } else if constexpr (std::is_same_v<T, ObserveE>) {
            expect(atom(n.arg, env, e.pos), Ty::boolean(), e.pos, "observe expects Bool");
            expect(e.ty, Ty::boolean(), e.pos, "observe");
          }
        },
        e.node);
  }

  const CoreProgram& p_;
  std::size_t visible_ = 0;
};

void print_into(const Expr& e, std::string& out);

void print_nested(const Expr& e, std::string& out) {
  if (e.as<core::LetE>() || e.as<core::IfE>()) {
    out += "(";
    print_into(e, out);
    out += ")";
  } else {
    print_into(e, out);
  }
}

void print_into(const Expr& e, std::string& out) {
  using namespace core;
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AtomE>) {
          out += n.atom.to_string();
        } else if constexpr (std::is_same_v<T, TupleE>) {
          out += "(" + n.first.to_string() + ", " + n.second.to_string() + ")";
        } else if constexpr (std::is_same_v<T, FstE>) {
          out += "fst " + n.arg.to_string();
        } else if constexpr (std::is_same_v<T, SndE>) {
          out += "snd " + n.arg.to_string();
        } else if constexpr (std::is_same_v<T, IfE>) {
          out += "if " + n.guard.to_string() + " then ";
          print_nested(*n.then_branch, out);
          out += " else ";
          print_into(*n.else_branch, out);
        } else if constexpr (std::is_same_v<T, LetE>) {
          out += "let " + n.name + " = ";
          print_nested(*n.bound, out);
          out += " in ";
          print_into(*n.body, out);
        } else if constexpr (std::is_same_v<T, CallE>) {
          out += n.callee + "(" + n.arg.to_string() + ")";
        } else if constexpr (std::is_same_v<T, FlipE>) {
          out += "flip(" + rational_to_string(n.theta) + ")";
        } else if constexpr (std::is_same_v<T, NFlipE>) {
          out += "nflip()";
        } else if constexpr (std::is_same_v<T, ObserveE>) {
          out += "observe " + n.arg.to_string();
        }
      },
      e.node);
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a + b < a ? UINT64_MAX : a + b; }

std::uint64_t flips_in(const Expr& e, const std::unordered_map<std::string, std::uint64_t>& fn) {
  using namespace core;
  if (e.as<FlipE>() || e.as<NFlipE>()) return 1;
  if (const auto* i = e.as<IfE>()) return sat_add(flips_in(*i->then_branch, fn), flips_in(*i->else_branch, fn));
  if (const auto* l = e.as<LetE>()) return sat_add(flips_in(*l->bound, fn), flips_in(*l->body, fn));
  if (const auto* c = e.as<CallE>()) {
    auto it = fn.find(c->callee);
    return it == fn.end() ? 0 : it->second;
  }
  return 0;
}

}  // namespace

SType CoreProgram::surface_output_type() const {
  if (output_type) return *output_type;
  return surface_from_ty(main->ty);
}

void check_core(const CoreProgram& p) { CoreChecker(p).run(); }

bool is_well_formed(const CoreProgram& p) {
  try {
    check_core(p);
    return true;
  } catch (const ProgramError&) {
    return false;
  }
}

std::string print_core(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

std::string print_core(const CoreProgram& p) {
  std::string out;
  for (const auto& f : p.functions) {
    out += "fun " + f.name + "(" + f.param + ": " + f.param_type.to_string() + "): " + f.return_type.to_string() +
           " { ";
    print_into(*f.body, out);
    out += " }\n";
  }
  print_into(*p.main, out);
  return out;
}

std::size_t count_flips(const CoreProgram& p) {
  std::unordered_map<std::string, std::uint64_t> fn;
  for (const auto& f : p.functions) fn[f.name] = flips_in(*f.body, fn);
  return static_cast<std::size_t>(flips_in(*p.main, fn));
}

}  // namespace nodice
