#include "nodice/compiler.hpp"

namespace nodice {

Compiler::Compiler(DDStore& store, const CoreProgram& program, CompileOptions options)
    : store_(store), program_(program), options_(options) {}

FormulaTuple Compiler::atom(const Env& env, const Atom& a) const {
  if (!a.is_var()) return store_.constant(a.constant());
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == a.name()) return it->second;
  throw Error("compiler: unbound variable '" + a.name() + "'");
}

CompiledTriple Compiler::compile_main() {
  Env env;
  return compile_expr(env, *program_.main);
}

CompiledTriple Compiler::compile_expr(Env& env, const Expr& e) {
  using namespace core;
  return std::visit(
      [&](const auto& n) -> CompiledTriple {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, AtomE>) {
          return {atom(env, n.atom), store_.bdd_true(), {}};
        } else if constexpr (std::is_same_v<T, TupleE>) {
          return {FormulaTuple::pair(atom(env, n.first), atom(env, n.second)), store_.bdd_true(), {}};
        } else if constexpr (std::is_same_v<T, FstE>) {
          return {atom(env, n.arg).first(), store_.bdd_true(), {}};
        } else if constexpr (std::is_same_v<T, SndE>) {
          return {atom(env, n.arg).second(), store_.bdd_true(), {}};
        } else if constexpr (std::is_same_v<T, FlipE> || std::is_same_v<T, NFlipE>) {
          const Level l = store_.allocate_levels(1);
          FlipEntry entry{l, std::nullopt, e.pos};
          if constexpr (std::is_same_v<T, FlipE>) entry.theta = n.theta;
          return {FormulaTuple::leaf(store_.mk_var(l)), store_.bdd_true(), {entry}};
        } else if constexpr (std::is_same_v<T, ObserveE>) {
          return {FormulaTuple::leaf(store_.bdd_true()), atom(env, n.arg).bool_leaf(), {}};
        } else if constexpr (std::is_same_v<T, IfE>) {
          const BddRef g = atom(env, n.guard).bool_leaf();
          CompiledTriple t = compile_expr(env, *n.then_branch);
          CompiledTriple f = compile_expr(env, *n.else_branch);
          CompiledTriple r{store_.ite(g, t.model, f.model), store_.ite(g, t.accept, f.accept), std::move(t.trace)};
          r.trace.insert(r.trace.end(), f.trace.begin(), f.trace.end());
          return r;
        } else if constexpr (std::is_same_v<T, LetE>) {
          check_deadline(options_.deadline);
          CompiledTriple b = compile_expr(env, *n.bound);
          env.emplace_back(n.name, b.model);
          CompiledTriple body;
          try {
            body = compile_expr(env, *n.body);
          } catch (...) {
            env.pop_back();
            throw;
          }
          env.pop_back();
          CompiledTriple r{body.model, store_.apply(BoolOp::And, b.accept, body.accept), std::move(b.trace)};
          r.trace.insert(r.trace.end(), body.trace.begin(), body.trace.end());
          return r;
        } else if constexpr (std::is_same_v<T, CallE>) {
          return call(env, n.callee, n.arg);
        }
      },
      e.node);
}

CompiledTriple Compiler::call(Env& env, const std::string& callee, const Atom& arg) {
  const Function* f = program_.find(callee);
  if (!f) throw Error("compiler: unknown function '" + callee + "'");
  FormulaTuple actual = atom(env, arg);
  ++instantiations_;

  if (options_.inline_calls) {
    Env inner{{f->param, actual}};
    return compile_expr(inner, *f->body);
  }

  auto it = templates_.find(callee);
  if (it == templates_.end()) {
    // First call: compile the body in place over fresh placeholder levels.
    const auto width = static_cast<Level>(f->param_type.width());
    const Level first = store_.allocate_placeholders(width);
    FormulaTuple formal{f->param_type, {}};
    std::vector<Level> params;
    for (Level i = 0; i < width; ++i) {
      params.push_back(first + i);
      formal.leaves.push_back(store_.mk_var(first + i));
    }
    const Level base = store_.level_count();
    Env inner{{f->param, formal}};
    CompiledTriple body = compile_expr(inner, *f->body);
    it = templates_.emplace(callee, Template{base, store_.level_count() - base, params, body}).first;
  } else {
    // Later calls: copy the template onto a fresh block of levels.
    const Template& tpl = it->second;
    const Level start = store_.allocate_levels(tpl.width);
    const std::int64_t offset = std::int64_t{start} - std::int64_t{tpl.base};
    CompiledTriple inst{store_.shift_levels(tpl.body.model, offset), store_.shift_levels(tpl.body.accept, offset),
                        tpl.body.trace};
    for (auto& entry : inst.trace) entry.level = static_cast<Level>(entry.level + offset);
    std::vector<std::pair<Level, BddRef>> subst;
    for (std::size_t i = 0; i < tpl.params.size(); ++i) subst.emplace_back(tpl.params[i], actual.leaves[i]);
    return {store_.compose(inst.model, subst), store_.compose(inst.accept, subst), std::move(inst.trace)};
  }
  const Template& tpl = it->second;
  std::vector<std::pair<Level, BddRef>> subst;
  for (std::size_t i = 0; i < tpl.params.size(); ++i) subst.emplace_back(tpl.params[i], actual.leaves[i]);
  return {store_.compose(tpl.body.model, subst), store_.compose(tpl.body.accept, subst), tpl.body.trace};
}

CompiledTriple compile_program(DDStore& store, const CoreProgram& p, CompileOptions options) {
  Compiler c(store, p, options);
  return c.compile_main();
}

// ---------------------------------------------------------------- boolean reduction

namespace {

class EqBuilder {
 public:
  ExprPtr build(const CoreProgram& p, const Value& v) {
    const SourcePos pos = p.main->pos;
    std::vector<std::pair<std::string, ExprPtr>> binds;
    const std::string x = fresh();
    binds.emplace_back(x, p.main);
    std::vector<Atom> leaves;
    collect(Atom::var(x), p.main->ty, pos, binds, leaves);
    const std::vector<bool> bits = v.bits();
    std::optional<Atom> acc;
    for (std::size_t i = 0; i < leaves.size(); ++i) {
      Atom bit = leaves[i];
      if (!bits[i]) bit = bind(binds, not_expr(bit, pos));
      if (!acc) {
        acc = bit;
      } else {
        acc = bind(binds, make_expr(Ty::boolean(), pos,
                                    core::IfE{*acc, atom_expr(bit, pos), atom_expr(Atom::value(Value::f()), pos)}));
      }
    }
    ExprPtr body = atom_expr(*acc, pos);
    for (auto it = binds.rbegin(); it != binds.rend(); ++it)
      body = make_expr(Ty::boolean(), pos, core::LetE{it->first, it->second, body});
    return body;
  }

 private:
  std::string fresh() { return "$br" + std::to_string(counter_++); }

  static ExprPtr atom_expr(const Atom& a, SourcePos pos) {
    return make_expr(Ty::boolean(), pos, core::AtomE{a});
  }

  static ExprPtr not_expr(const Atom& a, SourcePos pos) {
    return make_expr(Ty::boolean(), pos,
                     core::IfE{a, atom_expr(Atom::value(Value::f()), pos), atom_expr(Atom::value(Value::t()), pos)});
  }

  Atom bind(std::vector<std::pair<std::string, ExprPtr>>& binds, ExprPtr e) {
    std::string name = fresh();
    binds.emplace_back(name, std::move(e));
    return Atom::var(name);
  }

  void collect(const Atom& a, const Ty& ty, SourcePos pos, std::vector<std::pair<std::string, ExprPtr>>& binds,
               std::vector<Atom>& out) {
    if (ty.is_bool()) {
      out.push_back(a);
      return;
    }
    Atom first = bind(binds, make_expr(ty.first(), pos, core::FstE{a}));
    Atom second = bind(binds, make_expr(ty.second(), pos, core::SndE{a}));
    collect(first, ty.first(), pos, binds, out);
    collect(second, ty.second(), pos, binds, out);
  }

  int counter_ = 0;
};

}  // namespace

CoreProgram boolean_reduce(const CoreProgram& p, const Value& v) {
  if (!v.has_type(p.type()))
    throw Error("value " + v.to_string() + " does not have the program's type " + p.type().to_string());
  CoreProgram out;
  out.functions = p.functions;
  out.output_type = SType::boolean();
  if (p.type().is_bool() && v.as_bool()) {
    out.main = p.main;
    return out;
  }
  out.main = EqBuilder().build(p, v);
  return out;
}

std::vector<Value> enumerate_output_values(const Ty& ty, std::size_t max_bits) {
  return enumerate_values(ty, max_bits);
}

std::string trace_to_string(const Trace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) out += ", ";
    out += DDStore::level_name(t[i].level) + ":" + (t[i].theta ? rational_to_literal(*t[i].theta) : "n");
  }
  return out;
}

std::string dump_triple(const DDStore& store, const CompiledTriple& t) {
  return "model:  " + store.to_string(t.model) + "\naccept: " + store.to_string(t.accept) +
         "\ntrace:  " + trace_to_string(t.trace) + "\n";
}

}  // namespace nodice
