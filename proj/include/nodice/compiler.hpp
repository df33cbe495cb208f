#pragma once

#include "nodice/core.hpp"
#include "nodice/deadline.hpp"
#include "nodice/dd.hpp"

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace nodice {

struct FlipEntry {
  Level level;
  /// nullopt marks a nondeterministic flip.
  std::optional<Rational> theta;
  SourcePos origin;

  bool nondet() const { return !theta.has_value(); }
  friend bool operator==(const FlipEntry&, const FlipEntry&) = default;
};

using Trace = std::vector<FlipEntry>;

/// Model formulas, accepting formula and flip trace of an expression.
struct CompiledTriple {
  FormulaTuple model;
  BddRef accept;
  Trace trace;
};

struct CompileOptions {
  /// Compile each call by re-compiling the callee body in place instead of
  /// instantiating a shared template.
  bool inline_calls = false;
  Deadline deadline;
};

/// Compiles core expressions into a caller-owned store. Levels are allocated
/// from the store's counter in evaluation order, so trace position i holds
/// level i when compilation starts on an empty store.
class Compiler {
 public:
  using Env = std::vector<std::pair<std::string, FormulaTuple>>;

  Compiler(DDStore& store, const CoreProgram& program, CompileOptions options = {});

  CompiledTriple compile_expr(Env& env, const Expr& e);
  CompiledTriple compile_main();

  /// Number of template instantiations performed so far.
  std::size_t instantiations() const { return instantiations_; }

 private:
  struct Template {
    Level base;
    Level width;
    std::vector<Level> params;
    CompiledTriple body;
  };

  FormulaTuple atom(const Env& env, const Atom& a) const;
  CompiledTriple call(Env& env, const std::string& callee, const Atom& arg);

  DDStore& store_;
  const CoreProgram& program_;
  CompileOptions options_;
  std::unordered_map<std::string, Template> templates_;
  std::size_t instantiations_ = 0;
};

/// Compiles the main expression of `p` into `store`.
CompiledTriple compile_program(DDStore& store, const CoreProgram& p, CompileOptions options = {});

/// Rewrites p into a Bool program that is true exactly when p returns v.
CoreProgram boolean_reduce(const CoreProgram& p, const Value& v);

/// All values of the type, T-first; refuses types wider than `max_bits`.
std::vector<Value> enumerate_output_values(const Ty& ty, std::size_t max_bits = 20);

/// Text dump: model, accept and "f1:0.3, f2:n" trace.
std::string dump_triple(const DDStore& store, const CompiledTriple& t);
std::string trace_to_string(const Trace& t);

}  // namespace nodice
