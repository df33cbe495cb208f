#include "nodice/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <map>
#include <unordered_map>

namespace nodice {

namespace {

using Env = std::vector<std::pair<std::string, Value>>;

Value lookup(const Env& env, const Atom& a) {
  if (!a.is_var()) return a.constant();
  for (auto it = env.rbegin(); it != env.rend(); ++it)
    if (it->first == a.name()) return it->second;
  throw Error("oracle: unbound variable '" + a.name() + "'");
}

const Function& callee(const CoreProgram& p, const std::string& name) {
  const Function* f = p.find(name);
  if (!f) throw Error("oracle: unknown function '" + name + "'");
  return *f;
}

// ---------------------------------------------------------------- tree builder

class TreeBuilder {
 public:
  using Cont = std::function<std::uint32_t(const Value&, const Rational&)>;

  explicit TreeBuilder(const CoreProgram& p) : p_(p) {}

  ExecTree build() {
    Env env;
    tree_.root = eval(*p_.main, env, Rational(1), [&](const Value& v, const Rational& w) { return leaf(v, w); });
    return std::move(tree_);
  }

 private:
  std::uint32_t push(ExecNode n) {
    tree_.nodes.push_back(std::move(n));
    return static_cast<std::uint32_t>(tree_.nodes.size() - 1);
  }

  std::uint32_t leaf(Outcome o, const Rational& w) {
    ExecNode n;
    n.outcome = std::move(o);
    n.weight = w;
    return push(std::move(n));
  }

  std::uint32_t eval(const Expr& e, const Env& env, const Rational& w, const Cont& k) {
    using namespace core;
    return std::visit(
        [&](const auto& n) -> std::uint32_t {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AtomE>) {
            return k(lookup(env, n.atom), w);
          } else if constexpr (std::is_same_v<T, TupleE>) {
            return k(Value::pair(lookup(env, n.first), lookup(env, n.second)), w);
          } else if constexpr (std::is_same_v<T, FstE>) {
            return k(lookup(env, n.arg).first(), w);
          } else if constexpr (std::is_same_v<T, SndE>) {
            return k(lookup(env, n.arg).second(), w);
          } else if constexpr (std::is_same_v<T, FlipE>) {
            ExecNode node;
            node.kind = ExecNode::Kind::Prob;
            node.theta = n.theta;
            node.then_child = k(Value::t(), w * n.theta);
            node.else_child = k(Value::f(), w * (Rational(1) - n.theta));
            return push(std::move(node));
          } else if constexpr (std::is_same_v<T, NFlipE>) {
            ExecNode node;
            node.kind = ExecNode::Kind::Ndet;
            node.then_child = k(Value::t(), w);
            node.else_child = k(Value::f(), w);
            return push(std::move(node));
          } else if constexpr (std::is_same_v<T, ObserveE>) {
            if (!lookup(env, n.arg).as_bool()) return leaf(std::nullopt, w);
            return k(Value::t(), w);
          } else if constexpr (std::is_same_v<T, IfE>) {
            const bool g = lookup(env, n.guard).as_bool();
            return eval(g ? *n.then_branch : *n.else_branch, env, w, k);
          } else if constexpr (std::is_same_v<T, LetE>) {
            return eval(*n.bound, env, w, [&](const Value& v, const Rational& w2) {
              Env inner = env;
              inner.emplace_back(n.name, v);
              return eval(*n.body, inner, w2, k);
            });
          } else {
            const Function& f = callee(p_, n.callee);
            Env inner{{f.param, lookup(env, n.arg)}};
            return eval(*f.body, inner, w, k);
          }
        },
        e.node);
  }

  const CoreProgram& p_;
  ExecTree tree_;
};

// ---------------------------------------------------------------- hull

Rational cross(const ParetoPoint& o, const ParetoPoint& a, const ParetoPoint& b) {
  return (a.num - o.num) * (b.den - o.den) - (a.den - o.den) * (b.num - o.num);
}

bool point_less(const ParetoPoint& a, const ParetoPoint& b) {
  if (a.num != b.num) return a.num < b.num;
  return a.den < b.den;
}

ParetoSet minkowski(const ParetoSet& a, const ParetoSet& b) {
  ParetoSet out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a)
    for (const auto& y : b) out.push_back({x.num + y.num, x.den + y.den});
  return out;
}

void dedupe(ParetoSet& s) {
  std::sort(s.begin(), s.end(), point_less);
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

// ---------------------------------------------------------------- leaf counting

class LeafCounter {
 public:
  using Dist = std::map<Outcome, BigInt>;

  explicit LeafCounter(const CoreProgram& p) : p_(p) {}

  BigInt count() {
    BigInt total = 0;
    for (const auto& [o, c] : eval(*p_.main, Env{})) total += c;
    return total;
  }

 private:
  // Free variables of e, sorted.
  const std::vector<std::string>& free_vars(const Expr& e) {
    if (auto it = free_.find(&e); it != free_.end()) return it->second;
    using namespace core;
    std::vector<std::string> fv;
    auto atom = [&](const Atom& a) {
      if (a.is_var()) fv.push_back(a.name());
    };
    std::visit(
        [&](const auto& n) {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AtomE>) {
            atom(n.atom);
          } else if constexpr (std::is_same_v<T, TupleE>) {
            atom(n.first);
            atom(n.second);
          } else if constexpr (std::is_same_v<T, FstE> || std::is_same_v<T, SndE> || std::is_same_v<T, ObserveE> ||
                               std::is_same_v<T, CallE>) {
            atom(n.arg);
          } else if constexpr (std::is_same_v<T, IfE>) {
            atom(n.guard);
            for (const auto* b : {&free_vars(*n.then_branch), &free_vars(*n.else_branch)})
              fv.insert(fv.end(), b->begin(), b->end());
          } else if constexpr (std::is_same_v<T, LetE>) {
            const auto& b = free_vars(*n.bound);
            fv.insert(fv.end(), b.begin(), b.end());
            for (const auto& x : free_vars(*n.body))
              if (x != n.name) fv.push_back(x);
          }
        },
        e.node);
    std::sort(fv.begin(), fv.end());
    fv.erase(std::unique(fv.begin(), fv.end()), fv.end());
    return free_.emplace(&e, std::move(fv)).first->second;
  }

  std::string key(const Expr& e, const Env& env) {
    std::string k = std::to_string(reinterpret_cast<std::uintptr_t>(&e));
    for (const auto& x : free_vars(e)) k += "|" + lookup(env, Atom::var(x)).to_string();
    return k;
  }

  static void add(Dist& d, const Outcome& o, const BigInt& c) {
    auto [it, fresh] = d.emplace(o, c);
    if (!fresh) it->second += c;
  }

  Dist eval(const Expr& e, const Env& env) {
    const std::string k = key(e, env);
    if (auto it = memo_.find(k); it != memo_.end()) return it->second;
    Dist d = compute(e, env);
    if (memo_.size() >= kMaxMemo) throw LimitError("execution tree too large to count");
    memo_.emplace(k, d);
    return d;
  }

  Dist compute(const Expr& e, const Env& env) {
    using namespace core;
    return std::visit(
        [&](const auto& n) -> Dist {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AtomE>) {
            return {{lookup(env, n.atom), 1}};
          } else if constexpr (std::is_same_v<T, TupleE>) {
            return {{Value::pair(lookup(env, n.first), lookup(env, n.second)), 1}};
          } else if constexpr (std::is_same_v<T, FstE>) {
            return {{lookup(env, n.arg).first(), 1}};
          } else if constexpr (std::is_same_v<T, SndE>) {
            return {{lookup(env, n.arg).second(), 1}};
          } else if constexpr (std::is_same_v<T, FlipE> || std::is_same_v<T, NFlipE>) {
            return {{Value::t(), 1}, {Value::f(), 1}};
          } else if constexpr (std::is_same_v<T, ObserveE>) {
            if (!lookup(env, n.arg).as_bool()) return {{std::nullopt, 1}};
            return {{Value::t(), 1}};
          } else if constexpr (std::is_same_v<T, IfE>) {
            return eval(lookup(env, n.guard).as_bool() ? *n.then_branch : *n.else_branch, env);
          } else if constexpr (std::is_same_v<T, LetE>) {
            Dist out;
            for (const auto& [o, c] : eval(*n.bound, env)) {
              if (!o) {
                add(out, o, c);
                continue;
              }
              Env inner = env;
              inner.emplace_back(n.name, *o);
              for (const auto& [o2, c2] : eval(*n.body, inner)) add(out, o2, c * c2);
            }
            return out;
          } else {
            const Function& f = callee(p_, n.callee);
            return eval(*f.body, Env{{f.param, lookup(env, n.arg)}});
          }
        },
        e.node);
  }

  static constexpr std::size_t kMaxMemo = 1 << 20;

  const CoreProgram& p_;
  std::unordered_map<std::string, Dist> memo_;
  std::unordered_map<const Expr*, std::vector<std::string>> free_;
};

// ---------------------------------------------------------------- big-step run

class Executor {
 public:
  Executor(const CoreProgram& p, const std::vector<bool>& bits) : p_(p), bits_(bits) {}

  Outcome run() { return eval(*p_.main, Env{}, 0); }

 private:
  std::uint64_t flips(const Expr& e) {
    if (auto it = flips_.find(&e); it != flips_.end()) return it->second;
    using namespace core;
    const std::uint64_t n = std::visit(
        [&](const auto& n) -> std::uint64_t {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, FlipE> || std::is_same_v<T, NFlipE>) {
            return 1;
          } else if constexpr (std::is_same_v<T, IfE>) {
            return flips(*n.then_branch) + flips(*n.else_branch);
          } else if constexpr (std::is_same_v<T, LetE>) {
            return flips(*n.bound) + flips(*n.body);
          } else if constexpr (std::is_same_v<T, CallE>) {
            return flips(*callee(p_, n.callee).body);
          } else {
            return 0;
          }
        },
        e.node);
    flips_.emplace(&e, n);
    return n;
  }

  Outcome eval(const Expr& e, const Env& env, std::uint64_t pos) {
    using namespace core;
    return std::visit(
        [&](const auto& n) -> Outcome {
          using T = std::decay_t<decltype(n)>;
          if constexpr (std::is_same_v<T, AtomE>) {
            return lookup(env, n.atom);
          } else if constexpr (std::is_same_v<T, TupleE>) {
            return Value::pair(lookup(env, n.first), lookup(env, n.second));
          } else if constexpr (std::is_same_v<T, FstE>) {
            return lookup(env, n.arg).first();
          } else if constexpr (std::is_same_v<T, SndE>) {
            return lookup(env, n.arg).second();
          } else if constexpr (std::is_same_v<T, FlipE> || std::is_same_v<T, NFlipE>) {
            if (pos >= bits_.size()) throw Error("assignment is shorter than the program's flip count");
            return Value::boolean(bits_[pos]);
          } else if constexpr (std::is_same_v<T, ObserveE>) {
            if (!lookup(env, n.arg).as_bool()) return std::nullopt;
            return Value::t();
          } else if constexpr (std::is_same_v<T, IfE>) {
            if (lookup(env, n.guard).as_bool()) return eval(*n.then_branch, env, pos);
            return eval(*n.else_branch, env, pos + flips(*n.then_branch));
          } else if constexpr (std::is_same_v<T, LetE>) {
            const Outcome b = eval(*n.bound, env, pos);
            if (!b) return std::nullopt;
            Env inner = env;
            inner.emplace_back(n.name, *b);
            return eval(*n.body, inner, pos + flips(*n.bound));
          } else {
            const Function& f = callee(p_, n.callee);
            return eval(*f.body, Env{{f.param, lookup(env, n.arg)}}, pos);
          }
        },
        e.node);
  }

  const CoreProgram& p_;
  const std::vector<bool>& bits_;
  std::unordered_map<const Expr*, std::uint64_t> flips_;
};

}  // namespace

std::size_t ExecTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const ExecNode& n) { return n.kind == ExecNode::Kind::Leaf; }));
}

std::size_t ExecTree::ndet_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const ExecNode& n) { return n.kind == ExecNode::Kind::Ndet; }));
}

Rational ExecTree::total_weight() const {
  std::function<Rational(std::uint32_t)> go = [&](std::uint32_t i) -> Rational {
    const ExecNode& n = nodes[i];
    if (n.kind == ExecNode::Kind::Leaf) return n.weight;
    const Rational a = go(n.then_child);
    const Rational b = go(n.else_child);
    if (n.kind == ExecNode::Kind::Prob) return a + b;
    if (a != b) throw Error("choice node " + std::to_string(i) + " has branches of different mass");
    return a;
  };
  return go(root);
}

std::size_t oracle_flip_cap() {
  if (const char* s = std::getenv("NODICE_ORACLE_CAP")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(s, &end, 10);
    if (end != s && *end == '\0') return v;
  }
  return 18;
}

ExecTree build_exec_tree(const CoreProgram& p, std::optional<std::size_t> cap) {
  const std::size_t limit = cap.value_or(oracle_flip_cap());
  const std::size_t flips = count_flips(p);
  if (flips > limit)
    throw LimitError("program has " + std::to_string(flips) + " flips, above the oracle cap of " +
                     std::to_string(limit));
  return TreeBuilder(p).build();
}

ParetoSet convex_hull(ParetoSet pts) {
  dedupe(pts);
  if (pts.size() <= 2) return pts;
  ParetoSet hull(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

bool hull_contains(const ParetoSet& set, const ParetoPoint& p) {
  const ParetoSet h = convex_hull(set);
  if (h.empty()) return false;
  if (h.size() == 1) return h[0] == p;
  if (h.size() == 2) {
    if (cross(h[0], h[1], p) != 0) return false;
    return std::min(h[0].num, h[1].num) <= p.num && p.num <= std::max(h[0].num, h[1].num) &&
           std::min(h[0].den, h[1].den) <= p.den && p.den <= std::max(h[0].den, h[1].den);
  }
  for (std::size_t i = 0; i < h.size(); ++i)
    if (cross(h[i], h[(i + 1) % h.size()], p) < 0) return false;
  return true;
}

ParetoSet pareto_set(const ExecTree& tree, const Value& v, bool prune) {
  std::function<ParetoSet(std::uint32_t)> go = [&](std::uint32_t i) -> ParetoSet {
    const ExecNode& n = tree.nodes[i];
    ParetoSet s;
    switch (n.kind) {
      case ExecNode::Kind::Leaf:
        if (!n.outcome) return {{Rational(0), Rational(0)}};
        if (*n.outcome == v) return {{n.weight, n.weight}};
        return {{Rational(0), n.weight}};
      case ExecNode::Kind::Prob:
        s = minkowski(go(n.then_child), go(n.else_child));
        break;
      case ExecNode::Kind::Ndet: {
        s = go(n.then_child);
        ParetoSet e = go(n.else_child);
        s.insert(s.end(), e.begin(), e.end());
        break;
      }
    }
    if (prune) return convex_hull(std::move(s));
    dedupe(s);
    return s;
  };
  return go(tree.root);
}

Rational max_ratio(const ParetoSet& set) {
  Rational best = 0;
  for (const auto& p : set)
    if (p.den > 0) best = std::max(best, Rational(p.num / p.den));
  return best;
}

Rational oracle_max_conditional(const ExecTree& tree, const Value& v, bool prune) {
  return max_ratio(pareto_set(tree, v, prune));
}

std::vector<Rational> brute_force_ratios(const ExecTree& tree, const Value& v, std::size_t max_ndet) {
  // Preorder index of every choice node.
  std::vector<std::int64_t> index(tree.nodes.size(), -1);
  std::size_t count = 0;
  std::vector<std::uint32_t> stack{tree.root};
  while (!stack.empty()) {
    const std::uint32_t i = stack.back();
    stack.pop_back();
    const ExecNode& n = tree.nodes[i];
    if (n.kind == ExecNode::Kind::Leaf) continue;
    if (n.kind == ExecNode::Kind::Ndet) index[i] = static_cast<std::int64_t>(count++);
    stack.push_back(n.else_child);
    stack.push_back(n.then_child);
  }
  if (count > max_ndet)
    throw LimitError("execution tree has " + std::to_string(count) + " choice nodes, above the cap of " +
                     std::to_string(max_ndet));

  std::vector<Rational> out;
  out.reserve(std::size_t{1} << count);
  for (std::uint64_t strategy = 0; strategy < (std::uint64_t{1} << count); ++strategy) {
    Rational num = 0, den = 0;
    stack.assign(1, tree.root);
    while (!stack.empty()) {
      const std::uint32_t i = stack.back();
      stack.pop_back();
      const ExecNode& n = tree.nodes[i];
      switch (n.kind) {
        case ExecNode::Kind::Leaf:
          if (n.outcome) {
            den += n.weight;
            if (*n.outcome == v) num += n.weight;
          }
          break;
        case ExecNode::Kind::Prob:
          stack.push_back(n.then_child);
          stack.push_back(n.else_child);
          break;
        case ExecNode::Kind::Ndet:
          stack.push_back((strategy >> index[i]) & 1 ? n.then_child : n.else_child);
          break;
      }
    }
    out.push_back(den > 0 ? Rational(num / den) : Rational(0));
  }
  return out;
}

Rational brute_force_max_conditional(const ExecTree& tree, const Value& v, std::size_t max_ndet) {
  const auto r = brute_force_ratios(tree, v, max_ndet);
  return *std::max_element(r.begin(), r.end());
}

WmcResult wmc_probabilistic(const DDStore& store, const CompiledTriple& t, const Value& v, std::size_t max_levels) {
  for (const auto& e : t.trace)
    if (e.nondet()) throw Error("weighted model counting needs a program without nondeterministic choices");
  if (t.trace.size() > max_levels)
    throw LimitError("trace has " + std::to_string(t.trace.size()) + " flips, above the cap of " +
                     std::to_string(max_levels));
  WmcResult r{0, 0};
  std::vector<bool> assignment(store.level_count(), false);
  const std::size_t k = t.trace.size();
  for (std::uint64_t bits = 0; bits < (std::uint64_t{1} << k); ++bits) {
    Rational w = 1;
    for (std::size_t i = 0; i < k; ++i) {
      const bool b = (bits >> i) & 1;
      assignment[t.trace[i].level] = b;
      w *= b ? *t.trace[i].theta : Rational(1) - *t.trace[i].theta;
    }
    if (w == 0 || !store.eval(t.accept, assignment)) continue;
    r.den += w;
    std::vector<bool> leaves;
    for (const auto& f : t.model.leaves) leaves.push_back(store.eval(f, assignment));
    if (Value::from_bits(t.model.shape, leaves) == v) r.num += w;
  }
  return r;
}

BigInt exec_tree_leaf_count(const CoreProgram& p) { return LeafCounter(p).count(); }

Outcome execute(const CoreProgram& p, const std::vector<bool>& assignment) {
  return Executor(p, assignment).run();
}

}  // namespace nodice
