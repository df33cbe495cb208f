#include "nodice/dd.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

namespace nodice {

namespace {

std::atomic<std::uint32_t> g_next_store_id{1};

constexpr std::uint32_t kFalse = 0;
constexpr std::uint32_t kTrue = 1;

struct VecHash {
  std::size_t operator()(const std::vector<std::uint32_t>& v) const noexcept {
    std::uint64_t h = 1469598103934665603ull;
    for (auto x : v) h = (h ^ x) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

}  // namespace

// ---------------------------------------------------------------- FormulaTuple

FormulaTuple FormulaTuple::pair(const FormulaTuple& a, const FormulaTuple& b) {
  FormulaTuple r{Ty::pair(a.shape, b.shape), a.leaves};
  r.leaves.insert(r.leaves.end(), b.leaves.begin(), b.leaves.end());
  return r;
}

FormulaTuple FormulaTuple::first() const {
  if (!shape.is_pair()) throw StoreError("first() of a Bool formula");
  Ty t = shape.first();
  return FormulaTuple{t, {leaves.begin(), leaves.begin() + static_cast<long>(t.width())}};
}

FormulaTuple FormulaTuple::second() const {
  if (!shape.is_pair()) throw StoreError("second() of a Bool formula");
  const std::size_t skip = shape.first().width();
  return FormulaTuple{shape.second(), {leaves.begin() + static_cast<long>(skip), leaves.end()}};
}

const BddRef& FormulaTuple::bool_leaf() const {
  if (!shape.is_bool()) throw StoreError("expected a Bool formula, found shape " + shape.to_string());
  return leaves.front();
}

// ---------------------------------------------------------------- basics

DDStore::DDStore(Level flip_levels) : id_(g_next_store_id++), flip_levels_(flip_levels) {
  if (flip_levels >= kPlaceholderBase) throw StoreError("too many levels");
  bdd_.push_back({kTerminalLevel, kFalse, kFalse});
  bdd_.push_back({kTerminalLevel, kTrue, kTrue});
}

Level DDStore::allocate_levels(Level n) {
  if (std::uint64_t{flip_levels_} + n >= kPlaceholderBase) throw StoreError("flip level space exhausted");
  Level first = flip_levels_;
  flip_levels_ += n;
  return first;
}

Level DDStore::allocate_placeholders(Level n) {
  if (std::uint64_t{placeholder_count_} + n >= kTerminalLevel - kPlaceholderBase)
    throw StoreError("placeholder level space exhausted");
  Level first = kPlaceholderBase + placeholder_count_;
  placeholder_count_ += n;
  return first;
}

std::string DDStore::level_name(Level l) {
  if (is_placeholder(l)) return "x" + std::to_string(l - kPlaceholderBase + 1);
  return "f" + std::to_string(l + 1);
}

void DDStore::check(BddRef f) const {
  if (f.store != id_) throw StoreError("BDD reference belongs to a different store");
  if (f.index >= bdd_.size()) throw StoreError("dangling BDD reference");
}

void DDStore::check(AddRef a) const {
  if (a.store != id_) throw StoreError("ADD reference belongs to a different store");
  if (a.index >= add_.size()) throw StoreError("dangling ADD reference");
}

void DDStore::check_level(Level l) const {
  if (is_placeholder(l)) {
    if (l - kPlaceholderBase >= placeholder_count_)
      throw StoreError("placeholder level " + level_name(l) + " was never allocated");
    return;
  }
  if (l >= flip_levels_)
    throw StoreError("level " + std::to_string(l) + " out of range (store has " + std::to_string(flip_levels_) +
                     " levels)");
}

std::uint32_t DDStore::make(Level level, std::uint32_t hi, std::uint32_t lo) {
  if (hi == lo) return hi;
  Key k{level, hi, lo};
  if (auto it = unique_.find(k); it != unique_.end()) return it->second;
  auto idx = static_cast<std::uint32_t>(bdd_.size());
  bdd_.push_back({level, hi, lo});
  unique_.emplace(k, idx);
  return idx;
}

std::uint32_t DDStore::var_index(Level level) {
  check_level(level);
  return make(level, kTrue, kFalse);
}

BddRef DDStore::mk_var(Level level) { return {id_, var_index(level)}; }

std::uint32_t DDStore::cofactor(std::uint32_t f, Level level, bool branch) const {
  const Node& n = bdd_[f];
  if (n.level != level) return f;
  return branch ? n.hi : n.lo;
}

// ---------------------------------------------------------------- apply / ite

std::uint32_t DDStore::neg_rec(std::uint32_t a) {
  if (a == kFalse) return kTrue;
  if (a == kTrue) return kFalse;
  if (auto it = neg_cache_.find(a); it != neg_cache_.end()) return it->second;
  const Node n = bdd_[a];
  std::uint32_t hi = neg_rec(n.hi);
  std::uint32_t lo = neg_rec(n.lo);
  std::uint32_t r = make(n.level, hi, lo);
  neg_cache_.emplace(a, r);
  neg_cache_.emplace(r, a);
  return r;
}

std::uint32_t DDStore::apply_rec(BoolOp op, std::uint32_t a, std::uint32_t b) {
  switch (op) {
    case BoolOp::And:
      if (a == kFalse || b == kFalse) return kFalse;
      if (a == kTrue) return b;
      if (b == kTrue || a == b) return a;
      break;
    case BoolOp::Or:
      if (a == kTrue || b == kTrue) return kTrue;
      if (a == kFalse) return b;
      if (b == kFalse || a == b) return a;
      break;
    case BoolOp::Xor:
      if (a == b) return kFalse;
      if (a == kFalse) return b;
      if (b == kFalse) return a;
      if (a == kTrue) return neg_rec(b);
      if (b == kTrue) return neg_rec(a);
      break;
    case BoolOp::Iff:
      if (a == b) return kTrue;
      if (a == kTrue) return b;
      if (b == kTrue) return a;
      if (a == kFalse) return neg_rec(b);
      if (b == kFalse) return neg_rec(a);
      break;
  }
  if (a > b) std::swap(a, b);
  Triple key{static_cast<std::uint32_t>(op), a, b};
  if (auto it = apply_cache_.find(key); it != apply_cache_.end()) return it->second;
  const Level top = std::min(bdd_[a].level, bdd_[b].level);
  std::uint32_t hi = apply_rec(op, cofactor(a, top, true), cofactor(b, top, true));
  std::uint32_t lo = apply_rec(op, cofactor(a, top, false), cofactor(b, top, false));
  std::uint32_t r = make(top, hi, lo);
  apply_cache_.emplace(key, r);
  return r;
}

std::uint32_t DDStore::ite_rec(std::uint32_t g, std::uint32_t t, std::uint32_t e) {
  if (g == kTrue) return t;
  if (g == kFalse) return e;
  if (t == e) return t;
  if (t == kTrue && e == kFalse) return g;
  if (t == kFalse && e == kTrue) return neg_rec(g);
  if (t == kTrue) return apply_rec(BoolOp::Or, g, e);
  if (e == kFalse) return apply_rec(BoolOp::And, g, t);
  Triple key{g, t, e};
  if (auto it = ite_cache_.find(key); it != ite_cache_.end()) return it->second;
  const Level top = std::min({bdd_[g].level, bdd_[t].level, bdd_[e].level});
  std::uint32_t hi = ite_rec(cofactor(g, top, true), cofactor(t, top, true), cofactor(e, top, true));
  std::uint32_t lo = ite_rec(cofactor(g, top, false), cofactor(t, top, false), cofactor(e, top, false));
  std::uint32_t r = make(top, hi, lo);
  ite_cache_.emplace(key, r);
  return r;
}

BddRef DDStore::apply(BoolOp op, BddRef a, BddRef b) {
  check(a), check(b);
  return {id_, apply_rec(op, a.index, b.index)};
}

BddRef DDStore::neg(BddRef a) {
  check(a);
  return {id_, neg_rec(a.index)};
}

BddRef DDStore::ite(BddRef g, BddRef t, BddRef e) {
  check(g), check(t), check(e);
  return {id_, ite_rec(g.index, t.index, e.index)};
}

// ---------------------------------------------------------------- compose / shift

BddRef DDStore::compose(BddRef target, Level level, BddRef replacement) {
  return compose(target, std::vector<std::pair<Level, BddRef>>{{level, replacement}});
}

BddRef DDStore::compose(BddRef target, const std::vector<std::pair<Level, BddRef>>& substitution) {
  check(target);
  std::unordered_map<Level, std::uint32_t> sub;
  Level highest = 0;
  for (const auto& [l, r] : substitution) {
    check(r);
    check_level(l);
    sub[l] = r.index;
    highest = std::max(highest, l);
  }
  if (sub.empty()) return target;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t f) -> std::uint32_t {
    const Node n = bdd_[f];
    // Below the deepest substituted level nothing changes.
    if (n.level == kTerminalLevel || n.level > highest) return f;
    if (auto it = memo.find(f); it != memo.end()) return it->second;
    std::uint32_t hi = rec(n.hi);
    std::uint32_t lo = rec(n.lo);
    auto s = sub.find(n.level);
    std::uint32_t g = s != sub.end() ? s->second : var_index(n.level);
    std::uint32_t r = ite_rec(g, hi, lo);
    memo.emplace(f, r);
    return r;
  };
  return {id_, rec(target.index)};
}

BddRef DDStore::shift_levels(BddRef root, std::int64_t offset) {
  check(root);
  if (offset == 0) return root;
  std::unordered_map<std::uint32_t, std::uint32_t> memo;
  std::function<std::uint32_t(std::uint32_t)> rec = [&](std::uint32_t f) -> std::uint32_t {
    const Node n = bdd_[f];
    if (n.level == kTerminalLevel) return f;
    if (auto it = memo.find(f); it != memo.end()) return it->second;
    Level nl = n.level;
    if (!is_placeholder(n.level)) {
      const std::int64_t shifted = std::int64_t{n.level} + offset;
      if (shifted < 0 || shifted >= std::int64_t{flip_levels_})
        throw StoreError("shift by " + std::to_string(offset) + " moves level " + std::to_string(n.level) +
                         " out of range");
      nl = static_cast<Level>(shifted);
    }
    std::uint32_t hi = rec(n.hi);
    std::uint32_t lo = rec(n.lo);
    std::uint32_t r = make(nl, hi, lo);
    memo.emplace(f, r);
    return r;
  };
  return {id_, rec(root.index)};
}

// ---------------------------------------------------------------- tuples

FormulaTuple DDStore::constant(const Value& v) const {
  FormulaTuple t{v.type(), {}};
  for (bool b : v.bits()) t.leaves.push_back(constant(b));
  return t;
}

FormulaTuple DDStore::broadcast_and(BddRef g, const FormulaTuple& t) {
  FormulaTuple r{t.shape, {}};
  for (const auto& leaf : t.leaves) r.leaves.push_back(apply(BoolOp::And, g, leaf));
  return r;
}

FormulaTuple DDStore::pointwise_or(const FormulaTuple& a, const FormulaTuple& b) {
  if (!(a.shape == b.shape))
    throw StoreError("shape mismatch: " + a.shape.to_string() + " vs " + b.shape.to_string());
  FormulaTuple r{a.shape, {}};
  for (std::size_t i = 0; i < a.leaves.size(); ++i) r.leaves.push_back(apply(BoolOp::Or, a.leaves[i], b.leaves[i]));
  return r;
}

FormulaTuple DDStore::ite(BddRef g, const FormulaTuple& t, const FormulaTuple& e) {
  if (!(t.shape == e.shape))
    throw StoreError("shape mismatch: " + t.shape.to_string() + " vs " + e.shape.to_string());
  FormulaTuple r{t.shape, {}};
  for (std::size_t i = 0; i < t.leaves.size(); ++i) r.leaves.push_back(ite(g, t.leaves[i], e.leaves[i]));
  return r;
}

FormulaTuple DDStore::compose(const FormulaTuple& t, const std::vector<std::pair<Level, BddRef>>& substitution) {
  FormulaTuple r{t.shape, {}};
  for (const auto& leaf : t.leaves) r.leaves.push_back(compose(leaf, substitution));
  return r;
}

FormulaTuple DDStore::shift_levels(const FormulaTuple& t, std::int64_t offset) {
  FormulaTuple r{t.shape, {}};
  for (const auto& leaf : t.leaves) r.leaves.push_back(shift_levels(leaf, offset));
  return r;
}

// ---------------------------------------------------------------- evaluation

bool DDStore::eval(BddRef f, const std::vector<bool>& assignment) const {
  check(f);
  if (assignment.size() != flip_levels_)
    throw StoreError("assignment has " + std::to_string(assignment.size()) + " entries, store has " +
                     std::to_string(flip_levels_) + " levels");
  std::uint32_t cur = f.index;
  while (bdd_[cur].level != kTerminalLevel) {
    const Node& n = bdd_[cur];
    if (is_placeholder(n.level)) throw StoreError("cannot evaluate a formula over placeholder levels");
    cur = assignment[n.level] ? n.hi : n.lo;
  }
  return cur == kTrue;
}

std::uint32_t DDStore::add_terminal(const Outcome& o) {
  if (!o) {
    if (reject_terminal_ < 0) {
      reject_terminal_ = static_cast<std::int64_t>(add_.size());
      add_.push_back({kTerminalLevel, 0, 0, static_cast<std::int32_t>(add_terminals_.size())});
      add_terminals_.push_back(std::nullopt);
    }
    return static_cast<std::uint32_t>(reject_terminal_);
  }
  if (auto it = value_terminal_.find(*o); it != value_terminal_.end()) return it->second;
  auto idx = static_cast<std::uint32_t>(add_.size());
  add_.push_back({kTerminalLevel, 0, 0, static_cast<std::int32_t>(add_terminals_.size())});
  add_terminals_.push_back(o);
  value_terminal_.emplace(*o, idx);
  return idx;
}

std::uint32_t DDStore::add_make(Level level, std::uint32_t hi, std::uint32_t lo) {
  if (hi == lo) return hi;
  Key k{level, hi, lo};
  if (auto it = add_unique_.find(k); it != add_unique_.end()) return it->second;
  auto idx = static_cast<std::uint32_t>(add_.size());
  add_.push_back({level, hi, lo, -1});
  add_unique_.emplace(k, idx);
  return idx;
}

AddRef DDStore::guard(const FormulaTuple& model, BddRef accept) {
  check(accept);
  std::vector<std::uint32_t> start{accept.index};
  for (const auto& leaf : model.leaves) {
    check(leaf);
    start.push_back(leaf.index);
  }
  std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, VecHash> memo;
  std::function<std::uint32_t(const std::vector<std::uint32_t>&)> rec =
      [&](const std::vector<std::uint32_t>& key) -> std::uint32_t {
    if (key[0] == kFalse) return add_terminal(std::nullopt);
    Level top = kTerminalLevel;
    for (auto f : key) top = std::min(top, bdd_[f].level);
    if (top == kTerminalLevel) {
      std::vector<bool> bits;
      for (std::size_t i = 1; i < key.size(); ++i) bits.push_back(key[i] == kTrue);
      return add_terminal(Value::from_bits(model.shape, bits));
    }
    if (is_placeholder(top)) throw StoreError("guard over unsubstituted placeholder level " + level_name(top));
    if (auto it = memo.find(key); it != memo.end()) return it->second;
    std::vector<std::uint32_t> hi_key(key.size()), lo_key(key.size());
    for (std::size_t i = 0; i < key.size(); ++i) {
      hi_key[i] = cofactor(key[i], top, true);
      lo_key[i] = cofactor(key[i], top, false);
    }
    std::uint32_t hi = rec(hi_key);
    std::uint32_t lo = rec(lo_key);
    std::uint32_t r = add_make(top, hi, lo);
    memo.emplace(key, r);
    return r;
  };
  return {id_, rec(start)};
}

Outcome DDStore::eval_add(AddRef root, const std::vector<bool>& assignment) const {
  check(root);
  if (assignment.size() != flip_levels_)
    throw StoreError("assignment has " + std::to_string(assignment.size()) + " entries, store has " +
                     std::to_string(flip_levels_) + " levels");
  std::uint32_t cur = root.index;
  while (add_[cur].terminal < 0) cur = assignment[add_[cur].level] ? add_[cur].hi : add_[cur].lo;
  return add_terminals_[static_cast<std::size_t>(add_[cur].terminal)];
}

// ---------------------------------------------------------------- inspection

bool DDStore::is_terminal(BddRef f) const {
  check(f);
  return f.index <= kTrue;
}

Level DDStore::level(BddRef f) const {
  check(f);
  return bdd_[f.index].level;
}

BddRef DDStore::high(BddRef f) const {
  check(f);
  return {id_, bdd_[f.index].hi};
}

BddRef DDStore::low(BddRef f) const {
  check(f);
  return {id_, bdd_[f.index].lo};
}

AddNodeView DDStore::add_node(AddRef a) const {
  check(a);
  const AddNode& n = add_[a.index];
  if (n.terminal >= 0)
    return {true, kTerminalLevel, a, a, add_terminals_[static_cast<std::size_t>(n.terminal)]};
  return {false, n.level, {id_, n.hi}, {id_, n.lo}, std::nullopt};
}

std::vector<AddRef> DDStore::add_reachable(AddRef root) const {
  check(root);
  std::vector<AddRef> out;
  std::unordered_set<std::uint32_t> seen{root.index};
  std::vector<std::uint32_t> queue{root.index};
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const std::uint32_t cur = queue[head];
    out.push_back({id_, cur});
    const AddNode& n = add_[cur];
    if (n.terminal >= 0) continue;
    for (std::uint32_t child : {n.hi, n.lo})
      if (seen.insert(child).second) queue.push_back(child);
  }
  return out;
}

std::size_t DDStore::bdd_inner_count(BddRef root) const {
  check(root);
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{root.index};
  while (!stack.empty()) {
    std::uint32_t f = stack.back();
    stack.pop_back();
    if (f <= kTrue || !seen.insert(f).second) continue;
    stack.push_back(bdd_[f].hi);
    stack.push_back(bdd_[f].lo);
  }
  return seen.size();
}

std::size_t DDStore::add_inner_count(AddRef root) const {
  std::size_t n = 0;
  for (const auto& a : add_reachable(root)) n += add_[a.index].terminal < 0;
  return n;
}

std::size_t DDStore::add_terminal_count(AddRef root) const {
  std::size_t n = 0;
  for (const auto& a : add_reachable(root)) n += add_[a.index].terminal >= 0;
  return n;
}

std::vector<Level> DDStore::support(BddRef root) const {
  check(root);
  std::set<Level> levels;
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{root.index};
  while (!stack.empty()) {
    std::uint32_t f = stack.back();
    stack.pop_back();
    if (f <= kTrue || !seen.insert(f).second) continue;
    levels.insert(bdd_[f].level);
    stack.push_back(bdd_[f].hi);
    stack.push_back(bdd_[f].lo);
  }
  return {levels.begin(), levels.end()};
}

std::vector<std::string> DDStore::check_reduced() const {
  std::vector<std::string> problems;
  std::unordered_map<Key, std::uint32_t, KeyHash> seen;
  for (std::uint32_t i = 2; i < bdd_.size(); ++i) {
    const Node& n = bdd_[i];
    if (n.hi == n.lo) problems.push_back("BDD node " + std::to_string(i) + " has a redundant test");
    if (!seen.emplace(Key{n.level, n.hi, n.lo}, i).second)
      problems.push_back("BDD node " + std::to_string(i) + " duplicates another node");
    for (std::uint32_t c : {n.hi, n.lo})
      if (bdd_[c].level <= n.level)
        problems.push_back("BDD node " + std::to_string(i) + " has a child at a non-increasing level");
  }
  std::unordered_map<Key, std::uint32_t, KeyHash> add_seen;
  std::set<std::string> outcomes;
  for (std::uint32_t i = 0; i < add_.size(); ++i) {
    const AddNode& n = add_[i];
    if (n.terminal >= 0) {
      auto text = outcome_to_string(add_terminals_[static_cast<std::size_t>(n.terminal)]);
      if (!outcomes.insert(text).second) problems.push_back("ADD terminal " + text + " is duplicated");
      continue;
    }
    if (n.hi == n.lo) problems.push_back("ADD node " + std::to_string(i) + " has a redundant test");
    if (!add_seen.emplace(Key{n.level, n.hi, n.lo}, i).second)
      problems.push_back("ADD node " + std::to_string(i) + " duplicates another node");
    for (std::uint32_t c : {n.hi, n.lo})
      if (add_[c].terminal < 0 && add_[c].level <= n.level)
        problems.push_back("ADD node " + std::to_string(i) + " has a child at a non-increasing level");
  }
  return problems;
}

std::string DDStore::to_string(BddRef f) const {
  check(f);
  std::function<std::string(std::uint32_t)> rec = [&](std::uint32_t i) -> std::string {
    if (i == kTrue) return "T";
    if (i == kFalse) return "F";
    const Node& n = bdd_[i];
    const std::string v = level_name(n.level);
    if (n.hi == kTrue && n.lo == kFalse) return v;
    if (n.hi == kFalse && n.lo == kTrue) return "!" + v;
    if (n.lo == kFalse) return "(" + v + " & " + rec(n.hi) + ")";
    if (n.hi == kTrue) return "(" + v + " | " + rec(n.lo) + ")";
    if (n.hi == kFalse) return "(!" + v + " & " + rec(n.lo) + ")";
    if (n.lo == kTrue) return "(!" + v + " | " + rec(n.hi) + ")";
    return "ite(" + v + ", " + rec(n.hi) + ", " + rec(n.lo) + ")";
  };
  return rec(f.index);
}

std::string DDStore::to_string(const FormulaTuple& t) const {
  if (t.shape.is_bool()) return to_string(t.bool_leaf());
  return "(" + to_string(t.first()) + ", " + to_string(t.second()) + ")";
}

std::string DDStore::to_dot(BddRef root) const {
  check(root);
  std::ostringstream os;
  os << "digraph bdd {\n";
  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> stack{root.index};
  while (!stack.empty()) {
    std::uint32_t f = stack.back();
    stack.pop_back();
    if (!seen.insert(f).second) continue;
    if (f <= kTrue) {
      os << "  n" << f << " [shape=box,label=\"" << (f == kTrue ? "T" : "F") << "\"];\n";
      continue;
    }
    const Node& n = bdd_[f];
    os << "  n" << f << " [shape=circle,label=\"" << level_name(n.level) << "\"];\n";
    os << "  n" << f << " -> n" << n.hi << ";\n";
    os << "  n" << f << " -> n" << n.lo << " [style=dashed];\n";
    stack.push_back(n.hi);
    stack.push_back(n.lo);
  }
  os << "}\n";
  return os.str();
}

std::string DDStore::to_dot(AddRef root) const {
  std::ostringstream os;
  os << "digraph add {\n";
  for (const auto& a : add_reachable(root)) {
    const AddNode& n = add_[a.index];
    if (n.terminal >= 0) {
      os << "  n" << a.index << " [shape=box,label=\""
         << outcome_to_string(add_terminals_[static_cast<std::size_t>(n.terminal)]) << "\"];\n";
      continue;
    }
    os << "  n" << a.index << " [shape=circle,label=\"" << level_name(n.level) << "\"];\n";
    os << "  n" << a.index << " -> n" << n.hi << ";\n";
    os << "  n" << a.index << " -> n" << n.lo << " [style=dashed];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace nodice
