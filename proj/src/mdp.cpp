#include "nodice/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace nodice {

char action_char(Action a) {
  switch (a) {
    case Action::L: return 'l';
    case Action::R: return 'r';
    case Action::D: return 'd';
  }
  return '?';
}

bool Target::matches(const StateLabel& l) const {
  switch (kind) {
    case Kind::Value: return l.accept && l.value && *l.value == value;
    case Kind::Accept: return l.accept;
    case Kind::Reject: return l.reject;
  }
  return false;
}

std::size_t Mdp::transition_count() const {
  std::size_t n = 0;
  for (const auto& s : states) n += s.out.size() + (s.absorbing ? 1 : 0);
  return n;
}

std::vector<Action> Mdp::actions(std::uint32_t s) const {
  std::vector<Action> acts;
  if (states[s].absorbing) acts.push_back(Action::D);
  for (const auto& t : states[s].out)
    if (std::find(acts.begin(), acts.end(), t.action) == acts.end()) acts.push_back(t.action);
  std::sort(acts.begin(), acts.end());
  return acts;
}

std::vector<Transition> Mdp::transitions(std::uint32_t s, Action a) const {
  std::vector<Transition> out;
  if (states[s].absorbing && a == Action::D) out.push_back({Action::D, s, 1.0});
  for (const auto& t : states[s].out)
    if (t.action == a) out.push_back(t);
  return out;
}

std::size_t Mdp::fan_out(std::uint32_t s) const { return states[s].out.size() + (states[s].absorbing ? 1 : 0); }

void Mdp::validate(double tol) const {
  if (states.empty()) throw MdpError("MDP has no states");
  if (initial >= states.size()) throw MdpError("initial state out of range");
  for (std::uint32_t s = 0; s < states.size(); ++s) {
    const auto acts = actions(s);
    if (acts.empty()) throw MdpError("state " + std::to_string(s) + " has no enabled action");
    for (Action a : acts) {
      double sum = 0;
      for (const auto& t : transitions(s, a)) {
        if (t.dst >= states.size()) throw MdpError("state " + std::to_string(s) + " points outside the MDP");
        if (!(t.prob >= 0) || t.prob > 1 + tol)
          throw MdpError("state " + std::to_string(s) + " has an invalid probability");
        sum += t.prob;
      }
      if (std::abs(sum - 1.0) > tol)
        throw MdpError("row of state " + std::to_string(s) + " action " + action_char(a) + " sums to " +
                       std::to_string(sum));
    }
  }
}

bool Mdp::has_lifted_shape() const {
  for (std::uint32_t s = 0; s < states.size(); ++s) {
    const auto& st = states[s];
    if (st.absorbing) {
      if (!st.out.empty()) return false;
      continue;
    }
    const auto acts = actions(s);
    if (acts == std::vector<Action>{Action::D}) continue;
    if (acts != std::vector<Action>{Action::L, Action::R}) return false;
    if (transitions(s, Action::L).size() != 1 || transitions(s, Action::R).size() != 1) return false;
  }
  return true;
}

// ---------------------------------------------------------------- lift

Mdp lift(const DDStore& store, AddRef root, const Trace& trace) {
  std::unordered_map<Level, const FlipEntry*> kind;
  for (const auto& e : trace) kind[e.level] = &e;
  const auto nodes = store.add_reachable(root);
  std::unordered_map<std::uint32_t, std::uint32_t> index;
  for (std::uint32_t i = 0; i < nodes.size(); ++i) index[nodes[i].index] = i;

  Mdp m;
  m.initial = 0;
  m.states.resize(nodes.size());
  for (std::uint32_t i = 0; i < nodes.size(); ++i) {
    const AddNodeView v = store.add_node(nodes[i]);
    MdpState& s = m.states[i];
    if (v.terminal) {
      s.absorbing = true;
      if (v.outcome) {
        s.label.accept = true;
        s.label.value = v.outcome;
      } else {
        s.label.reject = true;
      }
      continue;
    }
    s.origin_level = v.level;
    auto it = kind.find(v.level);
    if (it == kind.end()) throw MdpError("ADD tests level " + std::to_string(v.level) + " which is not in the trace");
    const std::uint32_t hi = index.at(v.then_child.index);
    const std::uint32_t lo = index.at(v.else_child.index);
    const FlipEntry& e = *it->second;
    if (e.nondet()) {
      s.out.push_back({Action::L, hi, 1.0});
      s.out.push_back({Action::R, lo, 1.0});
    } else {
      const Rational theta = *e.theta;
      const Rational rest = Rational(1) - theta;
      if (theta != 0) s.out.push_back({Action::D, hi, to_double(theta)});
      if (rest != 0) s.out.push_back({Action::D, lo, to_double(rest)});
    }
  }
  return m;
}

// ---------------------------------------------------------------- compress

namespace {

// Children before parents, over the DAG formed by non-absorbing edges.
std::vector<std::uint32_t> postorder(const Mdp& m) {
  std::vector<std::uint8_t> mark(m.size(), 0);
  std::vector<std::uint32_t> order;
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  for (std::uint32_t root = 0; root < m.size(); ++root) {
    if (mark[root]) continue;
    stack.push_back({root, 0});
    mark[root] = 1;
    while (!stack.empty()) {
      auto& [s, i] = stack.back();
      if (i < m.states[s].out.size()) {
        const std::uint32_t d = m.states[s].out[i++].dst;
        if (d == s) continue;
        if (mark[d] == 1) throw MdpError("MDP has a cycle through state " + std::to_string(d));
        if (mark[d] == 0) {
          mark[d] = 1;
          stack.push_back({d, 0});
        }
      } else {
        mark[s] = 2;
        order.push_back(s);
        stack.pop_back();
      }
    }
  }
  return order;
}

bool single_action(const MdpState& s) {
  if (s.absorbing || s.out.empty()) return false;
  for (const auto& t : s.out)
    if (t.action != s.out.front().action) return false;
  return true;
}

void add_edge(std::vector<Transition>& out, Action a, std::uint32_t dst, double p) {
  for (auto& t : out)
    if (t.action == a && t.dst == dst) {
      t.prob += p;
      return;
    }
  out.push_back({a, dst, p});
}

std::size_t merged_fanout(const MdpState& pred, std::uint32_t victim, const MdpState& vs) {
  std::vector<std::pair<Action, std::uint32_t>> edges;
  auto add = [&](Action a, std::uint32_t d) {
    if (std::find(edges.begin(), edges.end(), std::make_pair(a, d)) == edges.end()) edges.emplace_back(a, d);
  };
  for (const auto& t : pred.out) {
    if (t.dst != victim) {
      add(t.action, t.dst);
      continue;
    }
    for (const auto& u : vs.out) add(t.action, u.dst);
  }
  return edges.size() + (pred.absorbing ? 1 : 0);
}

Mdp renumber(const Mdp& m, const std::vector<bool>& removed) {
  std::vector<std::uint32_t> map(m.size(), 0);
  Mdp out;
  for (std::uint32_t s = 0; s < m.size(); ++s) {
    if (removed[s]) continue;
    map[s] = static_cast<std::uint32_t>(out.states.size());
    out.states.push_back(m.states[s]);
  }
  for (auto& s : out.states) {
    for (auto& t : s.out) t.dst = map[t.dst];
    std::stable_sort(s.out.begin(), s.out.end(),
                     [](const Transition& a, const Transition& b) { return a.action < b.action; });
  }
  out.initial = map[m.initial];
  return out;
}

}  // namespace

Mdp compress(const Mdp& in, std::size_t max_fanout, CompressionReport* report) {
  Mdp m = in;
  std::vector<std::unordered_set<std::uint32_t>> preds(m.size());
  for (std::uint32_t s = 0; s < m.size(); ++s)
    for (const auto& t : m.states[s].out)
      if (t.dst != s) preds[t.dst].insert(s);

  std::vector<bool> removed(m.size(), false);
  std::size_t count = 0;
  for (std::uint32_t victim : postorder(m)) {
    const MdpState& vs = m.states[victim];
    if (victim == m.initial || !vs.label.empty() || !single_action(vs) || preds[victim].empty()) continue;
    bool self = false;
    for (const auto& t : vs.out) self |= t.dst == victim;
    if (self) continue;
    bool fits = true;
    for (std::uint32_t p : preds[victim])
      if (merged_fanout(m.states[p], victim, vs) > max_fanout) fits = false;
    if (!fits) continue;

    for (std::uint32_t p : preds[victim]) {
      std::vector<Transition> next;
      std::vector<Transition> spliced;
      for (const auto& t : m.states[p].out) {
        if (t.dst != victim) {
          add_edge(next, t.action, t.dst, t.prob);
          continue;
        }
        for (const auto& u : vs.out) spliced.push_back({t.action, u.dst, t.prob * u.prob});
      }
      for (const auto& t : spliced) add_edge(next, t.action, t.dst, t.prob);
      m.states[p].out = std::move(next);
      for (const auto& u : vs.out) preds[u.dst].insert(p);
    }
    for (const auto& u : vs.out) preds[u.dst].erase(victim);
    preds[victim].clear();
    m.states[victim].out.clear();
    removed[victim] = true;
    ++count;
  }
  // States only reachable through omitted zero-probability edges.
  std::vector<bool> seen(m.size(), false);
  std::vector<std::uint32_t> work{m.initial};
  seen[m.initial] = true;
  while (!work.empty()) {
    const std::uint32_t s = work.back();
    work.pop_back();
    for (const auto& t : m.states[s].out)
      if (!seen[t.dst]) seen[t.dst] = true, work.push_back(t.dst);
  }
  for (std::uint32_t s = 0; s < m.size(); ++s)
    if (!seen[s] && !removed[s]) removed[s] = true, ++count;
  Mdp out = renumber(m, removed);
  if (report) {
    report->removed = count;
    report->max_fanout_cap = max_fanout;
    report->max_fanout_after = 0;
    for (std::uint32_t s = 0; s < out.size(); ++s)
      report->max_fanout_after = std::max(report->max_fanout_after, out.fan_out(s));
  }
  return out;
}

Mdp normalize_restart(const Mdp& m) {
  Mdp out = m;
  for (auto& s : out.states) {
    if (!s.label.reject || !s.absorbing) continue;
    s.absorbing = false;
    s.out = {{Action::D, out.initial, 1.0}};
  }
  return out;
}

// ---------------------------------------------------------------- isomorphism

namespace {

// BFS order from the initial state, successors in out-list order.
std::vector<std::uint32_t> bfs_order(const Mdp& m) {
  std::vector<std::uint32_t> order{m.initial};
  std::vector<bool> seen(m.size(), false);
  seen[m.initial] = true;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const auto& t : m.states[order[head]].out) {
      if (!seen[t.dst]) {
        seen[t.dst] = true;
        order.push_back(t.dst);
      }
    }
  }
  return order;
}

}  // namespace

bool isomorphic(const Mdp& a, const Mdp& b, double tol) {
  const auto oa = bfs_order(a);
  const auto ob = bfs_order(b);
  if (oa.size() != ob.size() || oa.size() != a.size() || ob.size() != b.size()) return false;
  std::vector<std::uint32_t> ra(a.size()), rb(b.size());
  for (std::uint32_t i = 0; i < oa.size(); ++i) ra[oa[i]] = i, rb[ob[i]] = i;
  for (std::uint32_t i = 0; i < oa.size(); ++i) {
    const MdpState& sa = a.states[oa[i]];
    const MdpState& sb = b.states[ob[i]];
    if (!(sa.label == sb.label) || sa.absorbing != sb.absorbing || sa.out.size() != sb.out.size()) return false;
    auto key = [](const Transition& t, const std::vector<std::uint32_t>& r) {
      return std::make_pair(t.action, r[t.dst]);
    };
    std::vector<Transition> ta = sa.out, tb = sb.out;
    std::sort(ta.begin(), ta.end(), [&](const Transition& x, const Transition& y) { return key(x, ra) < key(y, ra); });
    std::sort(tb.begin(), tb.end(), [&](const Transition& x, const Transition& y) { return key(x, rb) < key(y, rb); });
    for (std::size_t k = 0; k < ta.size(); ++k) {
      if (key(ta[k], ra) != key(tb[k], rb)) return false;
      if (std::abs(ta[k].prob - tb[k].prob) > tol) return false;
    }
  }
  return true;
}

}  // namespace nodice
