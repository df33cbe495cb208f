#include "nodice/checker.hpp"

#include <algorithm>
#include <cmath>

namespace nodice {

std::vector<std::uint32_t> reverse_topological_order(const Mdp& m) {
  std::vector<std::uint8_t> mark(m.size(), 0);
  std::vector<std::uint32_t> order;
  order.reserve(m.size());
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  for (std::uint32_t root = 0; root < m.size(); ++root) {
    if (mark[root]) continue;
    stack.push_back({root, 0});
    mark[root] = 1;
    while (!stack.empty()) {
      auto& [s, i] = stack.back();
      if (i < m.states[s].out.size()) {
        const std::uint32_t d = m.states[s].out[i++].dst;
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

namespace {

// Calls f(action, expected value) once per enabled non-absorbing action.
template <class F>
void for_each_action(const MdpState& s, const std::vector<double>& x, F&& f) {
  std::size_t i = 0;
  while (i < s.out.size()) {
    const Action a = s.out[i].action;
    double sum = 0;
    for (; i < s.out.size() && s.out[i].action == a; ++i) sum += s.out[i].prob * x[s.out[i].dst];
    f(a, sum);
  }
}

double best_action(const MdpState& s, const std::vector<double>& x, Action* arg, std::size_t* count) {
  double best = -INFINITY;
  std::size_t n = 0;
  for_each_action(s, x, [&](Action a, double v) {
    ++n;
    if (v > best) {
      best = v;
      if (arg) *arg = a;
    }
  });
  if (count) *count = n;
  return best;
}

double solve_dag(const Mdp& m, const std::vector<std::uint32_t>& order, const TerminalReward& reward,
                 SchedulerWitness* witness) {
  std::vector<double> x(m.size(), 0.0);
  if (witness) witness->choice.clear();
  for (std::uint32_t s : order) {
    const MdpState& st = m.states[s];
    if (st.absorbing) {
      x[s] = reward(st.label);
      continue;
    }
    Action arg = Action::D;
    std::size_t n = 0;
    x[s] = best_action(st, x, &arg, &n);
    if (witness && n > 1) witness->choice[s] = arg;
  }
  return x[m.initial];
}

bool has_choice(const Mdp& m) {
  for (const auto& st : m.states)
    for (const auto& t : st.out)
      if (t.action != Action::D) return true;
  return false;
}

}  // namespace

double weighted_terminal_value(const Mdp& m, const TerminalReward& reward, SchedulerWitness* witness) {
  return solve_dag(m, reverse_topological_order(m), reward, witness);
}

double max_reach_dag(const Mdp& m, const Target& target, SchedulerWitness* witness) {
  return weighted_terminal_value(
      m, [&](const StateLabel& l) { return target.matches(l) ? 1.0 : 0.0; }, witness);
}

ConditionalResult conditional_bisection(const Mdp& m, const Target& target, double tol, const Deadline& deadline) {
  if (!(tol > 0)) throw Error("tolerance must be positive");
  constexpr double kDeadBand = 1e-12;
  const auto order = reverse_topological_order(m);
  ConditionalResult r;
  const double accept = solve_dag(m, order, [](const StateLabel& l) { return l.accept ? 1.0 : 0.0; }, &r.witness);
  if (accept <= 0) return r;
  if (solve_dag(m, order, [&](const StateLabel& l) { return target.matches(l) ? 1.0 : 0.0; }, nullptr) <= 0)
    return r;
  if (!has_choice(m)) {
    r.probability = std::clamp(evaluate_witness(m, {}, target).ratio(), 0.0, 1.0);
    return r;
  }

  struct Probe {
    double m;
    double accepted;
  };
  // Ties between actions go to the one with more accepted mass, so a zero
  // value reached only by rejecting everything is told apart from a zero
  // value at the optimum.
  std::vector<double> x(m.size()), acc(m.size());
  auto value_at = [&](double lambda, SchedulerWitness* w) {
    if (w) w->choice.clear();
    for (std::uint32_t s : order) {
      const MdpState& st = m.states[s];
      if (st.absorbing) {
        acc[s] = st.label.accept ? 1.0 : 0.0;
        x[s] = !st.label.accept ? 0.0 : target.matches(st.label) ? 1.0 - lambda : -lambda;
        continue;
      }
      double best = -INFINITY, best_acc = 0;
      Action arg = Action::D;
      std::size_t n = 0;
      std::size_t i = 0;
      while (i < st.out.size()) {
        const Action a = st.out[i].action;
        double v = 0, av = 0;
        for (; i < st.out.size() && st.out[i].action == a; ++i) {
          v += st.out[i].prob * x[st.out[i].dst];
          av += st.out[i].prob * acc[st.out[i].dst];
        }
        ++n;
        if (v > best + 1e-15 || (v >= best - 1e-15 && av > best_acc)) {
          best = std::max(best, v);
          best_acc = av;
          arg = a;
        }
      }
      x[s] = best;
      acc[s] = best_acc;
      if (w && n > 1) w->choice[s] = arg;
    }
    return Probe{x[m.initial], acc[m.initial]};
  };

  double lo = 0, hi = 1;
  std::optional<double> exact;
  while (hi - lo > tol) {
    check_deadline(deadline);
    const double lambda = (lo + hi) / 2;
    const Probe pr = value_at(lambda, nullptr);
    r.steps.push_back({lambda, pr.m});
    ++r.iterations;
    if (pr.m > kDeadBand) {
      lo = lambda;
    } else if (pr.m < -kDeadBand || pr.accepted <= 0) {
      hi = lambda;
    } else {
      exact = lambda;
      break;
    }
  }
  r.probability = exact ? *exact : (lo + hi) / 2;
  value_at(exact ? *exact : lo, &r.witness);
  r.probability = std::clamp(r.probability, 0.0, 1.0);
  return r;
}

ConditionalResult conditional_restart(const Mdp& m, const Target& target, double tol, const Deadline& deadline,
                                      std::size_t max_sweeps) {
  if (!(tol > 0)) throw Error("tolerance must be positive");
  const auto order = reverse_topological_order(m);
  const Mdp n = normalize_restart(m);

  // States that can reach the target at all, found by a backward search.
  std::vector<std::vector<std::uint32_t>> preds(n.size());
  for (std::uint32_t s = 0; s < n.size(); ++s)
    for (const auto& t : n.states[s].out)
      if (t.prob > 0) preds[t.dst].push_back(s);
  std::vector<bool> reach(n.size(), false);
  std::vector<std::uint32_t> work;
  for (std::uint32_t s = 0; s < n.size(); ++s)
    if (n.states[s].absorbing && target.matches(n.states[s].label)) reach[s] = true, work.push_back(s);
  while (!work.empty()) {
    const std::uint32_t s = work.back();
    work.pop_back();
    for (std::uint32_t p : preds[s])
      if (!reach[p]) reach[p] = true, work.push_back(p);
  }

  ConditionalResult r;
  if (!has_choice(m)) {
    r.probability = std::clamp(evaluate_witness(m, {}, target).ratio(), 0.0, 1.0);
    return r;
  }
  std::vector<double> x(n.size(), 0.0);
  for (std::uint32_t s = 0; s < n.size(); ++s)
    if (n.states[s].absorbing && reach[s]) x[s] = 1.0;
  if (!reach[n.initial]) return r;

  const double eps = tol * 1e-3;
  for (;;) {
    if (r.iterations >= max_sweeps) throw Error("restart value iteration did not converge");
    if ((r.iterations & 63) == 0) check_deadline(deadline);
    ++r.iterations;
    double diff = 0;
    for (std::uint32_t s : order) {
      const MdpState& st = n.states[s];
      if (st.absorbing || !reach[s]) continue;
      const double v = best_action(st, x, nullptr, nullptr);
      diff = std::max(diff, std::abs(v - x[s]));
      x[s] = v;
    }
    if (diff < eps) break;
  }
  for (std::uint32_t s = 0; s < m.size(); ++s) {
    const MdpState& st = m.states[s];
    if (st.absorbing) continue;
    Action arg = Action::D;
    std::size_t count = 0;
    best_action(st, x, &arg, &count);
    if (count > 1) r.witness.choice[s] = arg;
  }
  r.probability = std::clamp(x[n.initial], 0.0, 1.0);
  return r;
}

ConditionalMass evaluate_witness(const Mdp& m, const SchedulerWitness& w, const Target& target) {
  const auto order = reverse_topological_order(m);
  std::vector<double> num(m.size(), 0.0), den(m.size(), 0.0);
  for (std::uint32_t s : order) {
    const MdpState& st = m.states[s];
    if (st.absorbing) {
      den[s] = st.label.accept ? 1.0 : 0.0;
      num[s] = target.matches(st.label) ? 1.0 : 0.0;
      continue;
    }
    if (st.out.empty()) continue;
    auto it = w.choice.find(s);
    const Action a = it == w.choice.end() ? st.out.front().action : it->second;
    for (const auto& t : st.out) {
      if (t.action != a) continue;
      num[s] += t.prob * num[t.dst];
      den[s] += t.prob * den[t.dst];
    }
  }
  return {num[m.initial], den[m.initial]};
}

}  // namespace nodice
