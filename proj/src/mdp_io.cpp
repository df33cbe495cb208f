#include "nodice/mdp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

namespace nodice {

namespace {

std::string format_prob(double p) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p);
  if (ec != std::errc{}) throw MdpError("cannot format probability");
  return std::string(buf, end);
}

[[noreturn]] void fail_line(std::size_t line, const std::string& msg) {
  throw MdpError("line " + std::to_string(line) + ": " + msg);
}

std::optional<std::uint64_t> parse_index(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

void export_explicit(const Mdp& m, std::ostream& out) {
  // Breadth-first numbering from the initial state.
  std::vector<std::uint32_t> order{m.initial};
  std::vector<std::int64_t> number(m.size(), -1);
  number[m.initial] = 0;
  for (std::size_t head = 0; head < order.size(); ++head) {
    for (const auto& t : m.states[order[head]].out) {
      if (number[t.dst] < 0) {
        number[t.dst] = static_cast<std::int64_t>(order.size());
        order.push_back(t.dst);
      }
    }
  }
  out << "STATES " << order.size() << "\n";
  out << "INITIAL 0\n";
  for (std::size_t i = 0; i < order.size(); ++i) {
    const StateLabel& l = m.states[order[i]].label;
    if (l.value) out << "LABEL " << i << " " << l.value->to_string() << "\n";
    if (l.accept) out << "LABEL " << i << " A\n";
    if (l.reject) out << "LABEL " << i << " R\n";
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const MdpState& s = m.states[order[i]];
    std::vector<std::tuple<Action, std::int64_t, double>> rows;
    if (s.absorbing) rows.emplace_back(Action::D, static_cast<std::int64_t>(i), 1.0);
    for (const auto& t : s.out) rows.emplace_back(t.action, number[t.dst], t.prob);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    for (const auto& [a, d, p] : rows)
      out << "TRANS " << i << " " << action_char(a) << " " << d << " " << format_prob(p) << "\n";
  }
}

std::string export_explicit(const Mdp& m) {
  std::ostringstream os;
  export_explicit(m, os);
  return os.str();
}

Mdp load_explicit_mdp(std::istream& in) {
  Mdp m;
  std::string line;
  std::size_t lineno = 0;
  bool have_states = false, have_initial = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string kw;
    if (!(ls >> kw)) continue;
    std::vector<std::string> args;
    for (std::string a; ls >> a;) args.push_back(a);
    if (kw == "STATES") {
      if (have_states) fail_line(lineno, "duplicate STATES line");
      if (args.size() != 1) fail_line(lineno, "expected 'STATES n'");
      auto n = parse_index(args[0]);
      if (!n || *n == 0 || *n > (1u << 30)) fail_line(lineno, "invalid state count '" + args[0] + "'");
      m.states.resize(*n);
      have_states = true;
    } else if (!have_states) {
      fail_line(lineno, "the first line must be 'STATES n'");
    } else if (kw == "INITIAL") {
      if (have_initial) fail_line(lineno, "duplicate INITIAL line");
      if (args.size() != 1) fail_line(lineno, "expected 'INITIAL i'");
      auto i = parse_index(args[0]);
      if (!i || *i >= m.size()) fail_line(lineno, "initial state '" + args[0] + "' out of range");
      m.initial = static_cast<std::uint32_t>(*i);
      have_initial = true;
    } else if (kw == "LABEL") {
      if (args.size() < 2) fail_line(lineno, "expected 'LABEL s name'");
      auto s = parse_index(args[0]);
      if (!s || *s >= m.size()) fail_line(lineno, "state '" + args[0] + "' out of range");
      std::string name;
      for (std::size_t k = 1; k < args.size(); ++k) name += args[k];
      StateLabel& l = m.states[*s].label;
      if (name == "A") {
        l.accept = true;
      } else if (name == "R") {
        l.reject = true;
      } else if (auto v = Value::parse(name)) {
        l.value = *v;
      } else {
        fail_line(lineno, "unknown label '" + name + "'");
      }
    } else if (kw == "TRANS") {
      if (args.size() != 4) fail_line(lineno, "expected 'TRANS src action dst prob'");
      auto src = parse_index(args[0]);
      auto dst = parse_index(args[2]);
      if (!src || *src >= m.size()) fail_line(lineno, "source state '" + args[0] + "' out of range");
      if (!dst || *dst >= m.size()) fail_line(lineno, "destination state '" + args[2] + "' out of range");
      Action a;
      if (args[1] == "l") a = Action::L;
      else if (args[1] == "r") a = Action::R;
      else if (args[1] == "d") a = Action::D;
      else fail_line(lineno, "unknown action '" + args[1] + "'");
      double p = 0;
      auto [ptr, ec] = std::from_chars(args[3].data(), args[3].data() + args[3].size(), p);
      if (ec != std::errc{} || ptr != args[3].data() + args[3].size() || !(p >= 0) || p > 1)
        fail_line(lineno, "invalid probability '" + args[3] + "'");
      m.states[*src].out.push_back({a, static_cast<std::uint32_t>(*dst), p});
    } else {
      fail_line(lineno, "unknown keyword '" + kw + "'");
    }
  }
  if (!have_states) throw MdpError("missing STATES line");
  if (!have_initial) throw MdpError("missing INITIAL line");
  for (std::uint32_t s = 0; s < m.size(); ++s) {
    auto& st = m.states[s];
    std::stable_sort(st.out.begin(), st.out.end(),
                     [](const Transition& a, const Transition& b) { return a.action < b.action; });
    if (st.out.size() == 1 && st.out[0].dst == s && st.out[0].action == Action::D && st.out[0].prob == 1.0) {
      st.out.clear();
      st.absorbing = true;
    }
  }
  try {
    m.validate(1e-9);
  } catch (const MdpError& e) {
    throw MdpError(std::string("invalid MDP: ") + e.what());
  }
  return m;
}

Mdp load_explicit_mdp_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read '" + path + "'");
  return load_explicit_mdp(in);
}

}  // namespace nodice
