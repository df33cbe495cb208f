#include "nodice/bench.hpp"

#include "nodice/frontend.hpp"
#include "nodice/oracle.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace nodice {

namespace {

std::string lit(const Rational& r) { return rational_to_literal(r); }

void require(bool ok, const std::string& msg) {
  if (!ok) throw Error(msg);
}

// Right-nested projection of component i out of an n-tuple named `t`.
std::string component(const std::string& t, int i, int n) {
  std::string e = t;
  for (int k = 0; k < i; ++k) e = "snd (" + e + ")";
  if (i < n - 1) e = "fst (" + e + ")";
  return e;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::string runway(int steps, int locations) {
  require(steps >= 1 && steps <= 12, "runway: steps must be in 1..12");
  require(locations >= 2 && locations <= 8, "runway: locations must be in 2..8");
  std::ostringstream os;
  os << "fun move(pos: int): int {\n"
     << "  let m = if nflip() then flip(0.75) else flip(0.5) in\n"
     << "  if m && pos != " << locations - 1 << " then pos + 1 else pos\n"
     << "}\n\n"
     << "fun step(pos: int, obs: int): int {\n"
     << "  let new_pos = move(pos) in\n"
     << "  let mes = if flip(0.9) then new_pos else uniform(0, " << locations << ") in\n"
     << "  let o = observe(mes == obs) in\n"
     << "  new_pos\n"
     << "}\n\n";
  std::string prev = "0";
  for (int i = 1; i <= steps; ++i) {
    const int obs = steps == 1 ? 0 : (i - 1) * (locations - 1) / (steps - 1);
    os << "let p" << i << " = step(" << prev << ", " << obs << ") in\n";
    prev = "p" + std::to_string(i);
  }
  os << prev << " == " << locations - 2 << "\n";
  return os.str();
}

std::string coupon(int n, int rounds, bool ndet) {
  require(n >= 2 && n <= 8, "coupon: number of coupons must be in 2..8");
  require(rounds >= 1 && rounds <= 8, "coupon: rounds must be in 1..8");
  std::ostringstream os;
  std::vector<std::string> params, fields;
  for (int i = 0; i < n; ++i) {
    params.push_back("h" + std::to_string(i) + ": bool");
    fields.push_back("h" + std::to_string(i) + " || c1 == " + std::to_string(i) + " || c2 == " + std::to_string(i));
  }
  std::vector<std::string> tuple_ty(n, "bool");
  os << "fun pack(" << join(params, ", ") << "): (" << join(tuple_ty, ", ") << ") {\n"
     << "  let c1 = " << (ndet ? "choose" : "uniform") << "(0, " << n << ") in\n"
     << "  let c2 = uniform(0, " << n << ") in\n"
     << "  let distinct = observe(c1 != c2) in\n"
     << "  (" << join(fields, ",\n   ") << ")\n"
     << "}\n\n";
  std::string prev;
  for (int r = 1; r <= rounds; ++r) {
    std::vector<std::string> args;
    for (int i = 0; i < n; ++i) args.push_back(prev.empty() ? "false" : component(prev, i, n));
    os << "let s" << r << " = pack(" << join(args, ", ") << ") in\n";
    prev = "s" + std::to_string(r);
  }
  std::vector<std::string> all;
  for (int i = 0; i < n; ++i) all.push_back(component(prev, i, n));
  os << join(all, " && ") << "\n";
  return os.str();
}

std::string network(int layers, int width) {
  require(layers >= 1 && layers <= 30, "network: layers must be in 1..30");
  require(width >= 2 && width <= 4, "network: width must be in 2..4");
  std::ostringstream os;
  os << "fun hop(pos: int, alive: bool): (int, bool) {\n";
  std::vector<std::string> busy, any;
  for (int j = 0; j < width; ++j) {
    os << "  let b" << j << " = flip(0.3) in\n";
    busy.push_back("(next == " + std::to_string(j) + " && b" + std::to_string(j) + ")");
    any.push_back("b" + std::to_string(j));
  }
  os << "  let reachable = observe(!(" << join(any, " && ") << ")) in\n"
     << "  let next = choose(0, " << width << ") in\n"
     << "  let busy = " << join(busy, " || ") << " in\n"
     << "  let ok = if busy then flip(0.5) else if next == pos then flip(0.999) else flip(0.995) in\n"
     << "  (next, alive && ok)\n"
     << "}\n\n";
  std::string pos = "0", alive = "true";
  for (int l = 1; l <= layers; ++l) {
    os << "let s" << l << " = hop(" << pos << ", " << alive << ") in\n";
    pos = "fst s" + std::to_string(l);
    alive = "snd s" + std::to_string(l);
  }
  os << alive << "\n";
  return os.str();
}

std::string three_way(const Rational& a, const Rational& b) {
  // 0 with probability a, 1 with b, 2 otherwise.
  const Rational rest = Rational(1) - a;
  const Rational cond = rest == 0 ? Rational(0) : Rational(b / rest);
  return "if flip(" + lit(a) + ") then 0 else if flip(" + lit(cond) + ") then 1 else 2";
}

std::string bayes_net(int evidence) {
  require(evidence >= 0 && evidence <= 3, "bayes_net: evidence count must be in 0..3");
  auto q = [](const char* s) { return parse_rational(s); };
  std::ostringstream os;
  os << "// age: 0 young, 1 adult, 2 old; sex is left to the scheduler\n"
     << "let age = " << three_way(q("0.3"), q("0.5")) << " in\n"
     << "let male = nflip() in\n"
     << "let high_school =\n"
     << "  if age == 0 then (if male then flip(0.75) else flip(0.64))\n"
     << "  else if age == 1 then (if male then flip(0.72) else flip(0.7))\n"
     << "  else (if male then flip(0.88) else flip(0.9)) in\n"
     << "let employed = if high_school then flip(0.96) else flip(0.92) in\n"
     << "let small_city = if high_school then flip(0.25) else flip(0.2) in\n"
     << "// transport: 0 car, 1 train, 2 other\n"
     << "let transport =\n"
     << "  if employed && small_city then " << three_way(q("0.48"), q("0.42")) << "\n"
     << "  else if small_city then " << three_way(q("0.56"), q("0.36")) << "\n"
     << "  else if employed then " << three_way(q("0.58"), q("0.24")) << "\n"
     << "  else " << three_way(q("0.7"), q("0.21")) << " in\n";
  const char* ev[] = {"observe(small_city)", "observe(employed)", "observe(age != 2)"};
  for (int i = 0; i < evidence; ++i) os << "let e" << i << " = " << ev[i] << " in\n";
  os << "transport == 0\n";
  return os.str();
}

std::string threesat(int vars, int clauses, int ndet_percent, std::uint64_t seed) {
  require(vars >= 3 && vars <= 40, "threesat: variables must be in 3..40");
  require(clauses >= 1 && clauses <= 200, "threesat: clauses must be in 1..200");
  require(ndet_percent >= 0 && ndet_percent <= 100, "threesat: nondeterministic share must be in 0..100");
  std::mt19937_64 rng(seed);
  std::vector<int> order(vars);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const int ndet = vars * ndet_percent / 100;
  std::vector<bool> is_ndet(vars, false);
  for (int i = 0; i < ndet; ++i) is_ndet[order[i]] = true;
  std::ostringstream os;
  for (int i = 0; i < vars; ++i) os << "let x" << i << " = " << (is_ndet[i] ? "nflip()" : "flip(0.5)") << " in\n";
  std::uniform_int_distribution<int> var(0, vars - 1);
  std::bernoulli_distribution neg(0.5);
  std::vector<std::string> queried;
  const int observed = clauses / 2;
  for (int c = 0; c < clauses; ++c) {
    std::vector<int> picked;
    while (picked.size() < 3) {
      const int v = var(rng);
      if (std::find(picked.begin(), picked.end(), v) == picked.end()) picked.push_back(v);
    }
    std::vector<std::string> lits;
    for (int v : picked) lits.push_back((neg(rng) ? "!x" : "x") + std::to_string(v));
    const std::string clause = "(" + join(lits, " || ") + ")";
    if (c < observed) {
      os << "let k" << c << " = observe" << clause << " in\n";
    } else {
      os << "let c" << c << " = " << clause << " in\n";
      queried.push_back("c" + std::to_string(c));
    }
  }
  os << join(queried, " && ") << "\n";
  return os.str();
}

BenchRow run_one(const BenchmarkSpec& spec, const BenchOptions& options) {
  BenchRow row;
  row.spec = spec;
  try {
    InferOptions io = options.infer;
    io.deadline = deadline_after(options.timeout_seconds);
    io.parallel = false;
    const CoreProgram p = load_program(generate(spec));
    const QueryResult q = infer(p, Value::t(), io);
    const ValueResult& v = q.values.front();
    row.compile_seconds = v.times.compile + v.times.guard + v.times.lift + v.times.compress;
    row.check_seconds = v.times.check;
    row.flips = v.flips;
    row.add_nodes = v.add_nodes;
    row.mdp_states_pre = v.mdp_states_pre;
    row.mdp_states_post = v.mdp_states_post;
    row.probability = v.probability;
    if (options.count_leaves) {
      try {
        row.exec_tree_leaves = exec_tree_leaf_count(p).str();
      } catch (const LimitError&) {
        row.exec_tree_leaves = "?";
      }
    }
  } catch (const TimeoutError&) {
    row.status = BenchRow::Status::Timeout;
    row.message = "timeout after " + std::to_string(options.timeout_seconds) + " s";
  } catch (const std::exception& e) {
    row.status = BenchRow::Status::Failed;
    row.message = e.what();
  }
  return row;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

}  // namespace

std::string family_name(Family f) {
  switch (f) {
    case Family::Runway: return "runway";
    case Family::CouponProb: return "coupon_prob";
    case Family::CouponNdet: return "coupon_ndet";
    case Family::Network: return "network";
    case Family::BayesNet: return "bayes_net";
    case Family::ThreeSat: return "threesat";
  }
  return "?";
}

std::vector<Family> all_families() {
  return {Family::Runway, Family::CouponProb, Family::CouponNdet, Family::Network, Family::BayesNet, Family::ThreeSat};
}

std::optional<Family> parse_family(std::string_view s) {
  for (Family f : all_families())
    if (family_name(f) == s) return f;
  return std::nullopt;
}

std::string BenchmarkSpec::label() const {
  std::string s = family_name(family) + "(" + std::to_string(size);
  if (extra) s += "," + std::to_string(*extra);
  if (family == Family::ThreeSat) s += ",seed=" + std::to_string(seed);
  return s + ")";
}

std::string generate(const BenchmarkSpec& spec) {
  switch (spec.family) {
    case Family::Runway: return runway(spec.size, spec.extra.value_or(3));
    case Family::CouponProb: return coupon(spec.size, spec.extra.value_or((spec.size + 1) / 2 + 1), false);
    case Family::CouponNdet: return coupon(spec.size, spec.extra.value_or((spec.size + 1) / 2 + 1), true);
    case Family::Network: return network(spec.size, spec.extra.value_or(2));
    case Family::BayesNet: return bayes_net(spec.size);
    case Family::ThreeSat:
      return threesat(spec.size, spec.extra.value_or(static_cast<int>(std::lround(spec.size * 2.85))),
                      spec.ndet_percent, spec.seed);
  }
  throw Error("unknown benchmark family");
}

std::vector<BenchRow> run_bench(const std::vector<BenchmarkSpec>& specs, const BenchOptions& options) {
  std::vector<BenchRow> rows;
  if (options.parallel) {
    std::vector<std::future<BenchRow>> futures;
    for (const auto& s : specs) futures.push_back(std::async(std::launch::async, run_one, s, std::cref(options)));
    for (auto& f : futures) rows.push_back(f.get());
  } else {
    for (const auto& s : specs) rows.push_back(run_one(s, options));
  }
  return rows;
}

std::string render_bench_table(const std::vector<BenchRow>& rows) {
  std::vector<std::vector<std::string>> cells{
      {"benchmark", "flips", "add", "mdp", "mdp_c", "compile_s", "check_s", "P(T)", "status"}};
  const bool leaves = std::any_of(rows.begin(), rows.end(), [](const BenchRow& r) { return r.exec_tree_leaves; });
  if (leaves) cells.front().insert(cells.front().end() - 1, "tree_leaves");
  for (const auto& r : rows) {
    std::vector<std::string> c{r.spec.label()};
    if (r.status == BenchRow::Status::Ok) {
      c.insert(c.end(), {std::to_string(r.flips), std::to_string(r.add_nodes), std::to_string(r.mdp_states_pre),
                         std::to_string(r.mdp_states_post), fixed(r.compile_seconds, 3), fixed(r.check_seconds, 3),
                         fixed(r.probability, 6)});
      if (leaves) c.push_back(r.exec_tree_leaves.value_or("-"));
      c.push_back("ok");
    } else {
      c.insert(c.end(), leaves ? 8 : 7, "-");
      c.push_back(r.status == BenchRow::Status::Timeout ? "TO" : "error: " + r.message);
    }
    cells.push_back(std::move(c));
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i + 1 < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i + 1 == row.size()) {
        os << row[i];
      } else if (i == 0) {
        os << std::left << std::setw(static_cast<int>(width[i])) << row[i] << "  ";
      } else {
        os << std::right << std::setw(static_cast<int>(width[i])) << row[i] << "  ";
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string render_bench_json(const std::vector<BenchRow>& rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json j;
    j["family"] = family_name(r.spec.family);
    j["size"] = r.spec.size;
    if (r.spec.extra) j["extra"] = *r.spec.extra;
    if (r.spec.family == Family::ThreeSat) j["seed"] = r.spec.seed;
    j["status"] = r.status == BenchRow::Status::Ok ? "ok" : r.status == BenchRow::Status::Timeout ? "timeout" : "error";
    if (r.status == BenchRow::Status::Ok) {
      j["flips"] = r.flips;
      j["add_nodes"] = r.add_nodes;
      j["mdp_states_pre"] = r.mdp_states_pre;
      j["mdp_states_post"] = r.mdp_states_post;
      j["compile_seconds"] = r.compile_seconds;
      j["check_seconds"] = r.check_seconds;
      j["probability"] = r.probability;
      if (r.exec_tree_leaves) j["exec_tree_leaves"] = *r.exec_tree_leaves;
    } else {
      j["message"] = r.message;
    }
    out.push_back(std::move(j));
  }
  return out.dump(2) + "\n";
}

}  // namespace nodice
