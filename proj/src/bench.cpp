#include "tdve/bench.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace tdve {

namespace {

Expr var(const std::string& n) { return Expr::variable(n); }
Expr lit(std::int64_t v) { return Expr::integer(v); }
Expr at(const std::string& a, std::int64_t i) { return Expr::element(a, lit(i)); }
LValue lv(const std::string& n) { return LValue{n, std::nullopt, {}}; }
LValue lv_at(const std::string& a, std::int64_t i) { return LValue{a, lit(i), {}}; }

Transition edge(const std::string& src, const std::string& dst, Expr guard = Expr::boolean(true),
                std::vector<Assignment> effects = {}) {
  Transition t;
  t.src = src;
  t.dst = dst;
  t.guard = std::move(guard);
  t.effects = std::move(effects);
  return t;
}

VarDecl ranged(const std::string& name, std::int64_t lo, std::int64_t hi, std::int64_t init,
               std::optional<std::int64_t> length = std::nullopt) {
  VarDecl v;
  v.name = name;
  v.lo = lo;
  v.hi = hi;
  v.init = {init};
  v.length = length;
  return v;
}

}  // namespace

TimedModel gen_fischer(const FischerParams& p) {
  if (p.n < 2) throw std::invalid_argument("Fischer needs at least 2 threads");
  if (p.db_u < 1 || p.dc_l < 1 || p.dc_u < 1 || p.dc_l > p.dc_u)
    throw std::invalid_argument("Fischer bounds must be positive with dc_l <= dc_u");
  TimedModel tm;
  auto& m = tm.base;
  m.globals.push_back(ranged("x", 0, p.n, 0));
  m.globals.push_back(ranged("c", 0, p.n, 0));
  for (int t = 1; t <= p.n; ++t) {
    Process proc;
    proc.name = "P" + std::to_string(t);
    proc.locations = {"ncs", "a", "b", "c", "cs", "d"};
    proc.initial = "ncs";
    const auto id = lit(t);
    proc.transitions = {
        edge("ncs", "a"),
        edge("a", "b", eq(var("x"), lit(0))),
        edge("b", "c", Expr::boolean(true), {{lv("x"), id}}),
        edge("c", "a", ne(var("x"), id)),
        edge("c", "cs", eq(var("x"), id), {{lv("c"), add(var("c"), lit(1))}}),
        edge("cs", "d"),
        edge("d", "ncs", Expr::boolean(true), {{lv("x"), lit(0)}, {lv("c"), sub(var("c"), lit(1))}}),
    };
    const auto pi = m.processes.size();
    m.processes.push_back(std::move(proc));
    tm.bounds[{pi, 2}] = TimeBound{std::nullopt, p.db_u};
    if (p.observe_b) tm.observe.insert({pi, 2});
    for (std::size_t ti : {3u, 4u}) {
      tm.bounds[{pi, ti}] = TimeBound{p.dc_l, p.dc_u};
      if (p.observe_c) tm.observe.insert({pi, ti});
    }
  }
  return tm;
}

TimedModel gen_fischer(int n, std::int64_t db_u, std::int64_t dc_l, std::int64_t dc_u) {
  return gen_fischer(FischerParams{n, db_u, dc_l, dc_u});
}

Expr fischer_bad() { return Expr::binary_op(BinaryOp::Ge, var("c"), lit(2)); }

TimedModel gen_preemptive(const PreemptiveParams& p) {
  const auto n = static_cast<std::int64_t>(p.exec_units.size());
  if (n < 1) throw std::invalid_argument("pre-emptive model needs at least one task");
  for (auto u : p.exec_units)
    if (u < 1 || u >= p.infinity) throw std::invalid_argument("execution time out of range");
  std::int64_t lo = p.arrival_lo, hi = p.arrival_hi;
  if (lo == 0 && hi == 0) {
    lo = 1;
    hi = std::max<std::int64_t>(1, p.exec_units[0] - 1);
  }
  if (lo < 0 || hi < 1 || lo > hi) throw std::invalid_argument("bad arrival window");

  TimedModel tm;
  auto& m = tm.base;
  m.globals.push_back(ranged("isROccupied", 0, n, 0));
  m.globals.push_back(ranged("timer", 0, p.infinity, p.infinity, n));
  m.globals.push_back(ranged("signal", 0, 1, 0, n));
  for (std::int64_t k = 0; k < n; ++k) {
    ChannelDecl ch;
    ch.name = "preempt_" + std::to_string(k);
    m.channels.push_back(ch);
  }
  const auto max_exec = *std::max_element(p.exec_units.begin(), p.exec_units.end());
  for (std::int64_t k = 0; k < n; ++k) {
    const auto tag = lit(k + 1);
    Process proc;
    proc.name = "T" + std::to_string(k);
    proc.locals.push_back(ranged("timeToGo", 0, max_exec, p.exec_units[static_cast<std::size_t>(k)]));
    proc.locations = {"s_Idle", "s_i", "s_Exec", "s_Deprived", "s_Next"};
    proc.initial = k == 0 ? "s_i" : "s_Idle";
    auto acquire_effects = [&] {
      return std::vector<Assignment>{{lv("isROccupied"), tag},
                                     {lv_at("timer", k), var("timeToGo")},
                                     {lv_at("signal", k), lit(1)}};
    };
    proc.transitions.push_back(edge("s_Idle", "s_i"));
    proc.transitions.push_back(
        edge("s_i", "s_Exec", eq(var("isROccupied"), lit(0)), acquire_effects()));
    // seize the resource from any lower-priority owner
    for (std::int64_t j = 0; j < k; ++j) {
      auto t = edge("s_i", "s_Exec", eq(var("isROccupied"), lit(j + 1)), acquire_effects());
      Sync s;
      s.channel = "preempt_" + std::to_string(j);
      s.dir = SyncDir::Send;
      t.sync = s;
      proc.transitions.push_back(std::move(t));
    }
    {
      auto t = edge("s_Exec", "s_Deprived", gt(at("timer", k), lit(0)),
                    {{lv("timeToGo"), at("timer", k)},
                     {lv_at("timer", k), lit(p.infinity)},
                     {lv_at("signal", k), lit(0)}});
      Sync s;
      s.channel = "preempt_" + std::to_string(k);
      s.dir = SyncDir::Recv;
      t.sync = s;
      proc.transitions.push_back(std::move(t));
    }
    proc.transitions.push_back(
        edge("s_Deprived", "s_Exec", eq(var("isROccupied"), lit(0)), acquire_effects()));
    proc.transitions.push_back(edge("s_Exec", "s_Next", eq(at("timer", k), lit(0)),
                                    {{lv("isROccupied"), lit(0)},
                                     {lv_at("signal", k), lit(0)},
                                     {lv_at("timer", k), lit(p.infinity)}}));
    const auto pi = m.processes.size();
    m.processes.push_back(std::move(proc));
    if (k > 0) tm.bounds[{pi, 0}] = TimeBound{lo, hi};
  }
  return tm;
}

TimedModel gen_preemptive(int n_tasks, std::vector<std::int64_t> exec_units) {
  if (static_cast<int>(exec_units.size()) != n_tasks)
    throw std::invalid_argument("one execution time per task expected");
  PreemptiveParams p;
  p.exec_units = std::move(exec_units);
  return gen_preemptive(p);
}

const char* method_name(Method m) { return m == Method::Ledm ? "ledm" : "eedm"; }

const char* mode_name(Method m) {
  switch (m) {
    case Method::Ledm: return "unit";
    case Method::EedmStandard: return "standard";
    case Method::EedmLeaping: return "leaping";
  }
  return "?";
}

Model lower_fischer(FischerParams p, Method m, const LoweringConfig& base) {
  p.observe_c = m == Method::EedmStandard;
  LoweringConfig cfg = base;
  cfg.method = m == Method::Ledm ? TickMode::Ledm : TickMode::Eedm;
  if (!cfg.include_now) cfg.include_now = false;
  return lower(gen_fischer(p), cfg);
}

ExperimentRow run_fischer(const FischerParams& p, Method m, const ExploreOptions& opts) {
  ExperimentRow row;
  row.method = method_name(m);
  row.mode = mode_name(m);
  row.params = p;
  row.params.observe_c = m == Method::EedmStandard;
  Semantics sem(lower_fischer(p, m));
  try {
    auto v = check_safety(sem, fischer_bad(), opts);
    row.verdict = v.holds ? "holds" : "violated";
    row.states = v.stats.states;
    row.transitions = v.stats.transitions;
    row.time_ms = v.stats.time_ms;
    row.mem_bytes = v.stats.mem_bytes;
  } catch (const ResourceError& e) {
    row.verdict = "resource";
    row.states = e.partial().states;
    row.transitions = e.partial().transitions;
    row.time_ms = e.partial().time_ms;
    row.mem_bytes = e.partial().mem_bytes;
  }
  return row;
}

namespace {

constexpr Method kMethods[] = {Method::Ledm, Method::EedmStandard, Method::EedmLeaping};

}  // namespace

std::vector<ExperimentRow> run_experiment1(int n, std::int64_t t_lo, std::int64_t t_hi,
                                           const ExploreOptions& opts) {
  std::vector<ExperimentRow> rows;
  for (auto t = t_lo; t <= t_hi; ++t)
    for (auto m : kMethods) rows.push_back(run_fischer(FischerParams{n, t, t, t}, m, opts));
  return rows;
}

std::vector<ExperimentRow> run_experiment2(int n, std::int64_t u_lo, std::int64_t u_hi,
                                           const ExploreOptions& opts) {
  std::vector<ExperimentRow> rows;
  for (auto u = u_lo; u <= u_hi; ++u)
    for (auto m : kMethods) rows.push_back(run_fischer(FischerParams{n, 4, 4, u}, m, opts));
  return rows;
}

std::string csv_header() {
  return "method,mode,n,db_u,dc_l,dc_u,states,transitions,time_ms,mem_bytes,verdict";
}

std::string csv_row(const ExperimentRow& r) {
  char ms[32];
  std::snprintf(ms, sizeof ms, "%.1f", r.time_ms);
  return r.method + "," + r.mode + "," + std::to_string(r.params.n) + "," +
         std::to_string(r.params.db_u) + "," + std::to_string(r.params.dc_l) + "," +
         std::to_string(r.params.dc_u) + "," + std::to_string(r.states) + "," +
         std::to_string(r.transitions) + "," + ms + "," + std::to_string(r.mem_bytes) + "," +
         r.verdict;
}

void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows) {
  os << csv_header() << '\n';
  for (const auto& r : rows) os << csv_row(r) << '\n';
}

}  // namespace tdve
