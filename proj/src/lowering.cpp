#include "tdve/lowering.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace tdve {

namespace {

struct LocationBound {
  std::optional<std::int64_t> lower;  // absent when zero
  std::optional<std::int64_t> upper;
  bool observe = false;
  friend bool operator==(const LocationBound&, const LocationBound&) = default;
};

// Per system process: the bound shared by the transitions leaving each location.
using BoundMap = std::map<std::string, LocationBound>;

struct Analysis {
  std::vector<std::size_t> system;     // process indices that get a timer slot
  std::map<std::size_t, std::size_t> slot;  // process index -> timer slot
  std::vector<BoundMap> bounds;        // indexed by timer slot
  bool any_observe = false;
};

Analysis analyse(const TimedModel& tm, const LoweringConfig& cfg) {
  if (auto diags = validate(tm); !diags.empty())
    throw LoweringError(diags.front().loc, diags.front().message);
  if (cfg.maximal <= cfg.infinity) throw LoweringError({}, "MAXIMAL must exceed INFINITY");
  if (cfg.infinity < 2) throw LoweringError({}, "INFINITY must be at least 2");
  if (cfg.maximal > std::numeric_limits<std::int32_t>::max())
    throw LoweringError({}, "MAXIMAL exceeds 32-bit storage");

  Analysis a;
  const auto& m = tm.base;
  a.system = m.system_processes();
  if (a.system.empty()) throw LoweringError({}, "model has no process to time");
  for (std::size_t k = 0; k < a.system.size(); ++k) a.slot[a.system[k]] = k;
  a.bounds.resize(a.system.size());

  for (const auto& [ref, b] : tm.bounds) {
    const auto& proc = m.processes[ref.process];
    const auto& t = proc.transitions[ref.transition];
    for (auto v : {b.lower, b.upper})
      if (v && *v >= cfg.infinity)
        throw LoweringError(t.loc, "time bound " + std::to_string(*v) + " is not below INFINITY (" +
                                       std::to_string(cfg.infinity) + ")");
    if (t.sync) throw LoweringError(t.loc, "a bounded transition may not synchronise");
    LocationBound lb;
    if (b.lower && *b.lower > 0) lb.lower = b.lower;
    lb.upper = b.upper;
    lb.observe = tm.observe.count(ref) > 0;
    a.any_observe = a.any_observe || lb.observe;
    auto& map = a.bounds[a.slot.at(ref.process)];
    auto [it, inserted] = map.emplace(t.src, lb);
    if (!inserted && !(it->second == lb))
      throw LoweringError(t.loc, "location '" + t.src + "' of " + proc.name +
                                     " has outgoing transitions with different time bounds");
  }
  return a;
}

const LocationBound* bound_of(const BoundMap& map, const std::string& loc) {
  auto it = map.find(loc);
  return it == map.end() ? nullptr : &it->second;
}

Expr slot_ref(const std::string& array, std::size_t k) {
  return Expr::element(array, Expr::integer(static_cast<std::int64_t>(k)));
}

LValue slot_lvalue(const std::string& array, std::size_t k) {
  return LValue{array, Expr::integer(static_cast<std::int64_t>(k)), {}};
}

void add_constant(Model& m, const std::string& name, std::int64_t value) {
  if (auto existing = m.find_constant(name)) {
    if (*existing != value)
      throw LoweringError({}, "constant '" + name + "' clashes with the clock configuration");
    return;
  }
  if (m.find_global(name)) throw LoweringError({}, "'" + name + "' is reserved by the clock");
  m.constants.emplace_back(name, value);
}

VarDecl& add_array(Model& m, const std::string& name, std::int64_t lo, std::int64_t hi,
                   std::size_t n, std::int64_t init) {
  if (m.find_global(name) || m.find_constant(name))
    throw LoweringError({}, "'" + name + "' is reserved by the clock");
  VarDecl v;
  v.name = name;
  v.lo = lo;
  v.hi = hi;
  v.length = static_cast<std::int64_t>(n);
  v.init = std::vector<std::int64_t>(n, init);
  m.globals.push_back(std::move(v));
  return m.globals.back();
}

// Either declares `name` or adopts a user-declared array of the right shape.
VarDecl& add_or_adopt_array(Model& m, const std::string& name, std::int64_t lo, std::int64_t hi,
                            std::size_t n, std::int64_t init) {
  for (auto& g : m.globals) {
    if (g.name != name) continue;
    if (!g.length || *g.length != static_cast<std::int64_t>(n) || g.lo > lo || g.hi < hi)
      throw LoweringError(g.loc, "'" + name + "' must be an array of " + std::to_string(n) +
                                     " elements covering [" + std::to_string(lo) + ".." +
                                     std::to_string(hi) + "]");
    g.init.resize(n, g.init.front());
    return g;
  }
  return add_array(m, name, lo, hi, n, init);
}

void add_now(Model& m, const LoweringConfig& cfg, TickSpec& tick) {
  if (m.find_global("now") || m.find_constant("now"))
    throw LoweringError({}, "'now' is reserved by the clock");
  VarDecl v;
  v.name = "now";
  v.lo = 0;
  v.hi = cfg.maximal - 1;
  v.init = {0};
  m.globals.push_back(std::move(v));
  tick.now = "now";
}

std::string fresh_location(const Process& p, const std::string& base) {
  std::string name = base + "_m2";
  while (p.location_index(name)) name += "_";
  return name;
}

}  // namespace

TimedModel untimed(Model m) { return TimedModel{std::move(m), {}, {}}; }

Model lower_ledm(const TimedModel& tm, const LoweringConfig& cfg) {
  auto a = analyse(tm, cfg);
  Model m = tm.base;
  const std::size_t n = a.system.size();
  const auto inf = cfg.infinity;

  TickSpec tick;
  tick.mode = TickMode::Ledm;
  tick.timers = {"ubtimer", "lbtimer"};
  tick.infinity = inf;
  tick.maximal = cfg.maximal;

  add_constant(m, "INFINITY", inf);
  auto ub_init = add_array(m, "ubtimer", 0, inf, n, inf).init;
  auto lb_init = add_array(m, "lbtimer", 0, inf, n, 0).init;
  if (cfg.include_now.value_or(a.any_observe)) add_now(m, cfg, tick);

  auto ub_of = [&](const LocationBound* b) {
    return Expr::integer(b && b->upper ? *b->upper : inf);
  };
  auto lb_of = [&](const LocationBound* b) { return Expr::integer(b && b->lower ? *b->lower : 0); };

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pi = a.system[k];
    auto& proc = m.processes[pi];
    const auto& bmap = a.bounds[k];
    for (std::size_t ti = 0; ti < proc.transitions.size(); ++ti) {
      auto& t = proc.transitions[ti];
      const auto* src = bound_of(bmap, t.src);
      const auto* dst = bound_of(bmap, t.dst);
      if (tm.bounds.count({pi, ti}) && src && src->lower)
        t.guard = conjoin(std::move(t.guard), eq(slot_ref("lbtimer", k), Expr::integer(0)));
      if (src || dst) {
        t.effects.push_back({slot_lvalue("ubtimer", k), ub_of(dst)});
        t.effects.push_back({slot_lvalue("lbtimer", k), lb_of(dst)});
      }
    }
    if (const auto* init = bound_of(bmap, proc.initial)) {
      ub_init[k] = init->upper.value_or(inf);
      lb_init[k] = init->lower.value_or(0);
    }
  }
  // References into m.globals may have been invalidated by add_now.
  for (auto& g : m.globals) {
    if (g.name == "ubtimer") g.init = ub_init;
    if (g.name == "lbtimer") g.init = lb_init;
  }
  m.tick = std::move(tick);
  return m;
}

Model lower_eedm(const TimedModel& tm, const LoweringConfig& cfg) {
  auto a = analyse(tm, cfg);
  Model m = tm.base;
  const std::size_t n = a.system.size();
  const auto inf = cfg.infinity;

  TickSpec tick;
  tick.mode = TickMode::Eedm;
  tick.timers = {"timer"};
  tick.infinity = inf;
  tick.maximal = cfg.maximal;

  add_constant(m, "INFINITY", inf);
  std::vector<std::int64_t> timer_init = add_or_adopt_array(m, "timer", 0, inf, n, inf).init;
  const bool signals = a.any_observe || m.find_global("signal") != nullptr;
  std::vector<std::int64_t> signal_init;
  if (signals) {
    signal_init = add_or_adopt_array(m, "signal", 0, 1, n, 0).init;
    tick.signals = "signal";
  }
  if (cfg.include_now.value_or(a.any_observe)) add_now(m, cfg, tick);

  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t pi = a.system[k];
    const Process original = m.processes[pi];
    const auto& bmap = a.bounds[k];

    // Locations with a lower bound are split into a waiting phase (the
    // original name) and an open phase in which the bounded transitions run.
    std::map<std::string, std::string> open_phase;
    Process proc = original;
    proc.locations.clear();
    for (const auto& l : original.locations) {
      proc.locations.push_back(l);
      const auto* b = bound_of(bmap, l);
      if (b && b->lower) {
        auto m2 = fresh_location(original, l);
        open_phase[l] = m2;
        proc.locations.push_back(m2);
      }
    }

    auto entry_timer = [&](const LocationBound* b) -> std::int64_t {
      if (!b) return inf;
      return b->lower ? *b->lower : *b->upper;
    };
    auto entry_signal = [&](const LocationBound* b) -> std::int64_t {
      return b && b->observe && !b->lower ? 1 : 0;
    };
    // Effects appended to a transition leaving phase `src_bound` and entering `dst`.
    auto instrument = [&](Transition& t, const LocationBound* src_bound, bool src_observed) {
      const auto* dst = bound_of(bmap, t.dst);
      if (src_bound || dst)
        t.effects.push_back({slot_lvalue("timer", k), Expr::integer(entry_timer(dst))});
      if (signals && (src_observed || (dst && dst->observe)))
        t.effects.push_back({slot_lvalue("signal", k), Expr::integer(entry_signal(dst))});
    };

    proc.transitions.clear();
    std::map<std::string, bool> bridged;
    for (std::size_t ti = 0; ti < original.transitions.size(); ++ti) {
      const auto& t = original.transitions[ti];
      const bool bounded = tm.bounds.count({pi, ti}) > 0;
      const auto* src = bound_of(bmap, t.src);
      auto split = open_phase.find(t.src);
      if (split == open_phase.end()) {
        Transition c = t;
        // Upper-only window: observed from entry, so the source is observed.
        instrument(c, src, src && src->observe);
        proc.transitions.push_back(std::move(c));
        continue;
      }
      if (bounded && !bridged[t.src]) {
        bridged[t.src] = true;
        Transition bridge;
        bridge.src = t.src;
        bridge.dst = split->second;
        bridge.loc = t.loc;
        bridge.guard = eq(slot_ref("timer", k), Expr::integer(0));
        bridge.effects.push_back(
            {slot_lvalue("timer", k), Expr::integer(src->upper ? *src->upper - *src->lower : inf)});
        if (src->observe) bridge.effects.push_back({slot_lvalue("signal", k), Expr::integer(1)});
        proc.transitions.push_back(std::move(bridge));
      }
      if (bounded) {
        Transition c = t;
        c.src = split->second;
        instrument(c, src, src->observe);
        proc.transitions.push_back(std::move(c));
      } else {
        // Unbounded alternatives stay available in both phases.
        Transition waiting = t;
        instrument(waiting, src, false);
        proc.transitions.push_back(std::move(waiting));
        Transition open = t;
        open.src = split->second;
        instrument(open, src, src->observe);
        proc.transitions.push_back(std::move(open));
      }
    }
    if (const auto* init = bound_of(bmap, proc.initial)) {
      timer_init[k] = entry_timer(init);
      if (signals) signal_init[k] = entry_signal(init);
    }
    m.processes[pi] = std::move(proc);
  }
  for (auto& g : m.globals) {
    if (g.name == "timer") g.init = timer_init;
    if (signals && g.name == "signal") g.init = signal_init;
  }
  m.tick = std::move(tick);
  return m;
}

Model lower(const TimedModel& tm, const LoweringConfig& cfg) {
  return cfg.method == TickMode::Ledm ? lower_ledm(tm, cfg) : lower_eedm(tm, cfg);
}

}  // namespace tdve
