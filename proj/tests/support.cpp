#include "support.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "tdve/lowering.hpp"
#include "tdve/state.hpp"

namespace tdve::testkit {

namespace {

std::int64_t pick(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}
bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// ---------------------------------------------------------------------------
// random models

struct Scope {
  std::vector<const VarDecl*> scalars;
  std::vector<const VarDecl*> arrays;
  std::vector<std::string> constants;
};

Expr int_expr(std::mt19937_64& rng, const Scope& sc, int depth);

// lo + (e mod (hi - lo + 1)), always inside [lo, hi]
Expr wrap(Expr e, std::int64_t lo, std::int64_t hi) {
  auto m = Expr::binary_op(BinaryOp::Mod, std::move(e), Expr::integer(hi - lo + 1));
  return lo == 0 ? m : Expr::binary_op(BinaryOp::Add, Expr::integer(lo), std::move(m));
}

Expr int_leaf(std::mt19937_64& rng, const Scope& sc) {
  switch (pick(rng, 0, 3)) {
    case 0:
      if (!sc.scalars.empty())
        return Expr::variable(sc.scalars[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.scalars.size()) - 1))]->name);
      break;
    case 1:
      if (!sc.constants.empty())
        return Expr::variable(sc.constants[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.constants.size()) - 1))]);
      break;
    case 2:
      if (!sc.arrays.empty()) {
        const auto* a = sc.arrays[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.arrays.size()) - 1))];
        return Expr::element(a->name, Expr::integer(pick(rng, 0, *a->length - 1)));
      }
      break;
    default: break;
  }
  return Expr::integer(pick(rng, -9, 40));
}

Expr int_expr(std::mt19937_64& rng, const Scope& sc, int depth) {
  if (depth <= 0 || coin(rng, 0.4)) return int_leaf(rng, sc);
  switch (pick(rng, 0, 5)) {
    case 0: return Expr::unary_op(UnaryOp::Neg, int_expr(rng, sc, depth - 1));
    case 1:
      if (!sc.arrays.empty()) {
        const auto* a = sc.arrays[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.arrays.size()) - 1))];
        return Expr::element(a->name, wrap(int_expr(rng, sc, depth - 1), 0, *a->length - 1));
      }
      [[fallthrough]];
    default: {
      static constexpr BinaryOp ops[] = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Mod};
      const auto op = ops[pick(rng, 0, 3)];
      auto rhs = op == BinaryOp::Mod ? Expr::integer(pick(rng, 1, 9)) : int_expr(rng, sc, depth - 1);
      return Expr::binary_op(op, int_expr(rng, sc, depth - 1), std::move(rhs));
    }
  }
}

Expr bool_expr(std::mt19937_64& rng, const Scope& sc, int depth) {
  if (depth <= 0 || coin(rng, 0.2)) return Expr::boolean(coin(rng, 0.7));
  switch (pick(rng, 0, 4)) {
    case 0: return Expr::unary_op(UnaryOp::Not, bool_expr(rng, sc, depth - 1));
    case 1: return Expr::binary_op(coin(rng, 0.5) ? BinaryOp::And : BinaryOp::Or,
                                   bool_expr(rng, sc, depth - 1), bool_expr(rng, sc, depth - 1));
    case 2: return Expr::binary_op(coin(rng, 0.5) ? BinaryOp::Eq : BinaryOp::Ne,
                                   bool_expr(rng, sc, depth - 1), bool_expr(rng, sc, depth - 1));
    default: {
      static constexpr BinaryOp ops[] = {BinaryOp::Eq, BinaryOp::Ne, BinaryOp::Lt,
                                         BinaryOp::Le, BinaryOp::Gt, BinaryOp::Ge};
      return Expr::binary_op(ops[pick(rng, 0, 5)], int_expr(rng, sc, depth - 1), int_expr(rng, sc, depth - 1));
    }
  }
}

LValue random_lvalue(std::mt19937_64& rng, const Scope& sc) {
  if (!sc.arrays.empty() && (sc.scalars.empty() || coin(rng, 0.4))) {
    const auto* a = sc.arrays[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.arrays.size()) - 1))];
    return LValue{a->name, wrap(int_expr(rng, sc, 1), 0, *a->length - 1), {}};
  }
  return LValue{sc.scalars[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(sc.scalars.size()) - 1))]->name,
                std::nullopt, {}};
}

VarDecl random_var(std::mt19937_64& rng, const std::string& name) {
  VarDecl v;
  v.name = name;
  v.lo = pick(rng, -5, 0);
  v.hi = pick(rng, 1, 12);
  if (coin(rng, 0.35)) {
    v.length = pick(rng, 1, 3);
    if (coin(rng, 0.5)) {
      v.init.clear();
      for (std::int64_t i = 0; i < *v.length; ++i) v.init.push_back(pick(rng, v.lo, v.hi));
      if (v.init.size() == 1) v.init = {v.init.front()};
      return v;
    }
  }
  v.init = {pick(rng, v.lo, v.hi)};
  return v;
}

}  // namespace

TimedModel random_timed_model(std::mt19937_64& rng) {
  TimedModel tm;
  auto& m = tm.base;
  for (std::int64_t i = 0, n = pick(rng, 0, 2); i < n; ++i)
    m.constants.emplace_back("K" + std::to_string(i), pick(rng, -20, 20));
  for (std::int64_t i = 0, n = pick(rng, 1, 3); i < n; ++i)
    m.globals.push_back(random_var(rng, "g" + std::to_string(i)));
  for (std::int64_t i = 0, n = pick(rng, 0, 2); i < n; ++i) {
    ChannelDecl c;
    c.name = "ch" + std::to_string(i);
    c.arity = static_cast<int>(pick(rng, 0, 2));
    m.channels.push_back(c);
  }
  const auto n_procs = pick(rng, 1, 3);
  const bool with_property = coin(rng, 0.3);
  for (std::int64_t p = 0; p < n_procs + (with_property ? 1 : 0); ++p) {
    const bool is_prop = p == n_procs;
    Process proc;
    proc.name = is_prop ? "Prop" : "P" + std::to_string(p);
    if (!is_prop)
      for (std::int64_t i = 0, n = pick(rng, 0, 2); i < n; ++i)
        proc.locals.push_back(random_var(rng, "l" + std::to_string(i)));
    for (std::int64_t i = 0, n = pick(rng, 1, 4); i < n; ++i) proc.locations.push_back("s" + std::to_string(i));
    proc.initial = proc.locations[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(proc.locations.size()) - 1))];

    Scope sc;
    for (const auto& [k, v] : m.constants) sc.constants.push_back(k);
    auto add_scope = [&](const VarDecl& v) {
      (v.length ? sc.arrays : sc.scalars).push_back(&v);
    };
    for (const auto& g : m.globals) add_scope(g);
    for (const auto& l : proc.locals) add_scope(l);

    auto any_location = [&] {
      return proc.locations[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(proc.locations.size()) - 1))];
    };
    for (std::int64_t i = 0, n = pick(rng, 0, 5); i < n; ++i) {
      Transition t;
      t.src = any_location();
      t.dst = any_location();
      if (coin(rng, 0.6)) t.guard = bool_expr(rng, sc, 3);
      if (!is_prop) {
        if (!m.channels.empty() && coin(rng, 0.25)) {
          const auto& ch = m.channels[static_cast<std::size_t>(pick(rng, 0, static_cast<std::int64_t>(m.channels.size()) - 1))];
          Sync s;
          s.channel = ch.name;
          s.dir = coin(rng, 0.5) ? SyncDir::Send : SyncDir::Recv;
          for (int k = 0; k < ch.arity; ++k) {
            if (s.dir == SyncDir::Send)
              s.values.push_back(wrap(int_expr(rng, sc, 2), 0, 1));
            else
              s.targets.push_back(random_lvalue(rng, sc));
          }
          t.sync = s;
        }
        for (std::int64_t k = 0, ne = pick(rng, 0, 2); k < ne; ++k) {
          auto target = random_lvalue(rng, sc);
          const VarDecl* d = proc.find_local(target.name);
          if (!d) d = m.find_global(target.name);
          t.effects.push_back({std::move(target), wrap(int_expr(rng, sc, 2), d->lo, d->hi)});
        }
      }
      const auto ti = proc.transitions.size();
      if (!is_prop && !t.sync && coin(rng, 0.3)) {
        TimeBound b;
        if (coin(rng, 0.6)) b.upper = pick(rng, 1, 9);
        if (coin(rng, 0.6) || !b.upper) b.lower = pick(rng, 0, b.upper.value_or(9));
        tm.bounds[{static_cast<std::size_t>(p), ti}] = b;
        if (coin(rng, 0.5)) tm.observe.insert({static_cast<std::size_t>(p), ti});
      }
      proc.transitions.push_back(std::move(t));
    }
    if (is_prop) {
      for (const auto& l : proc.locations)
        if (coin(rng, 0.4)) proc.accepting.push_back(l);
      m.property = static_cast<std::size_t>(p);
    }
    m.processes.push_back(std::move(proc));
  }
  return tm;
}

std::string mutate(const std::string& text, std::mt19937_64& rng) {
  static const char* tokens[] = {"{", "}", "(", ")", "[", "]", ";", ",", "->", "..", "!", "?",
                                 "=", "==", "&&", "||", "process", "int", "const", "channel",
                                 "guard", "sync", "effect", "time", "observe", "accept", "trans",
                                 "state", "init", "property", "999999999999999999999", "-", "/*",
                                 "//", "\"", "MIN_ACTIVE_TIMER", "\n", " ", "x", "0"};
  std::string s = text;
  for (std::int64_t k = 0, n = pick(rng, 1, 4); k < n; ++k) {
    const auto len = static_cast<std::int64_t>(s.size());
    const auto pos = static_cast<std::size_t>(pick(rng, 0, len));
    switch (pick(rng, 0, 5)) {
      case 0:
        if (len) s[std::min(pos, s.size() - 1)] = static_cast<char>(pick(rng, 1, 255));
        break;
      case 1: s.insert(pos, tokens[pick(rng, 0, std::size(tokens) - 1)]); break;
      case 2:
        if (len) s.erase(pos, static_cast<std::size_t>(pick(rng, 1, 8)));
        break;
      case 3: s.resize(pos); break;
      case 4:
        if (len) {
          const auto from = static_cast<std::size_t>(pick(rng, 0, len - 1));
          s.insert(pos, s.substr(from, static_cast<std::size_t>(pick(rng, 1, 30))));
        }
        break;
      default: {
        std::string noise;
        for (std::int64_t i = 0, nn = pick(rng, 1, 12); i < nn; ++i)
          noise.push_back(static_cast<char>(pick(rng, 32, 126)));
        s.insert(pos, noise);
      }
    }
  }
  return s;
}

// ---------------------------------------------------------------------------
// reference successors

namespace {

struct Ref {
  const Model& m;
  StateLayout layout;
  explicit Ref(const Model& model) : m(model), layout(model) {}

  std::int64_t ival(const Expr& e, const State& s, std::size_t p) const {
    return std::get<std::int64_t>(eval(e, m, s, p));
  }

  std::size_t slot_of(const LValue& lv, const State& s, std::size_t p, const VarDecl** decl) const {
    const auto slot = layout.lookup(lv.name, p);
    if (!slot) throw ModelError("unknown variable " + lv.name);
    *decl = slot->decl;
    std::int64_t i = 0;
    if (lv.index) i = ival(*lv.index, s, p);
    if (i < 0 || i >= slot->length) throw ModelError("index out of bounds");
    return static_cast<std::size_t>(slot->offset + i);
  }

  struct Write {
    std::size_t slot;
    std::int64_t value;
    const VarDecl* decl;
  };

  static void commit(const std::vector<Write>& ws, State& out) {
    for (const auto& w : ws) {
      if (w.value < w.decl->lo || w.value > w.decl->hi) throw ModelError("value out of range");
      out.values[w.slot] = static_cast<std::int32_t>(w.value);
    }
  }

  void apply(const std::vector<Assignment>& effects, const State& read, State& out, std::size_t p) const {
    std::vector<Write> ws;
    for (const auto& a : effects) {
      const VarDecl* d = nullptr;
      const auto slot = slot_of(a.target, read, p, &d);
      ws.push_back({slot, ival(a.value, read, p), d});
    }
    commit(ws, out);
  }

  std::int32_t loc(const State& s, std::size_t p) const {
    return s.values[static_cast<std::size_t>(layout.location_slot(p))];
  }
  std::int32_t loc_index(std::size_t p, const std::string& name) const {
    return static_cast<std::int32_t>(*m.processes[p].location_index(name));
  }

  void system(const State& s, std::vector<std::pair<Label, State>>& out) const {
    for (std::size_t p = 0; p < m.processes.size(); ++p) {
      if (m.is_property(p)) continue;
      const auto& proc = m.processes[p];
      for (std::size_t ti = 0; ti < proc.transitions.size(); ++ti) {
        const auto& t = proc.transitions[ti];
        if (loc_index(p, t.src) != loc(s, p)) continue;
        if (t.sync && t.sync->dir == SyncDir::Recv) continue;
        if (!eval_bool(t.guard, m, s, p)) continue;
        if (!t.sync) {
          State post = s;
          apply(t.effects, s, post, p);
          post.values[static_cast<std::size_t>(layout.location_slot(p))] = loc_index(p, t.dst);
          out.push_back({Label{static_cast<std::int16_t>(p), static_cast<std::int16_t>(ti)}, post});
          continue;
        }
        for (std::size_t q = 0; q < m.processes.size(); ++q) {
          if (q == p || m.is_property(q)) continue;
          const auto& other = m.processes[q];
          for (std::size_t ui = 0; ui < other.transitions.size(); ++ui) {
            const auto& u = other.transitions[ui];
            if (!u.sync || u.sync->dir != SyncDir::Recv || u.sync->channel != t.sync->channel) continue;
            if (loc_index(q, u.src) != loc(s, q)) continue;
            if (!eval_bool(u.guard, m, s, q)) continue;
            State mid = s;
            apply(t.effects, s, mid, p);
            std::vector<Write> ws;
            for (std::size_t k = 0; k < t.sync->values.size(); ++k) {
              const VarDecl* d = nullptr;
              const auto slot = slot_of(u.sync->targets[k], mid, q, &d);
              ws.push_back({slot, ival(t.sync->values[k], s, p), d});
            }
            commit(ws, mid);
            State post = mid;
            apply(u.effects, mid, post, q);
            post.values[static_cast<std::size_t>(layout.location_slot(p))] = loc_index(p, t.dst);
            post.values[static_cast<std::size_t>(layout.location_slot(q))] = loc_index(q, u.dst);
            out.push_back({Label{static_cast<std::int16_t>(p), static_cast<std::int16_t>(ti),
                                 static_cast<std::int16_t>(q), static_cast<std::int16_t>(ui)},
                           post});
          }
        }
      }
    }
    if (m.tick) tick(s, out);
  }

  void tick(const State& s, std::vector<std::pair<Label, State>>& out) const {
    const auto& spec = *m.tick;
    const auto timers = *layout.global(spec.timers.at(0));
    std::vector<std::int64_t> t(static_cast<std::size_t>(timers.length));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = s.values[static_cast<std::size_t>(timers.offset) + i];
    if (std::any_of(t.begin(), t.end(), [](auto v) { return v <= 0; })) return;
    std::int64_t step = 1;
    std::int16_t which = kTickUnit;
    if (spec.mode == TickMode::Eedm) {
      std::int64_t least = spec.infinity;
      for (auto v : t)
        if (v != spec.infinity) least = std::min(least, v);
      if (least == spec.infinity) return;
      bool raised = false;
      if (spec.signals) {
        const auto sig = *layout.global(*spec.signals);
        for (std::int32_t i = 0; i < sig.length; ++i)
          raised = raised || s.values[static_cast<std::size_t>(sig.offset + i)] == 1;
      }
      which = raised ? kTickStandard : kTickLeap;
      step = raised ? 1 : least;
    }
    State post = s;
    for (std::size_t i = 0; i < t.size(); ++i)
      if (t[i] != spec.infinity) post.values[static_cast<std::size_t>(timers.offset) + i] = static_cast<std::int32_t>(t[i] - step);
    if (spec.mode == TickMode::Ledm) {
      const auto lb = *layout.global(spec.timers.at(1));
      for (std::int32_t i = 0; i < lb.length; ++i) {
        auto& v = post.values[static_cast<std::size_t>(lb.offset + i)];
        if (v != 0) v = static_cast<std::int32_t>(v - step);
      }
    }
    if (spec.now) {
      auto& v = post.values[static_cast<std::size_t>(layout.global(*spec.now)->offset)];
      v = static_cast<std::int32_t>((v + step) % spec.maximal);
    }
    out.push_back({Label{-1, which}, post});
  }

  std::vector<std::pair<Label, State>> all(const State& s) const {
    std::vector<std::pair<Label, State>> sys;
    if (!m.property) {
      system(s, sys);
      return sys;
    }
    const auto pp = *m.property;
    const auto& prop = m.processes[pp];
    std::vector<std::pair<Label, State>> out;
    std::vector<std::size_t> moves;
    for (std::size_t ti = 0; ti < prop.transitions.size(); ++ti)
      if (loc_index(pp, prop.transitions[ti].src) == loc(s, pp) && eval_bool(prop.transitions[ti].guard, m, s, pp))
        moves.push_back(ti);
    // no claim move: the product stops without looking at system steps
    if (moves.empty()) return out;
    system(s, sys);
    for (auto& [l, post] : sys)
      for (auto mv : moves) {
        auto lab = l;
        lab.property_transition = static_cast<std::int16_t>(mv);
        auto st = post;
        st.values[static_cast<std::size_t>(layout.location_slot(pp))] = loc_index(pp, prop.transitions[mv].dst);
        out.push_back({lab, st});
      }
    return out;
  }
};

}  // namespace

std::vector<std::pair<Label, State>> reference_successors(const Model& m, const State& s) {
  return Ref(m).all(s);
}

std::set<State> dfs_reachable(const Model& m, std::size_t limit) {
  Ref ref(m);
  std::set<State> seen;
  std::vector<State> stack{initial_state(m)};
  seen.insert(stack.back());
  while (!stack.empty()) {
    auto s = std::move(stack.back());
    stack.pop_back();
    for (auto& [l, t] : ref.all(s))
      if (seen.insert(t).second) {
        if (seen.size() > limit) throw std::runtime_error("dfs oracle limit exceeded");
        stack.push_back(std::move(t));
      }
  }
  return seen;
}

// ---------------------------------------------------------------------------
// Fischer oracle

FischerOracle fischer_oracle(const FischerParams& p) {
  // Per thread: phase (0 ncs .. 5 d) and a clock counting time since entering
  // the current timed phase, capped once no bound can be affected by it.
  enum { Ncs, A, B, C, Cs, D };
  const int n = p.n;
  const auto cap = std::max(p.db_u, p.dc_u) + 1;
  struct S {
    std::vector<int> phase, clock;
    int x = 0, c = 0;
    auto operator<=>(const S&) const = default;
  };
  S init;
  init.phase.assign(static_cast<std::size_t>(n), Ncs);
  init.clock.assign(static_cast<std::size_t>(n), 0);
  std::set<S> seen{init};
  std::deque<S> queue{init};
  FischerOracle r;
  auto push = [&](S s) {
    if (s.c >= 2) r.violated = true;
    if (seen.insert(s).second) queue.push_back(std::move(s));
  };
  while (!queue.empty()) {
    const S s = queue.front();
    queue.pop_front();
    bool can_wait = true;
    for (int i = 0; i < n; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const int id = i + 1;
      auto next = s;
      next.clock[ui] = 0;
      switch (s.phase[ui]) {
        case Ncs: next.phase[ui] = A; push(next); break;
        case A:
          if (s.x == 0) { next.phase[ui] = B; push(next); }
          break;
        case B:
          // write x no later than db_u after step a
          next.phase[ui] = C;
          next.x = id;
          push(next);
          if (s.clock[ui] >= p.db_u) can_wait = false;
          break;
        case C:
          if (s.clock[ui] >= p.dc_l) {
            if (s.x != id) { next.phase[ui] = A; push(next); }
            else { next.phase[ui] = Cs; next.c = s.c + 1; push(next); }
          }
          if (s.clock[ui] >= p.dc_u) can_wait = false;
          break;
        case Cs: next.phase[ui] = D; push(next); break;
        case D:
          next.phase[ui] = Ncs;
          next.x = 0;
          next.c = s.c - 1;
          push(next);
          break;
      }
    }
    if (can_wait) {
      auto next = s;
      for (int i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        if (s.phase[ui] == B || s.phase[ui] == C)
          next.clock[ui] = static_cast<int>(std::min<std::int64_t>(s.clock[ui] + 1, cap));
      }
      push(next);
    }
  }
  r.states = seen.size();
  return r;
}

// ---------------------------------------------------------------------------

StateGraph random_graph(std::mt19937_64& rng, std::size_t max_states) {
  const auto n = static_cast<std::size_t>(pick(rng, 1, static_cast<std::int64_t>(max_states)));
  const double density = std::uniform_real_distribution<double>(0.02, 0.2)(rng);
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  for (std::uint32_t a = 0; a < n; ++a)
    for (std::uint32_t b = 0; b < n; ++b)
      if (coin(rng, density)) edges.emplace_back(a, b);
  std::vector<bool> acc(n);
  for (std::size_t i = 0; i < n; ++i) acc[i] = coin(rng, 0.1);
  return StateGraph::from_edges(n, edges, acc);
}

PreemptiveReport analyse_preemptive(const std::vector<std::int64_t>& exec_units, unsigned workers) {
  const auto tm = gen_preemptive(static_cast<int>(exec_units.size()), exec_units);
  LoweringConfig cfg;
  cfg.method = TickMode::Eedm;
  cfg.include_now = true;
  Semantics sem(lower(tm, cfg));
  ExploreOptions opts;
  opts.workers = workers;
  const auto g = explore(sem, opts);
  const auto& m = sem.model();
  // lowering splits bounded locations, so indices differ between tasks
  std::vector<std::size_t> tasks;
  std::vector<std::int32_t> exec, next;
  auto index = [&](std::size_t p, const char* l) {
    return static_cast<std::int32_t>(*m.processes[p].location_index(l));
  };
  for (std::size_t p = 0; p < m.processes.size(); ++p)
    if (m.processes[p].name.rfind("T", 0) == 0) {
      tasks.push_back(p);
      exec.push_back(index(p, "s_Exec"));
      next.push_back(index(p, "s_Next"));
    }
  const auto deprived = index(tasks[0], "s_Deprived");

  PreemptiveReport r;
  r.states = g.size();
  std::vector<std::uint32_t> indeg(g.size());
  for (auto t : g.targets) ++indeg[t];
  std::vector<std::uint32_t> order;
  for (std::uint32_t i = 0; i < g.size(); ++i)
    if (!indeg[i]) order.push_back(i);
  for (std::size_t k = 0; k < order.size(); ++k)
    for (auto t : g.successors(order[k]))
      if (--indeg[t] == 0) order.push_back(t);
  if (order.size() != g.size()) {
    r.acyclic = false;
    return r;
  }
  // sets of accumulated task-0 execution time reaching each state
  std::vector<std::set<std::int64_t>> acc(g.size());
  acc[g.initial].insert(0);
  for (auto i : order) {
    const auto s = g.state(i);
    int executing = 0;
    for (std::size_t k = 0; k < tasks.size(); ++k) executing += sem.location(s, tasks[k]) == exec[k];
    if (executing > 1) ++r.double_exec_states;
    if (sem.location(s, tasks[0]) == deprived) r.low_deprived_seen = true;
    const bool low_exec = sem.location(s, tasks[0]) == exec[0];
    const auto out = g.successors(i);
    if (out.empty()) {
      ++r.maximal_states;
      for (std::size_t k = 0; k < tasks.size(); ++k) r.unfinished_at_end += sem.location(s, tasks[k]) != next[k];
      r.low_exec_totals.insert(acc[i].begin(), acc[i].end());
      r.end_times.insert(sem.global_value(s, "now"));
      continue;
    }
    for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const auto adv = low_exec ? sem.tick_advance(g.labels[e], s) : 0;
      for (auto v : acc[i]) acc[g.targets[e]].insert(v + adv);
    }
  }
  return r;
}

}  // namespace tdve::testkit
