#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "support.hpp"
#include "tdve/bench.hpp"
#include "tdve/explore.hpp"
#include "tdve/frontend.hpp"
#include "tdve/lowering.hpp"

using namespace tdve;

namespace {

LoweringConfig config(TickMode mode, bool now = false, std::int64_t maximal = std::int64_t{1} << 30) {
  LoweringConfig c;
  c.method = mode;
  c.include_now = now;
  c.maximal = maximal;
  c.infinity = std::min(c.infinity, maximal - 1);
  return c;
}

const Transition& find(const Process& p, const std::string& src, const std::string& dst) {
  for (const auto& t : p.transitions)
    if (t.src == src && t.dst == dst) return t;
  throw std::runtime_error("no transition " + src + " -> " + dst);
}

std::optional<Expr> assigned(const Transition& t, const std::string& array, std::int64_t index) {
  for (const auto& a : t.effects)
    if (a.target.name == array && a.target.index && *a.target.index == Expr::integer(index)) return a.value;
  return std::nullopt;
}

// a -> m unbounded, m -> z bounded [3, 7]
const char* kEntry = R"(
  process P { state a, m, z; init a; trans a -> m { }, m -> z { time [3, 7]; }; }
)";

// All `now` values at which `P` can take its bounded step, by exhaustive exploration.
std::set<std::int64_t> firing_times(const Model& m) {
  Semantics sem(m);
  const auto g = explore(sem);
  std::set<std::int64_t> out;
  for (std::size_t i = 0; i < g.size(); ++i)
    for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const auto& l = g.labels[e];
      if (l.is_tick()) continue;
      const auto& t = m.processes[static_cast<std::size_t>(l.process)].transitions[static_cast<std::size_t>(l.transition)];
      if (t.dst == "z") out.insert(sem.global_value(g.state(i), "now"));
    }
  return out;
}

std::set<std::int64_t> now_values(const Model& m) {
  Semantics sem(m);
  const auto g = explore(sem);
  std::set<std::int64_t> out;
  for (std::size_t i = 0; i < g.size(); ++i) out.insert(sem.global_value(g.state(i), "now"));
  return out;
}

}  // namespace

TEST(Ledm, NoBoundsKeepsStateCount) {
  auto tm = parse("int[0..3] x; process P { state a, b; init a; trans a -> b { effect x = x + 1; }, b -> a { guard x < 3; }; }");
  const auto plain = explore(tm.base);
  const auto timed = explore(lower(tm, config(TickMode::Ledm)));
  EXPECT_EQ(plain.size(), timed.size());
}

TEST(Ledm, EntryLoadsBothTimers) {
  auto m = lower(parse(kEntry), config(TickMode::Ledm));
  const auto& p = m.processes[0];
  const auto& enter = find(p, "a", "m");
  EXPECT_EQ(assigned(enter, "ubtimer", 0), Expr::integer(7));
  EXPECT_EQ(assigned(enter, "lbtimer", 0), Expr::integer(3));
  const auto& leave = find(p, "m", "z");
  EXPECT_NE(pretty(leave.guard).find("lbtimer[0] == 0"), std::string::npos);
  EXPECT_EQ(assigned(leave, "ubtimer", 0), Expr::integer(1'000'000));
  EXPECT_EQ(assigned(leave, "lbtimer", 0), Expr::integer(0));
  ASSERT_TRUE(m.tick);
  EXPECT_EQ(m.tick->timers, (std::vector<std::string>{"ubtimer", "lbtimer"}));
}

TEST(Ledm, FiresExactlyWithinWindow) {
  auto tm = parse("process P { state s, z; init s; trans s -> z { time [2, 5]; }; }");
  auto fired = firing_times(lower(tm, config(TickMode::Ledm, true, 64)));
  EXPECT_EQ(fired, (std::set<std::int64_t>{2, 3, 4, 5}));
}

TEST(Ledm, UpperOnlyWindow) {
  auto tm = parse("process P { state s, z; init s; trans s -> z { time [, 3]; }; }");
  auto fired = firing_times(lower(tm, config(TickMode::Ledm, true, 64)));
  EXPECT_EQ(fired, (std::set<std::int64_t>{0, 1, 2, 3}));
}

TEST(Eedm, SplitsLowerBoundedLocation) {
  auto m = lower(parse(kEntry), config(TickMode::Eedm));
  const auto& p = m.processes[0];
  EXPECT_EQ(p.locations, (std::vector<std::string>{"a", "m", "m_m2", "z"}));
  EXPECT_EQ(assigned(find(p, "a", "m"), "timer", 0), Expr::integer(3));
  const auto& bridge = find(p, "m", "m_m2");
  EXPECT_EQ(bridge.guard, eq(Expr::element("timer", Expr::integer(0)), Expr::integer(0)));
  EXPECT_EQ(assigned(bridge, "timer", 0), Expr::integer(4));
  EXPECT_EQ(assigned(find(p, "m_m2", "z"), "timer", 0), Expr::integer(1'000'000));
}

TEST(Eedm, NoBoundsKeepsStateCount) {
  auto tm = parse("int[0..3] x; process P { state a, b; init a; trans a -> b { effect x = x + 1; }, b -> a { guard x < 3; }; }");
  EXPECT_EQ(explore(tm.base).size(), explore(lower(tm, config(TickMode::Eedm))).size());
}

TEST(Eedm, LeapsOnlyToWindowEdges) {
  // One-shot window [2, 5]: time only stops at 0, 2 and 5.
  auto once = parse("process P { state s, z; init s; trans s -> z { time [2, 5]; }; }");
  auto m = lower(once, config(TickMode::Eedm, true, 64));
  EXPECT_EQ(now_values(m), (std::set<std::int64_t>{0, 2, 5}));
  EXPECT_EQ(firing_times(m), (std::set<std::int64_t>{2, 5}));
}

TEST(Eedm, RepeatedWindowReachesSumsOfEdges) {
  // Re-entering the window after each firing: reachable instants are the sums
  // of 2s and 5s (mod 64), where the window's opening and closing edges lie.
  auto loop = parse("process P { state s, w; init s; trans s -> w { time [2, 5]; }, w -> s { }; }");
  auto m = lower(loop, config(TickMode::Eedm, true, 64));
  std::set<std::int64_t> expected;
  for (int a = 0; a < 64; ++a)
    for (int b = 0; b < 64; ++b) expected.insert((2 * a + 5 * b) % 64);
  EXPECT_EQ(now_values(m), expected);
}

TEST(Lowering, RejectsBoundAtInfinity) {
  auto tm = parse("process P { state s, z; init s; trans s -> z { time [, 50]; }; }");
  LoweringConfig c = config(TickMode::Ledm);
  c.infinity = 50;
  c.maximal = 100;
  EXPECT_THROW(lower(tm, c), LoweringError);
  c.method = TickMode::Eedm;
  EXPECT_THROW(lower(tm, c), LoweringError);
}

TEST(Lowering, RejectsSynchronisingBoundedTransition) {
  TimedModel tm = parse("channel go; process P { state s, z; init s; trans s -> z { sync go!; }; } process Q { state s; init s; trans s -> s { sync go?; }; }");
  tm.bounds[{0, 0}] = TimeBound{1, 2};
  EXPECT_THROW(lower(tm, config(TickMode::Ledm)), LoweringError);
  EXPECT_THROW(lower(tm, config(TickMode::Eedm)), LoweringError);
}

TEST(Lowering, RejectsConflictingBoundsInOneLocation) {
  auto tm = parse("process P { state s, y, z; init s; trans s -> y { time [1, 2]; }, s -> z { time [1, 3]; }; }");
  EXPECT_THROW(lower(tm, config(TickMode::Ledm)), LoweringError);
  auto same = parse("process P { state s, y, z; init s; trans s -> y { time [1, 3]; }, s -> z { time [1, 3]; }; }");
  EXPECT_NO_THROW(lower(same, config(TickMode::Ledm)));
}

TEST(Lowering, RejectsReservedNames) {
  auto tm = parse("int[0..3] ubtimer; process P { state s, z; init s; trans s -> z { time [1, 2]; }; }");
  EXPECT_THROW(lower(tm, config(TickMode::Ledm)), LoweringError);
  auto clash = parse("int[0..3] now; process P { state s, z; init s; trans s -> z { time [1, 2]; }; }");
  EXPECT_THROW(lower(clash, config(TickMode::Eedm, true)), LoweringError);
}

TEST(Ledm, TimerInvariantsOnFischer) {
  auto m = lower(gen_fischer(3, 2, 3, 4), config(TickMode::Ledm));
  Semantics sem(m);
  const auto g = explore(sem);
  const auto inf = m.tick->infinity;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto s = g.state(i);
    bool urgent = false;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto ub = sem.global_value(s, "ubtimer", k);
      const auto lb = sem.global_value(s, "lbtimer", k);
      EXPECT_GE(lb, 0);
      EXPECT_TRUE(ub == inf || lb <= ub);
      urgent = urgent || ub == 0;
    }
    bool ticks = false;
    for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) ticks = ticks || g.labels[e].is_tick();
    EXPECT_EQ(ticks, !urgent);
  }
}

TEST(Eedm, TimerInvariantsOnFischer) {
  FischerParams p{3, 2, 3, 5};
  p.observe_c = true;
  auto m = lower(gen_fischer(p), config(TickMode::Eedm));
  Semantics sem(m);
  const auto g = explore(sem);
  const auto inf = m.tick->infinity;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto s = g.state(i);
    bool zero = false, active = false, raised = false;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto t = sem.global_value(s, "timer", k);
      EXPECT_GE(t, 0);
      zero = zero || t == 0;
      active = active || t != inf;
      raised = raised || sem.global_value(s, "signal", k) == 1;
    }
    for (auto e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const auto& l = g.labels[e];
      if (!l.is_tick()) continue;
      EXPECT_FALSE(zero);
      EXPECT_TRUE(active);
      EXPECT_EQ(l.transition, raised ? kTickStandard : kTickLeap);
    }
  }
}

TEST(Eedm, LeapsAreMultiplesOfBoundGcd) {
  std::mt19937_64 rng(8);
  for (auto [db, dl, du] : {std::tuple{4, 4, 8}, std::tuple{2, 4, 6}, std::tuple{3, 6, 9}}) {
    const auto gcd = std::gcd(std::gcd(db, dl), du - dl == 0 ? dl : du - dl);
    auto m = lower(gen_fischer(3, db, dl, du), config(TickMode::Eedm, true));
    Semantics sem(m);
    for (int trace = 0; trace < 50; ++trace) {
      State s = sem.initial();
      for (int step = 0; step < 200; ++step) {
        auto next = sem.successors(s);
        if (next.empty()) break;
        const auto& [l, t] = next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)];
        const auto before = sem.global_value(s.values, "now");
        const auto after = sem.global_value(t.values, "now");
        if (l.is_tick()) {
          EXPECT_EQ(after - before, sem.tick_advance(l, s.values));
          EXPECT_EQ((after - before) % gcd, 0) << db << "," << dl << "," << du;
        } else {
          EXPECT_EQ(after, before);
        }
        s = t;
      }
    }
  }
}

TEST(Agreement, LedmAndEedmStandardVerdicts) {
  for (int n : {2, 3}) {
    for (std::int64_t db = 1; db <= 5; ++db)
      for (std::int64_t dl = 1; dl <= 5; ++dl)
        for (std::int64_t du = dl; du <= 5; ++du) {
          if (n == 3 && (db + dl + du) % 2) continue;  // thin the larger instance
          FischerParams p{n, db, dl, du};
          const auto ledm = run_fischer(p, Method::Ledm);
          const auto std_ = run_fischer(p, Method::EedmStandard);
          const auto leap = run_fischer(p, Method::EedmLeaping);
          EXPECT_EQ(ledm.verdict, std_.verdict) << n << " " << db << " " << dl << " " << du;
          EXPECT_EQ(ledm.verdict, leap.verdict) << n << " " << db << " " << dl << " " << du;
        }
  }
}
