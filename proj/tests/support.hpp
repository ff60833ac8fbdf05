#pragma once

// Generators and independent reference implementations shared by the unit
// tests and the acceptance runner.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "tdve/bench.hpp"
#include "tdve/explore.hpp"
#include "tdve/model.hpp"

namespace tdve::testkit {

/// Random timed model that validates by construction. Effects, indices and
/// payloads are wrapped into range, so executing it never raises ModelError.
TimedModel random_timed_model(std::mt19937_64& rng);

/// Random perturbation of `text` (byte flips, splices, truncation, token noise).
std::string mutate(const std::string& text, std::mt19937_64& rng);

/// Successors computed with the tree-walking evaluator, independent of the
/// compiled engine. Same order and labels as Semantics::successors.
std::vector<std::pair<Label, State>> reference_successors(const Model& m, const State& s);

/// Reachable states by depth-first search over reference_successors.
std::set<State> dfs_reachable(const Model& m, std::size_t limit = 200'000);

/// Fischer's protocol with a per-thread clock that counts up since the last
/// step a or step b; no timers, no lowering. Returns true when two threads can
/// be in the critical section together.
struct FischerOracle {
  bool violated = false;
  std::size_t states = 0;
};
FischerOracle fischer_oracle(const FischerParams& p);

/// Random directed graph for cycle-detector checks.
StateGraph random_graph(std::mt19937_64& rng, std::size_t max_states = 200);

/// Exhaustive analysis of the lowered pre-emptive model (eedm, `now` kept).
struct PreemptiveReport {
  bool acyclic = true;
  std::size_t states = 0;
  std::size_t maximal_states = 0;         // states without successors
  std::size_t unfinished_at_end = 0;      // maximal states where a task is not in s_Next
  std::size_t double_exec_states = 0;     // states with two tasks in s_Exec
  std::set<std::int64_t> low_exec_totals;  // time task 0 spent in s_Exec, per maximal path
  std::set<std::int64_t> end_times;        // value of `now` at maximal states
  bool low_deprived_seen = false;
};
PreemptiveReport analyse_preemptive(const std::vector<std::int64_t>& exec_units, unsigned workers = 1);

}  // namespace tdve::testkit
