#pragma once

// Benchmark generators (Fischer's protocol, pre-emptive scheduling) and the
// experiment drivers that tabulate state-space sizes per time encoding.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdve/explore.hpp"
#include "tdve/lowering.hpp"
#include "tdve/model.hpp"

namespace tdve {

struct FischerParams {
  int n = 3;
  std::int64_t db_u = 2;  // step b at most this long after step a
  std::int64_t dc_l = 2;  // step c at least this long after step b
  std::int64_t dc_u = 2;  // and at most this long
  bool observe_c = false;  // record the instant of step c (drives eedm standard mode)
  bool observe_b = false;  // record the instant of step b
};

/// Threads P1..Pn over shared `x` (0 or a thread id) and critical-section
/// counter `c`. Locations ncs, a, b, c, cs, d. The step-b write carries the
/// upper bound db_u; both outcomes of step c carry [dc_l, dc_u].
TimedModel gen_fischer(const FischerParams& p);
TimedModel gen_fischer(int n, std::int64_t db_u, std::int64_t dc_l, std::int64_t dc_u);

/// `c >= 2`
Expr fischer_bad();

struct PreemptiveParams {
  // exec_units[k] is the resource time needed by task k; task k has priority
  // tag k+1, so later tasks pre-empt earlier ones.
  std::vector<std::int64_t> exec_units;
  // Arrival window of every task after the first, relative to start-up.
  // Zero means [1, max(1, exec_units[0] - 1)], i.e. during task 0's run.
  std::int64_t arrival_lo = 0;
  std::int64_t arrival_hi = 0;
  std::int64_t infinity = 1'000'000;
};

/// Tasks T0..Tn-1 sharing `isROccupied` (0 = free, else the owner's tag).
/// Locations s_Idle, s_i, s_Exec, s_Deprived, s_Next. Executing tasks keep
/// their remaining time in timer[k] with signal[k] raised; a pre-empted task
/// stores it in its local `timeToGo`. To be lowered with eedm.
TimedModel gen_preemptive(const PreemptiveParams& p);
TimedModel gen_preemptive(int n_tasks, std::vector<std::int64_t> exec_units);

enum class Method { Ledm, EedmStandard, EedmLeaping };

const char* method_name(Method m);
const char* mode_name(Method m);

/// Fischer model for `m`: observe on step c for standard mode, none otherwise.
/// `now` is excluded so that the state space is finite.
Model lower_fischer(FischerParams p, Method m, const LoweringConfig& base = {});

struct ExperimentRow {
  std::string method;
  std::string mode;
  FischerParams params;
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  double time_ms = 0;
  std::uint64_t mem_bytes = 0;
  std::string verdict;  // holds | violated | resource
};

/// Checks G(c < 2) on one lowered Fischer instance.
ExperimentRow run_fischer(const FischerParams& p, Method m, const ExploreOptions& opts = {});

/// Bounds all equal to T for T in [t_lo, t_hi].
std::vector<ExperimentRow> run_experiment1(int n, std::int64_t t_lo, std::int64_t t_hi,
                                           const ExploreOptions& opts = {});
/// db_u = dc_l = 4, dc_u in [u_lo, u_hi].
std::vector<ExperimentRow> run_experiment2(int n, std::int64_t u_lo, std::int64_t u_hi,
                                           const ExploreOptions& opts = {});

std::string csv_header();
std::string csv_row(const ExperimentRow& r);
void write_csv(std::ostream& os, const std::vector<ExperimentRow>& rows);

}  // namespace tdve
