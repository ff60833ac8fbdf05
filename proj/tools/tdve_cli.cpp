// Command-line front end: parse, lower, check, bench, experiment.
//
// Exit status: 0 property holds (or command succeeded), 1 property violated,
// 2 usage, parse, modelling or resource error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "tdve/bench.hpp"
#include "tdve/cycle.hpp"
#include "tdve/explore.hpp"
#include "tdve/frontend.hpp"
#include "tdve/lowering.hpp"

namespace {

using namespace tdve;

constexpr int kHolds = 0;
constexpr int kViolated = 1;
constexpr int kError = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

TimedModel load(const std::string& path) {
  SourceFile src;
  try {
    src = read_source(path);
  } catch (const ParseError&) {
    throw UsageError(path + ": cannot open file");
  }
  TimedModel tm;
  try {
    tm = parse(src);
  } catch (const ParseError& e) {
    throw UsageError(e.format(path));
  }
  if (auto diags = validate(tm); !diags.empty()) {
    std::string msg;
    for (const auto& d : diags) msg += (msg.empty() ? "" : "\n") + to_string(d, path);
    throw UsageError(msg);
  }
  return tm;
}

struct LowerOpts {
  std::string method = "ledm";
  bool now = false;
  std::int64_t infinity = 1'000'000;
  std::int64_t maximal = std::int64_t{1} << 30;
};

void add_lower_flags(CLI::App* cmd, LowerOpts& o) {
  cmd->add_option("--method", o.method, "time encoding")
      ->check(CLI::IsMember({"ledm", "eedm", "none"}))
      ->capture_default_str();
  cmd->add_flag("--now", o.now, "keep the global `now` variable");
  cmd->add_option("--infinity", o.infinity, "timer value meaning inactive")->capture_default_str();
  cmd->add_option("--maximal", o.maximal, "modulus of `now`")->capture_default_str();
}

Model lower_with(const TimedModel& tm, const LowerOpts& o, const std::string& path) {
  if (o.method == "none") {
    if (!tm.bounds.empty()) throw UsageError(path + ": model has time clauses; pick --method");
    return tm.base;
  }
  LoweringConfig cfg;
  cfg.method = o.method == "eedm" ? TickMode::Eedm : TickMode::Ledm;
  if (o.now) cfg.include_now = true;
  cfg.infinity = o.infinity;
  cfg.maximal = o.maximal;
  try {
    return lower(tm, cfg);
  } catch (const LoweringError& e) {
    throw UsageError(to_string(Diagnostic{e.loc(), e.what()}, path));
  }
}

void print_stats(const ExplorationStats& s) {
  std::cerr << "states " << s.states << ", transitions " << s.transitions << ", deadlocks "
            << s.deadlocks << ", " << s.time_ms << " ms, peak rss " << s.mem_bytes << " bytes\n";
}

std::optional<Method> parse_method(const std::string& s) {
  if (s == "ledm") return Method::Ledm;
  if (s == "eedm-standard") return Method::EedmStandard;
  if (s == "eedm-leaping") return Method::EedmLeaping;
  return std::nullopt;
}

std::vector<Method> methods_for(const std::string& s) {
  if (s == "all") return {Method::Ledm, Method::EedmStandard, Method::EedmLeaping};
  return {*parse_method(s)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explicit-state checker for timed guarded-command models"};
  app.require_subcommand(1);

  // parse
  std::string file;
  auto* parse_cmd = app.add_subcommand("parse", "parse and validate a model, print it back");
  parse_cmd->add_option("file", file, "model file (.tdve)")->required();

  // lower
  LowerOpts lower_opts;
  auto* lower_cmd = app.add_subcommand("lower", "print the untimed model produced by a time encoding");
  lower_cmd->add_option("file", file, "model file (.tdve)")->required();
  add_lower_flags(lower_cmd, lower_opts);

  // check
  LowerOpts check_lower;
  std::string property, claim_file, algorithm, trace_path;
  unsigned workers = 1;
  std::uint64_t max_states = 50'000'000;
  auto* check_cmd = app.add_subcommand("check", "verify a property");
  check_cmd->add_option("file", file, "model file (.tdve)")->required();
  add_lower_flags(check_cmd, check_lower);
  auto* prop_opt = check_cmd->add_option("--property", property, "G(e), F(e) or G(p -> F(q))");
  auto* claim_opt = check_cmd->add_option("--claim", claim_file, "file with a claim process");
  prop_opt->excludes(claim_opt);
  check_cmd->add_option("--algorithm", algorithm, "owcty, map or oracle")
      ->check(CLI::IsMember({"owcty", "map", "oracle"}));
  check_cmd->add_option("--workers", workers, "exploration threads")->check(CLI::Range(1u, 256u));
  check_cmd->add_option("--max-states", max_states, "state budget")->capture_default_str();
  check_cmd->add_option("--trace", trace_path, "counterexample file (default FILE.trace)");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "benchmark models");
  bench_cmd->require_subcommand(1);
  FischerParams fp;
  std::string fmethod = "all";
  bool emit = false;
  auto* bf = bench_cmd->add_subcommand("fischer", "Fischer's mutual exclusion protocol");
  bf->add_option("--n", fp.n, "threads")->capture_default_str()->check(CLI::Range(2, 64));
  bf->add_option("--db-u", fp.db_u, "upper bound of step b")->capture_default_str();
  bf->add_option("--dc-l", fp.dc_l, "lower bound of step c")->capture_default_str();
  bf->add_option("--dc-u", fp.dc_u, "upper bound of step c")->capture_default_str();
  bf->add_option("--method", fmethod, "ledm, eedm-standard, eedm-leaping or all")
      ->check(CLI::IsMember({"ledm", "eedm-standard", "eedm-leaping", "all"}))
      ->capture_default_str();
  bf->add_option("--workers", workers, "exploration threads")->check(CLI::Range(1u, 256u));
  bf->add_flag("--emit", emit, "print the timed model source instead of checking it");
  std::vector<std::int64_t> exec_units{5, 2};
  auto* bp = bench_cmd->add_subcommand("preemptive", "pre-emptive scheduling of prioritised tasks");
  bp->add_option("--exec", exec_units, "execution time per task, lowest priority first")
      ->delimiter(',')
      ->capture_default_str();
  bp->add_option("--workers", workers, "exploration threads")->check(CLI::Range(1u, 256u));
  bp->add_flag("--emit", emit, "print the timed model source instead of exploring it");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "tabulate state spaces per encoding (CSV)");
  int which = 1, en = 3;
  std::int64_t from = 0, to = 0;
  std::string out_path;
  exp_cmd->add_option("which", which, "1: all bounds equal to T; 2: db_u = dc_l = 4, vary dc_u")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  exp_cmd->add_option("--n", en, "threads")->capture_default_str()->check(CLI::Range(2, 64));
  exp_cmd->add_option("--from", from, "first T or dc_u (default 2 or 5)");
  exp_cmd->add_option("--to", to, "last T or dc_u (default 9 or 12)");
  exp_cmd->add_option("--workers", workers, "exploration threads")->check(CLI::Range(1u, 256u));
  exp_cmd->add_option("--out", out_path, "CSV file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kError;
  }

  try {
    if (*parse_cmd) {
      std::cout << pretty(load(file));
      return kHolds;
    }
    if (*lower_cmd) {
      std::cout << pretty_lowered(lower_with(load(file), lower_opts, file));
      return kHolds;
    }
    if (*check_cmd) {
      auto tm = load(file);
      auto model = lower_with(tm, check_lower, file);
      ExploreOptions opts{.workers = workers, .max_states = max_states};
      std::optional<CycleAlgorithm> alg;
      if (!algorithm.empty()) alg = parse_algorithm(algorithm);

      std::optional<Expr> bad;
      if (!property.empty()) {
        Formula f;
        try {
          f = parse_formula(property);
        } catch (const ParseError& e) {
          throw UsageError(e.format("--property"));
        }
        if (f.kind == PropertyTemplate::Always && !alg) {
          bad = !f.p;
        } else {
          if (model.property) throw UsageError(file + ": model already declares a property process");
          model = with_property(std::move(model), build_property(f));
        }
      } else if (!claim_file.empty()) {
        SourceFile src;
        try {
          src = read_source(claim_file);
        } catch (const ParseError&) {
          throw UsageError(claim_file + ": cannot open file");
        }
        Process claim;
        try {
          claim = parse_process(src.text);
        } catch (const ParseError& e) {
          throw UsageError(e.format(claim_file));
        }
        if (model.property) throw UsageError(file + ": model already declares a property process");
        model = with_property(std::move(model), std::move(claim));
      } else if (!model.property) {
        throw UsageError("check needs --property or --claim");
      }
      if (auto diags = validate(model); !diags.empty())
        throw UsageError(to_string(diags.front(), file));

      Semantics sem(model);
      Verdict v = bad ? check_safety(sem, *bad, opts)
                      : check_liveness(sem, alg.value_or(CycleAlgorithm::Owcty), opts);
      print_stats(v.stats);
      if (v.holds) {
        std::cout << "holds\n";
        return kHolds;
      }
      if (trace_path.empty()) trace_path = std::filesystem::path(file).filename().string() + ".trace";
      std::ofstream(trace_path) << format_trace(sem, v.trace, v.cycle_start);
      std::cout << "violated (trace of " << v.trace.size() << " states written to " << trace_path
                << ")\n";
      return kViolated;
    }
    if (bf->parsed()) {
      if (emit) {
        std::cout << pretty(gen_fischer(fp));
        return kHolds;
      }
      std::cout << csv_header() << '\n';
      bool all_hold = true;
      for (auto m : methods_for(fmethod)) {
        auto row = run_fischer(fp, m, ExploreOptions{.workers = workers});
        all_hold = all_hold && row.verdict == "holds";
        std::cout << csv_row(row) << '\n';
      }
      return all_hold ? kHolds : kViolated;
    }
    if (bp->parsed()) {
      auto tm = gen_preemptive(static_cast<int>(exec_units.size()), exec_units);
      if (emit) {
        std::cout << pretty(tm);
        return kHolds;
      }
      LoweringConfig cfg{.method = TickMode::Eedm, .include_now = true};
      Semantics sem(lower(tm, cfg));
      ExplorationStats st;
      auto g = explore(sem, ExploreOptions{.workers = workers}, &st);
      print_stats(st);
      std::size_t clashes = 0;
      // lowering may split locations, so look indices up per process
      std::vector<std::int32_t> exec;
      for (const auto& proc : sem.model().processes) {
        auto at = proc.location_index("s_Exec");
        exec.push_back(at ? static_cast<std::int32_t>(*at) : -1);
      }
      for (std::size_t i = 0; i < g.size(); ++i) {
        int running = 0;
        for (std::size_t p = 0; p < exec.size(); ++p) running += sem.location(g.state(i), p) == exec[p];
        clashes += running > 1;
      }
      std::cout << "states " << g.size() << ", states with two tasks executing " << clashes << '\n';
      return clashes ? kViolated : kHolds;
    }
    if (*exp_cmd) {
      if (from == 0) from = which == 1 ? 2 : 5;
      if (to == 0) to = which == 1 ? 9 : 12;
      ExploreOptions opts{.workers = workers};
      auto rows = which == 1 ? run_experiment1(en, from, to, opts) : run_experiment2(en, from, to, opts);
      if (out_path.empty()) {
        write_csv(std::cout, rows);
      } else {
        std::ofstream out(out_path);
        write_csv(out, rows);
      }
      return kHolds;
    }
  } catch (const UsageError& e) {
    std::cerr << e.what() << '\n';
    return kError;
  } catch (const ModelError& e) {
    std::cerr << file << ": error: " << e.what() << '\n';
    if (!e.state_text().empty()) std::cerr << "  in state " << e.state_text() << '\n';
    return kError;
  } catch (const ResourceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    print_stats(e.partial());
    return kError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kError;
  }
  return kError;
}
