#pragma once

// Successor semantics, exhaustive exploration and safety checking.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdve/model.hpp"
#include "tdve/state.hpp"

namespace tdve {

/// Identifies one product step. `process` is -1 for the clock; a rendezvous
/// names the sender in (process, transition) and the receiver in partner*.
struct Label {
  std::int16_t process = -1;
  std::int16_t transition = 0;
  std::int16_t partner = -1;
  std::int16_t partner_transition = -1;
  std::int16_t property_transition = -1;

  bool is_tick() const { return process < 0; }
  friend bool operator==(const Label&, const Label&) = default;
};

/// Clock transitions. Ledm has only kTickUnit; eedm uses kTickLeap and,
/// when signals exist, kTickStandard.
inline constexpr std::int16_t kTickUnit = 0;
inline constexpr std::int16_t kTickLeap = 0;
inline constexpr std::int16_t kTickStandard = 1;

class CompiledExpr;

/// Compiled operational semantics of a Model. Immutable and shareable across
/// threads once constructed.
class Semantics {
 public:
  /// Throws ModelError when the model does not validate.
  explicit Semantics(const Model& model);
  ~Semantics();
  Semantics(const Semantics&) = delete;
  Semantics& operator=(const Semantics&) = delete;

  const Model& model() const;
  std::size_t width() const;
  State initial() const;

  /// Full interleaving successors in deterministic order. Effects that leave a
  /// variable's range or index outside an array throw ModelError.
  void successors(std::span<const std::int32_t> state, std::vector<Label>& labels,
                  std::vector<std::int32_t>& out) const;
  std::vector<std::pair<Label, State>> successors(const State& s) const;

  bool accepting(std::span<const std::int32_t> state) const;

  /// Compiles an expression over globals and constants.
  CompiledExpr compile(const Expr& e) const;

  std::string label_text(const Label& l) const;
  std::string state_text(std::span<const std::int32_t> state) const;

  /// Amount by which a clock step from `state` advances time (0 for system steps).
  std::int64_t tick_advance(const Label& l, std::span<const std::int32_t> state) const;

  /// Location index of process `p` in `state`.
  std::int32_t location(std::span<const std::int32_t> state, std::size_t p) const;
  /// Value of global scalar or array element.
  std::int32_t global_value(std::span<const std::int32_t> state, const std::string& name,
                            std::size_t element = 0) const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

class CompiledExpr {
 public:
  CompiledExpr();
  ~CompiledExpr();
  CompiledExpr(CompiledExpr&&) noexcept;
  CompiledExpr& operator=(CompiledExpr&&) noexcept;
  std::int64_t operator()(std::span<const std::int32_t> state) const;

  struct Code;

 private:
  friend class Semantics;
  std::unique_ptr<Code> code_;
};

/// Free-function form of Semantics::successors.
std::vector<std::pair<Label, State>> successors(const Model& model, const State& s);

struct ExplorationStats {
  std::uint64_t states = 0;
  std::uint64_t transitions = 0;
  std::uint64_t deadlocks = 0;
  double time_ms = 0;
  std::uint64_t mem_bytes = 0;  // peak resident set size, best effort
};

/// Explored reachable graph. States are numbered in breadth-first discovery
/// order following successor order, so numbering is independent of the
/// number of workers used to build it. The initial state is 0.
struct StateGraph {
  std::size_t width = 0;
  std::vector<std::int32_t> words;
  std::vector<std::uint64_t> offsets{0};  // CSR: edges of i are [offsets[i], offsets[i+1])
  std::vector<std::uint32_t> targets;
  std::vector<Label> labels;
  std::vector<bool> accepting;
  std::uint32_t initial = 0;

  std::size_t size() const { return offsets.size() - 1; }
  std::size_t edge_count() const { return targets.size(); }
  std::span<const std::int32_t> state(std::size_t i) const {
    return {words.data() + i * width, width};
  }
  std::span<const std::uint32_t> successors(std::size_t i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }

  /// Builds a plain graph (one-word states equal to their index), for tests.
  static StateGraph from_edges(std::size_t n, const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                               const std::vector<bool>& accepting);
};

class ResourceError : public std::runtime_error {
 public:
  ResourceError(const std::string& what, ExplorationStats partial)
      : std::runtime_error(what), partial_(partial) {}
  const ExplorationStats& partial() const { return partial_; }

 private:
  ExplorationStats partial_;
};

struct ExploreOptions {
  unsigned workers = 1;
  std::uint64_t max_states = 50'000'000;
};

StateGraph explore(const Semantics& sem, const ExploreOptions& opts = {},
                   ExplorationStats* stats = nullptr);
StateGraph explore(const Model& model, unsigned workers = 1, ExplorationStats* stats = nullptr);

struct TraceStep {
  State state;
  std::optional<Label> next;  // edge taken to the following step
};

struct Verdict {
  bool holds = true;
  std::vector<TraceStep> trace;        // empty when the property holds
  std::optional<std::size_t> cycle_start;  // liveness: trace[cycle_start..] repeats
  ExplorationStats stats;
};

/// Breadth-first path from the initial state to `target`.
std::vector<TraceStep> shortest_path(const StateGraph& g, std::uint32_t target);

/// Checks that no reachable state satisfies `bad` (a boolean over globals).
Verdict check_safety(const Semantics& sem, const Expr& bad, const ExploreOptions& opts = {});
Verdict check_safety(const Model& model, const Expr& bad, unsigned workers = 1);

/// Writes `#k <state> --(<label>)-->` lines.
std::string format_trace(const Semantics& sem, const std::vector<TraceStep>& trace,
                         std::optional<std::size_t> cycle_start = std::nullopt);

/// Replays a trace through successors(); returns an empty string on success,
/// otherwise a description of the first mismatch.
std::string replay_trace(const Semantics& sem, const std::vector<TraceStep>& trace);

/// Reads back a trace written by format_trace and replays it from the initial state.
std::string replay_trace_text(const Semantics& sem, const std::string& text);

std::uint64_t peak_rss_bytes();

}  // namespace tdve
