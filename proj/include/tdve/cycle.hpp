#pragma once

// Accepting-cycle detection over explored product graphs, and the property
// templates used to build them.

#include <optional>
#include <string_view>
#include <vector>

#include "tdve/explore.hpp"
#include "tdve/model.hpp"

namespace tdve {

enum class CycleAlgorithm { Owcty, Map, Oracle };

const char* to_string(CycleAlgorithm a);
std::optional<CycleAlgorithm> parse_algorithm(std::string_view name);

/// One-way catch them young: repeatedly restrict to states reachable from
/// accepting states and drop states without predecessors.
bool owcty(const StateGraph& g);

/// Maximal accepting predecessors, ordered by canonical state encoding.
bool map_cycle(const StateGraph& g);

/// Reference detector based on strongly connected components.
bool scc_cycle(const StateGraph& g);

/// Lasso through an accepting state: `prefix` leads from the initial state to
/// `loop.front()`, and `loop` returns to it. Empty when there is none.
struct Lasso {
  std::vector<std::uint32_t> prefix_edges;  // edge indices
  std::vector<std::uint32_t> loop_edges;
  std::uint32_t accepting_state = 0;
  bool found = false;
};

Lasso find_lasso(const StateGraph& g);

bool has_accepting_cycle(const StateGraph& g, CycleAlgorithm algorithm);

// ---------------------------------------------------------------------------
// Properties. Each template yields a claim process that accepts exactly the
// runs violating the property; guards read the state before each step.

enum class PropertyTemplate {
  Always,      // G p
  Eventually,  // F p
  Response,    // G(p -> F q)
};

struct Formula {
  PropertyTemplate kind = PropertyTemplate::Always;
  Expr p;
  std::optional<Expr> q;
};

/// Accepts `G(e)`, `F(e)` and `G(p -> F(q))`. Throws ParseError.
Formula parse_formula(std::string_view text);

Process build_property(const Formula& f);
Process build_property(PropertyTemplate kind, const Expr& p, const std::optional<Expr>& q = {});

/// Adds `claim` to `model` as its property process.
Model with_property(Model model, Process claim);

/// Explores the product and searches for an accepting cycle. The returned
/// trace is a lasso whose loop starts at `cycle_start`.
Verdict check_liveness(const Semantics& product, CycleAlgorithm algorithm,
                       const ExploreOptions& opts = {});
Verdict check_liveness(const Model& product, CycleAlgorithm algorithm, unsigned workers = 1);

}  // namespace tdve
