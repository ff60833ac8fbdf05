#include "tdve/cycle.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <string>

#include "tdve/frontend.hpp"

namespace tdve {

const char* to_string(CycleAlgorithm a) {
  switch (a) {
    case CycleAlgorithm::Owcty: return "owcty";
    case CycleAlgorithm::Map: return "map";
    case CycleAlgorithm::Oracle: return "oracle";
  }
  return "?";
}

std::optional<CycleAlgorithm> parse_algorithm(std::string_view name) {
  if (name == "owcty") return CycleAlgorithm::Owcty;
  if (name == "map") return CycleAlgorithm::Map;
  if (name == "oracle" || name == "scc") return CycleAlgorithm::Oracle;
  return std::nullopt;
}

namespace {

std::vector<char> reachable(const StateGraph& g) {
  std::vector<char> seen(g.size(), 0);
  if (g.size() == 0) return seen;
  std::vector<std::uint32_t> queue{g.initial};
  seen[g.initial] = 1;
  for (std::size_t i = 0; i < queue.size(); ++i)
    for (auto w : g.successors(queue[i]))
      if (!seen[w]) {
        seen[w] = 1;
        queue.push_back(w);
      }
  return seen;
}

}  // namespace

bool owcty(const StateGraph& g) {
  const std::size_t n = g.size();
  std::vector<char> in = reachable(g);
  std::vector<std::uint32_t> queue;
  std::vector<std::uint32_t> indeg(n);
  std::size_t live = n;
  while (true) {
    const std::size_t before = live;
    // keep only states reachable from accepting ones
    std::vector<char> reach(n, 0);
    queue.clear();
    for (std::uint32_t v = 0; v < n; ++v)
      if (in[v] && g.accepting[v]) {
        reach[v] = 1;
        queue.push_back(v);
      }
    for (std::size_t i = 0; i < queue.size(); ++i)
      for (auto w : g.successors(queue[i]))
        if (in[w] && !reach[w]) {
          reach[w] = 1;
          queue.push_back(w);
        }
    in.swap(reach);
    live = queue.size();
    // drop states without predecessors
    std::fill(indeg.begin(), indeg.end(), 0);
    for (std::uint32_t v = 0; v < n; ++v)
      if (in[v])
        for (auto w : g.successors(v))
          if (in[w]) ++indeg[w];
    queue.clear();
    for (std::uint32_t v = 0; v < n; ++v)
      if (in[v] && indeg[v] == 0) queue.push_back(v);
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const auto v = queue[i];
      in[v] = 0;
      --live;
      for (auto w : g.successors(v))
        if (in[w] && --indeg[w] == 0) queue.push_back(w);
    }
    if (live == 0) return false;
    if (live == before) return true;
  }
}

bool map_cycle(const StateGraph& g) {
  const std::size_t n = g.size();
  const auto seen = reachable(g);
  std::vector<std::uint32_t> acc;
  for (std::uint32_t v = 0; v < n; ++v)
    if (g.accepting[v] && seen[v]) acc.push_back(v);
  std::sort(acc.begin(), acc.end(), [&](std::uint32_t a, std::uint32_t b) {
    auto x = g.state(a);
    auto y = g.state(b);
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  });
  // rank 0 means "no accepting predecessor"
  std::vector<std::uint32_t> rank(n, 0);
  for (std::size_t i = 0; i < acc.size(); ++i) rank[acc[i]] = static_cast<std::uint32_t>(i + 1);
  std::vector<char> live(n, 0);
  for (auto v : acc) live[v] = 1;

  std::vector<std::uint32_t> map(n);
  std::deque<std::uint32_t> work;
  std::vector<char> queued(n);
  while (true) {
    std::fill(map.begin(), map.end(), 0);
    std::fill(queued.begin(), queued.end(), 0);
    for (auto v : acc)
      if (live[v]) {
        work.push_back(v);
        queued[v] = 1;
      }
    if (work.empty()) return false;
    while (!work.empty()) {
      const auto u = work.front();
      work.pop_front();
      queued[u] = 0;
      const auto val = std::max(map[u], live[u] ? rank[u] : 0u);
      for (auto w : g.successors(u))
        if (val > map[w]) {
          map[w] = val;
          if (!queued[w]) {
            queued[w] = 1;
            work.push_back(w);
          }
        }
    }
    for (auto v : acc)
      if (live[v] && map[v] == rank[v]) return true;
    bool removed = false;
    for (std::uint32_t v = 0; v < n; ++v)
      if (map[v] && live[acc[map[v] - 1]]) {
        live[acc[map[v] - 1]] = 0;
        removed = true;
      }
    if (!removed) return false;
  }
}

namespace {

constexpr std::uint32_t kNone = ~std::uint32_t{0};

// Iterative Tarjan; returns the component id of each state.
std::vector<std::uint32_t> components(const StateGraph& g) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> index(n, kNone), low(n), comp(n, kNone);
  std::vector<std::uint32_t> stack;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> call;
  std::uint32_t counter = 0, ncomp = 0;
  for (std::uint32_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.emplace_back(root, g.offsets[root]);
    index[root] = low[root] = counter++;
    stack.push_back(root);
    while (!call.empty()) {
      auto& [v, e] = call.back();
      if (e < g.offsets[v + 1]) {
        const auto w = g.targets[e++];
        if (index[w] == kNone) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          call.emplace_back(w, g.offsets[w]);
        } else if (comp[w] == kNone) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      const auto done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      if (low[done] == index[done]) {
        std::uint32_t w;
        do {
          w = stack.back();
          stack.pop_back();
          comp[w] = ncomp;
        } while (w != done);
        ++ncomp;
      }
    }
  }
  return comp;
}

// Accepting states that lie on some cycle, in index order.
std::vector<std::uint32_t> cyclic_accepting(const StateGraph& g,
                                            const std::vector<std::uint32_t>& comp) {
  std::vector<std::uint32_t> size(g.size(), 0);
  for (auto c : comp) ++size[c];
  const auto seen = reachable(g);
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < g.size(); ++v) {
    if (!g.accepting[v] || !seen[v]) continue;
    bool cyclic = size[comp[v]] > 1;
    for (auto w : g.successors(v)) cyclic = cyclic || w == v;
    if (cyclic) out.push_back(v);
  }
  return out;
}

// Breadth-first edge path from `from` to `to` using only states accepted by
// `allowed`; at least one edge is taken.
template <typename Allowed>
std::vector<std::uint32_t> edge_path(const StateGraph& g, std::uint32_t from, std::uint32_t to,
                                     Allowed allowed) {
  const std::size_t n = g.size();
  std::vector<std::uint64_t> via(n, ~std::uint64_t{0});
  std::vector<std::uint32_t> parent(n, kNone);
  std::vector<std::uint32_t> queue;
  auto visit = [&](std::uint32_t u) {
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      const auto w = g.targets[e];
      if (parent[w] != kNone || !allowed(w)) continue;
      parent[w] = u;
      via[w] = e;
      queue.push_back(w);
    }
  };
  visit(from);
  for (std::size_t i = 0; i < queue.size() && parent[to] == kNone; ++i) visit(queue[i]);
  std::vector<std::uint32_t> edges;
  if (parent[to] == kNone) return edges;
  for (auto v = to;;) {
    edges.push_back(static_cast<std::uint32_t>(via[v]));
    v = parent[v];
    if (v == from) break;
  }
  std::reverse(edges.begin(), edges.end());
  return edges;
}

}  // namespace

bool scc_cycle(const StateGraph& g) { return !cyclic_accepting(g, components(g)).empty(); }

Lasso find_lasso(const StateGraph& g) {
  Lasso l;
  const auto comp = components(g);
  const auto candidates = cyclic_accepting(g, comp);
  if (candidates.empty()) return l;
  const auto a = candidates.front();
  l.found = true;
  l.accepting_state = a;
  if (a != g.initial) l.prefix_edges = edge_path(g, g.initial, a, [](std::uint32_t) { return true; });
  l.loop_edges = edge_path(g, a, a, [&](std::uint32_t w) { return comp[w] == comp[a]; });
  return l;
}

bool has_accepting_cycle(const StateGraph& g, CycleAlgorithm algorithm) {
  switch (algorithm) {
    case CycleAlgorithm::Owcty: return owcty(g);
    case CycleAlgorithm::Map: return map_cycle(g);
    case CycleAlgorithm::Oracle: return scc_cycle(g);
  }
  return false;
}

// ---------------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// `X(body)` with balanced parentheses around the whole body.
std::optional<std::string_view> unwrap(std::string_view s, char op) {
  s = trim(s);
  if (s.size() < 3 || s[0] != op) return std::nullopt;
  auto rest = trim(s.substr(1));
  if (rest.empty() || rest.front() != '(' || rest.back() != ')') return std::nullopt;
  int depth = 0;
  for (std::size_t i = 0; i < rest.size(); ++i) {
    if (rest[i] == '(') ++depth;
    if (rest[i] == ')' && --depth == 0 && i + 1 != rest.size()) return std::nullopt;
  }
  return rest.substr(1, rest.size() - 2);
}

std::optional<std::size_t> top_level_arrow(std::string_view s) {
  int depth = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] == '(') ++depth;
    if (s[i] == ')') --depth;
    if (depth == 0 && s[i] == '-' && s[i + 1] == '>') return i;
  }
  return std::nullopt;
}

}  // namespace

Formula parse_formula(std::string_view text) {
  Formula f;
  if (auto body = unwrap(text, 'F')) {
    f.kind = PropertyTemplate::Eventually;
    f.p = parse_expr(*body);
    return f;
  }
  auto body = unwrap(text, 'G');
  if (!body)
    throw ParseError({1, 1}, "property must have the form G(e), F(e) or G(p -> F(q))");
  if (auto arrow = top_level_arrow(*body)) {
    auto rhs = unwrap(body->substr(*arrow + 2), 'F');
    if (!rhs) throw ParseError({1, 1}, "expected F(q) after '->'");
    f.kind = PropertyTemplate::Response;
    f.p = parse_expr(body->substr(0, *arrow));
    f.q = parse_expr(*rhs);
    return f;
  }
  f.kind = PropertyTemplate::Always;
  f.p = parse_expr(*body);
  return f;
}

Process build_property(PropertyTemplate kind, const Expr& p, const std::optional<Expr>& q) {
  Process c;
  c.name = "Claim";
  c.initial = "q0";
  auto step = [&](const std::string& a, const std::string& b, Expr guard) {
    Transition t;
    t.src = a;
    t.dst = b;
    t.guard = std::move(guard);
    c.transitions.push_back(std::move(t));
  };
  switch (kind) {
    case PropertyTemplate::Always:
      c.locations = {"q0", "bad"};
      c.accepting = {"bad"};
      step("q0", "q0", Expr::boolean(true));
      step("q0", "bad", !p);
      step("bad", "bad", Expr::boolean(true));
      break;
    case PropertyTemplate::Eventually:
      c.locations = {"q0"};
      c.accepting = {"q0"};
      step("q0", "q0", !p);
      break;
    case PropertyTemplate::Response:
      if (!q) throw std::invalid_argument("response property needs two operands");
      c.locations = {"q0", "q1"};
      c.accepting = {"q1"};
      step("q0", "q0", Expr::boolean(true));
      step("q0", "q1", p && !*q);
      step("q1", "q1", !*q);
      break;
  }
  return c;
}

Process build_property(const Formula& f) { return build_property(f.kind, f.p, f.q); }

Model with_property(Model model, Process claim) {
  while (model.process_index(claim.name)) claim.name += "_";
  model.processes.push_back(std::move(claim));
  model.property = model.processes.size() - 1;
  return model;
}

Verdict check_liveness(const Semantics& product, CycleAlgorithm algorithm,
                       const ExploreOptions& opts) {
  Verdict v;
  auto g = explore(product, opts, &v.stats);
  if (!has_accepting_cycle(g, algorithm)) return v;
  v.holds = false;
  auto lasso = find_lasso(g);
  if (!lasso.found) throw std::logic_error("cycle detectors disagree on the product graph");
  auto words = [&](std::uint32_t s) {
    auto w = g.state(s);
    return State{std::vector<std::int32_t>(w.begin(), w.end())};
  };
  std::uint32_t cur = g.initial;
  auto follow = [&](const std::vector<std::uint32_t>& edges) {
    for (auto e : edges) {
      v.trace.push_back({words(cur), g.labels[e]});
      cur = g.targets[e];
    }
  };
  follow(lasso.prefix_edges);
  v.cycle_start = v.trace.size();
  follow(lasso.loop_edges);
  return v;
}

Verdict check_liveness(const Model& product, CycleAlgorithm algorithm, unsigned workers) {
  Semantics sem(product);
  return check_liveness(sem, algorithm, ExploreOptions{.workers = workers});
}

}  // namespace tdve
