#include "tdve/state.hpp"

#include <algorithm>
#include <sstream>

namespace tdve {

StateLayout::StateLayout(const Model& model) : model_(&model) {
  std::int32_t off = 0;
  auto slot_for = [&](const VarDecl& v) {
    Slot s;
    s.offset = off;
    s.length = static_cast<std::int32_t>(v.width());
    s.array = v.length.has_value();
    s.decl = &v;
    off += s.length;
    return s;
  };
  for (const auto& g : model.globals) globals_.emplace_back(g.name, slot_for(g));
  for (const auto& p : model.processes) {
    ProcSlots ps;
    ps.location = off++;
    for (const auto& l : p.locals) ps.locals.emplace_back(l.name, slot_for(l));
    procs_.push_back(std::move(ps));
  }
  width_ = static_cast<std::size_t>(off);
}

std::optional<StateLayout::Slot> StateLayout::lookup(const std::string& name,
                                                     std::optional<std::size_t> process) const {
  if (process && *process < procs_.size())
    for (const auto& [n, s] : procs_[*process].locals)
      if (n == name) return s;
  for (const auto& [n, s] : globals_)
    if (n == name) return s;
  return std::nullopt;
}

State initial_state(const Model& model) {
  StateLayout layout(model);
  State s;
  s.values.resize(layout.width());
  auto fill = [&](const VarDecl& v, std::optional<std::size_t> p) {
    auto slot = *layout.lookup(v.name, p);
    for (std::int64_t i = 0; i < v.width(); ++i)
      s.values[static_cast<std::size_t>(slot.offset + i)] = static_cast<std::int32_t>(v.init_at(i));
  };
  for (const auto& g : model.globals) fill(g, std::nullopt);
  for (std::size_t p = 0; p < model.processes.size(); ++p) {
    const auto& proc = model.processes[p];
    s.values[static_cast<std::size_t>(layout.location_slot(p))] =
        static_cast<std::int32_t>(proc.location_index(proc.initial).value_or(0));
    for (const auto& l : proc.locals) fill(l, p);
  }
  return s;
}

std::vector<std::uint8_t> encode(std::span<const std::int32_t> words) {
  std::vector<std::uint8_t> out;
  out.reserve(words.size() * 4);
  for (auto w : words) {
    auto u = static_cast<std::uint32_t>(w) ^ 0x80000000u;
    out.push_back(static_cast<std::uint8_t>(u >> 24));
    out.push_back(static_cast<std::uint8_t>(u >> 16));
    out.push_back(static_cast<std::uint8_t>(u >> 8));
    out.push_back(static_cast<std::uint8_t>(u));
  }
  return out;
}

State decode(std::span<const std::uint8_t> bytes) {
  State s;
  s.values.reserve(bytes.size() / 4);
  for (std::size_t i = 0; i + 3 < bytes.size(); i += 4) {
    std::uint32_t u = (std::uint32_t{bytes[i]} << 24) | (std::uint32_t{bytes[i + 1]} << 16) |
                      (std::uint32_t{bytes[i + 2]} << 8) | std::uint32_t{bytes[i + 3]};
    s.values.push_back(static_cast<std::int32_t>(u ^ 0x80000000u));
  }
  return s;
}

std::string state_text(const Model& model, std::span<const std::int32_t> words) {
  StateLayout layout(model);
  std::ostringstream os;
  auto var = [&](const VarDecl& v, const StateLayout::Slot& s) {
    os << ' ' << v.name << '=';
    if (s.array) {
      os << '[';
      for (std::int32_t i = 0; i < s.length; ++i) os << (i ? "," : "") << words[s.offset + i];
      os << ']';
    } else {
      os << words[s.offset];
    }
  };
  for (const auto& g : model.globals) var(g, *layout.lookup(g.name));
  for (std::size_t p = 0; p < model.processes.size(); ++p) {
    const auto& proc = model.processes[p];
    auto loc = words[layout.location_slot(p)];
    os << " | " << proc.name << '@'
       << (loc >= 0 && static_cast<std::size_t>(loc) < proc.locations.size()
               ? proc.locations[loc]
               : std::to_string(loc));
    for (const auto& l : proc.locals) var(l, *layout.lookup(l.name, p));
  }
  auto text = os.str();
  auto start = text.find_first_not_of(' ');
  return start == std::string::npos ? std::string{} : text.substr(start);
}

std::int64_t min_active_timer(std::span<const std::int32_t> timers, std::int64_t infinity) {
  std::int64_t best = infinity;
  for (auto t : timers)
    if (t != infinity) best = std::min<std::int64_t>(best, t);
  return best;
}

namespace {

struct TreeEval {
  const Model& model;
  const StateLayout& layout;
  const State& state;
  std::optional<std::size_t> process;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ModelError(msg, state_text(model, state.values));
  }

  std::int64_t as_int(const Value& v) const {
    if (auto* i = std::get_if<std::int64_t>(&v)) return *i;
    fail("integer expected, got boolean");
  }
  bool as_bool(const Value& v) const {
    if (auto* b = std::get_if<bool>(&v)) return *b;
    fail("boolean expected, got integer");
  }

  Value operator()(const Expr& e) const {
    switch (e.kind) {
      case ExprKind::Int:
        return e.value;
      case ExprKind::Bool:
        return e.value != 0;
      case ExprKind::Var: {
        if (auto slot = layout.lookup(e.name, process)) {
          if (slot->array) fail("array '" + e.name + "' used without index");
          return std::int64_t{state.values.at(static_cast<std::size_t>(slot->offset))};
        }
        if (auto c = model.find_constant(e.name)) return *c;
        fail("unresolved identifier '" + e.name + "'");
      }
      case ExprKind::Index: {
        auto slot = layout.lookup(e.name, process);
        if (!slot || !slot->array) fail("'" + e.name + "' is not an array");
        auto i = as_int((*this)(e.args[0]));
        if (i < 0 || i >= slot->length)
          fail("index " + std::to_string(i) + " out of range for array '" + e.name + "'");
        return std::int64_t{state.values.at(static_cast<std::size_t>(slot->offset + i))};
      }
      case ExprKind::Unary: {
        auto x = (*this)(e.args[0]);
        if (e.unary == UnaryOp::Neg) return -as_int(x);
        return !as_bool(x);
      }
      case ExprKind::MinActiveTimer: {
        if (!model.tick || model.tick->timers.empty()) fail("MIN_ACTIVE_TIMER outside a clock");
        auto slot = *layout.global(model.tick->timers.front());
        std::span<const std::int32_t> timers(state.values.data() + slot.offset,
                                             static_cast<std::size_t>(slot.length));
        return min_active_timer(timers, model.tick->infinity);
      }
      case ExprKind::Binary:
        break;
    }
    const auto op = e.binary;
    if (op == BinaryOp::And) return as_bool((*this)(e.args[0])) && as_bool((*this)(e.args[1]));
    if (op == BinaryOp::Or) return as_bool((*this)(e.args[0])) || as_bool((*this)(e.args[1]));
    auto l = (*this)(e.args[0]);
    auto r = (*this)(e.args[1]);
    if (op == BinaryOp::Eq || op == BinaryOp::Ne) {
      if (l.index() != r.index()) fail("equality between integer and boolean");
      return (l == r) == (op == BinaryOp::Eq);
    }
    auto a = as_int(l);
    auto b = as_int(r);
    switch (op) {
      case BinaryOp::Add: return a + b;
      case BinaryOp::Sub: return a - b;
      case BinaryOp::Mul: return a * b;
      case BinaryOp::Mod:
        if (b == 0) fail("modulo by zero");
        return floor_mod(a, b);
      case BinaryOp::Lt: return a < b;
      case BinaryOp::Le: return a <= b;
      case BinaryOp::Gt: return a > b;
      case BinaryOp::Ge: return a >= b;
      default: break;
    }
    fail("bad operator");
  }
};

}  // namespace

Value eval(const Expr& expr, const Model& model, const State& state,
           std::optional<std::size_t> process) {
  StateLayout layout(model);
  return TreeEval{model, layout, state, process}(expr);
}

bool eval_bool(const Expr& expr, const Model& model, const State& state,
               std::optional<std::size_t> process) {
  auto v = eval(expr, model, state, process);
  if (auto* b = std::get_if<bool>(&v)) return *b;
  throw ModelError("boolean expected", state_text(model, state.values));
}

}  // namespace tdve
