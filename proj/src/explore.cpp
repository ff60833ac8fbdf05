#include "tdve/explore.hpp"

#include <sys/resource.h>

#include <algorithm>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace tdve {

// ---------------------------------------------------------------------------
// Compiled expressions: a small stack machine with short-circuit jumps.

namespace {

enum class Op : std::uint8_t {
  Const,
  Load,
  LoadIdx,
  Neg,
  Not,
  Add,
  Sub,
  Mul,
  Mod,
  Eq,
  Ne,
  Lt,
  Le,
  Gt,
  Ge,
  JumpIfFalse,  // keeps the operand when jumping, pops it otherwise
  JumpIfTrue,
  MinTimer,
};

struct Instr {
  Op op;
  std::int32_t a = 0;
  std::int32_t b = 0;
  std::int64_t v = 0;
};

struct EvalError {
  std::string message;
};

}  // namespace

struct CompiledExpr::Code {
  std::vector<Instr> code;
  std::vector<std::string> names;  // array names for diagnostics
  std::size_t depth = 0;

  std::int64_t run(std::span<const std::int32_t> s) const {
    std::int64_t small[32];
    std::vector<std::int64_t> big;
    std::int64_t* st = small;
    if (depth > 32) {
      big.resize(depth);
      st = big.data();
    }
    std::size_t sp = 0;
    const std::size_t n = code.size();
    for (std::size_t pc = 0; pc < n; ++pc) {
      const Instr& in = code[pc];
      switch (in.op) {
        case Op::Const: st[sp++] = in.v; break;
        case Op::Load: st[sp++] = s[static_cast<std::size_t>(in.a)]; break;
        case Op::LoadIdx: {
          auto i = st[sp - 1];
          if (i < 0 || i >= in.b)
            throw EvalError{"index " + std::to_string(i) + " out of range for array '" +
                            names[static_cast<std::size_t>(in.v)] + "'"};
          st[sp - 1] = s[static_cast<std::size_t>(in.a + i)];
          break;
        }
        case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
        case Op::Not: st[sp - 1] = st[sp - 1] == 0; break;
        case Op::MinTimer:
          st[sp++] = min_active_timer(s.subspan(static_cast<std::size_t>(in.a),
                                                static_cast<std::size_t>(in.b)),
                                      in.v);
          break;
        case Op::JumpIfFalse:
          if (st[sp - 1] == 0)
            pc = static_cast<std::size_t>(in.a) - 1;
          else
            --sp;
          break;
        case Op::JumpIfTrue:
          if (st[sp - 1] != 0)
            pc = static_cast<std::size_t>(in.a) - 1;
          else
            --sp;
          break;
        default: {
          auto r = st[--sp];
          auto& l = st[sp - 1];
          switch (in.op) {
            case Op::Add: l = l + r; break;
            case Op::Sub: l = l - r; break;
            case Op::Mul: l = l * r; break;
            case Op::Mod:
              if (r == 0) throw EvalError{"modulo by zero"};
              l = floor_mod(l, r);
              break;
            case Op::Eq: l = l == r; break;
            case Op::Ne: l = l != r; break;
            case Op::Lt: l = l < r; break;
            case Op::Le: l = l <= r; break;
            case Op::Gt: l = l > r; break;
            case Op::Ge: l = l >= r; break;
            default: break;
          }
        }
      }
    }
    return st[0];
  }
};

CompiledExpr::CompiledExpr() : code_(std::make_unique<Code>()) {}
CompiledExpr::~CompiledExpr() = default;
CompiledExpr::CompiledExpr(CompiledExpr&&) noexcept = default;
CompiledExpr& CompiledExpr::operator=(CompiledExpr&&) noexcept = default;

std::int64_t CompiledExpr::operator()(std::span<const std::int32_t> state) const {
  try {
    return code_->run(state);
  } catch (const EvalError& e) {
    throw ModelError(e.message);
  }
}

namespace {

using Code = CompiledExpr::Code;

class Compiler {
 public:
  Compiler(const Model& m, const StateLayout& layout, std::optional<std::size_t> process)
      : m_(m), layout_(layout), process_(process) {}

  Code compile(const Expr& e) {
    Code c;
    std::size_t depth = 0;
    emit(c, e, depth);
    return c;
  }

 private:
  void push(Code& c, Instr in, std::size_t& depth, int delta) {
    c.code.push_back(in);
    cur_ += delta;
    depth = std::max(depth, static_cast<std::size_t>(cur_));
    c.depth = std::max(c.depth, depth);
  }

  [[noreturn]] void fail(const std::string& msg) { throw ModelError(msg); }

  void emit(Code& c, const Expr& e, std::size_t& depth) {
    switch (e.kind) {
      case ExprKind::Int:
        push(c, {Op::Const, 0, 0, e.value}, depth, +1);
        return;
      case ExprKind::Bool:
        push(c, {Op::Const, 0, 0, e.value != 0}, depth, +1);
        return;
      case ExprKind::Var: {
        if (auto slot = layout_.lookup(e.name, process_)) {
          if (slot->array) fail("array '" + e.name + "' used without index");
          push(c, {Op::Load, slot->offset, 0, 0}, depth, +1);
          return;
        }
        if (auto k = m_.find_constant(e.name)) {
          push(c, {Op::Const, 0, 0, *k}, depth, +1);
          return;
        }
        fail("unresolved identifier '" + e.name + "'");
      }
      case ExprKind::Index: {
        auto slot = layout_.lookup(e.name, process_);
        if (!slot || !slot->array) fail("'" + e.name + "' is not an array");
        emit(c, e.args[0], depth);
        c.names.push_back(e.name);
        push(c, {Op::LoadIdx, slot->offset, slot->length, static_cast<std::int64_t>(c.names.size() - 1)},
             depth, 0);
        return;
      }
      case ExprKind::MinActiveTimer: {
        if (!m_.tick || m_.tick->timers.empty()) fail("MIN_ACTIVE_TIMER outside a clock");
        auto slot = *layout_.global(m_.tick->timers.front());
        push(c, {Op::MinTimer, slot.offset, slot.length, m_.tick->infinity}, depth, +1);
        return;
      }
      case ExprKind::Unary:
        emit(c, e.args[0], depth);
        push(c, {e.unary == UnaryOp::Neg ? Op::Neg : Op::Not}, depth, 0);
        return;
      case ExprKind::Binary:
        break;
    }
    if (e.binary == BinaryOp::And || e.binary == BinaryOp::Or) {
      emit(c, e.args[0], depth);
      const auto jump = c.code.size();
      push(c, {e.binary == BinaryOp::And ? Op::JumpIfFalse : Op::JumpIfTrue}, depth, -1);
      emit(c, e.args[1], depth);
      c.code[jump].a = static_cast<std::int32_t>(c.code.size());
      return;
    }
    emit(c, e.args[0], depth);
    emit(c, e.args[1], depth);
    Op op = Op::Add;
    switch (e.binary) {
      case BinaryOp::Add: op = Op::Add; break;
      case BinaryOp::Sub: op = Op::Sub; break;
      case BinaryOp::Mul: op = Op::Mul; break;
      case BinaryOp::Mod: op = Op::Mod; break;
      case BinaryOp::Eq: op = Op::Eq; break;
      case BinaryOp::Ne: op = Op::Ne; break;
      case BinaryOp::Lt: op = Op::Lt; break;
      case BinaryOp::Le: op = Op::Le; break;
      case BinaryOp::Gt: op = Op::Gt; break;
      case BinaryOp::Ge: op = Op::Ge; break;
      default: break;
    }
    push(c, {op}, depth, -1);
  }

  const Model& m_;
  const StateLayout& layout_;
  std::optional<std::size_t> process_;
  int cur_ = 0;
};

struct Target {
  std::string name;
  std::int32_t offset = 0;
  std::int32_t length = 1;
  std::optional<Code> index;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct CAssign {
  Target target;
  Code value;
};

struct CTransition {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  bool always = true;
  Code guard;
  enum class Kind { Local, Send, Recv } kind = Kind::Local;
  std::size_t channel = 0;
  std::vector<Code> payload;
  std::vector<Target> receive;
  std::vector<CAssign> effects;
};

struct CProcess {
  std::int32_t location_slot = 0;
  std::vector<CTransition> transitions;
  std::vector<std::vector<std::uint32_t>> by_location;
  std::vector<bool> accepting;
};

struct Write {
  std::int32_t slot;
  std::int64_t value;
  const Target* target;
};

}  // namespace

struct Semantics::Impl {
  Model model;
  StateLayout layout;
  std::vector<CProcess> procs;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> receivers;  // per channel
  std::optional<std::size_t> property;
  State init;

  // clock
  bool has_tick = false;
  TickMode mode = TickMode::Ledm;
  std::int32_t timer = -1, lower = -1, signal = -1, now = -1;
  std::int32_t count = 0;
  std::int64_t infinity = 0, maximal = 0;

  explicit Impl(const Model& m) : model(m), layout(model) {}

  Target target_of(const LValue& lv, std::size_t p) {
    auto slot = layout.lookup(lv.name, p);
    if (!slot) throw ModelError("unresolved identifier '" + lv.name + "'");
    Target t;
    t.name = lv.name;
    t.offset = slot->offset;
    t.length = slot->length;
    t.lo = slot->decl->lo;
    t.hi = slot->decl->hi;
    if (lv.index) t.index = Compiler(model, layout, p).compile(*lv.index);
    return t;
  }

  std::string where(std::size_t p, std::size_t t) const {
    const auto& tr = model.processes[p].transitions[t];
    return model.processes[p].name + "." + std::to_string(t) + "(" + tr.src + "->" + tr.dst + ")";
  }

  [[noreturn]] void rethrow(const std::string& msg, std::span<const std::int32_t> s) const {
    throw ModelError(msg, tdve::state_text(model, s));
  }

  std::int32_t resolve(const Target& t, std::span<const std::int32_t> read) const {
    if (!t.index) return t.offset;
    auto i = t.index->run(read);
    if (i < 0 || i >= t.length)
      throw EvalError{"index " + std::to_string(i) + " out of range for array '" + t.name + "'"};
    return t.offset + static_cast<std::int32_t>(i);
  }

  static void commit(std::vector<Write>& pending, std::span<std::int32_t> out) {
    for (const auto& w : pending) {
      if (w.value < w.target->lo || w.value > w.target->hi)
        throw EvalError{"value " + std::to_string(w.value) + " out of range [" +
                        std::to_string(w.target->lo) + ".." + std::to_string(w.target->hi) +
                        "] for '" + w.target->name + "'"};
      out[static_cast<std::size_t>(w.slot)] = static_cast<std::int32_t>(w.value);
    }
    pending.clear();
  }

  // Simultaneous assignment: all right-hand sides and indices read `read`.
  void apply(const std::vector<CAssign>& effects, std::span<const std::int32_t> read,
             std::span<std::int32_t> out, std::vector<Write>& pending) const {
    for (const auto& a : effects)
      pending.push_back({resolve(a.target, read), a.value.run(read), &a.target});
    commit(pending, out);
  }

  bool enabled(const CTransition& t, std::span<const std::int32_t> s) const {
    return t.always || t.guard.run(s) != 0;
  }

  void system_steps(std::span<const std::int32_t> s, std::vector<Label>& labels,
                    std::vector<std::int32_t>& out) const {
    const std::size_t w = layout.width();
    std::vector<Write> pending;
    std::vector<std::int32_t> mid(w);
    for (std::size_t p = 0; p < procs.size(); ++p) {
      if (property && *property == p) continue;
      const auto& cp = procs[p];
      const auto loc = s[static_cast<std::size_t>(cp.location_slot)];
      for (auto ti : cp.by_location[static_cast<std::size_t>(loc)]) {
        const auto& t = cp.transitions[ti];
        if (t.kind == CTransition::Kind::Recv) continue;
        try {
          if (!enabled(t, s)) continue;
          if (t.kind == CTransition::Kind::Local) {
            const auto base = out.size();
            out.insert(out.end(), s.begin(), s.end());
            std::span<std::int32_t> post(out.data() + base, w);
            apply(t.effects, s, post, pending);
            post[static_cast<std::size_t>(cp.location_slot)] = t.dst;
            labels.push_back({static_cast<std::int16_t>(p), static_cast<std::int16_t>(ti)});
            continue;
          }
          for (auto [q, ui] : receivers[t.channel]) {
            if (q == p) continue;
            const auto& cq = procs[q];
            const auto& u = cq.transitions[ui];
            if (s[static_cast<std::size_t>(cq.location_slot)] != u.src) continue;
            if (!enabled(u, s)) continue;
            // sender effects, then payload into the receiver, then receiver effects
            std::copy(s.begin(), s.end(), mid.begin());
            apply(t.effects, s, mid, pending);
            for (std::size_t k = 0; k < t.payload.size(); ++k)
              pending.push_back({resolve(u.receive[k], mid), t.payload[k].run(s), &u.receive[k]});
            commit(pending, mid);
            const auto base = out.size();
            out.insert(out.end(), mid.begin(), mid.end());
            std::span<std::int32_t> post(out.data() + base, w);
            apply(u.effects, mid, post, pending);
            post[static_cast<std::size_t>(cp.location_slot)] = t.dst;
            post[static_cast<std::size_t>(cq.location_slot)] = u.dst;
            labels.push_back({static_cast<std::int16_t>(p), static_cast<std::int16_t>(ti),
                              static_cast<std::int16_t>(q), static_cast<std::int16_t>(ui)});
          }
        } catch (const EvalError& e) {
          rethrow(e.message + " in " + where(p, ti), s);
        }
      }
    }
    if (has_tick) tick_steps(s, labels, out);
  }

  std::int32_t at(std::span<const std::int32_t> s, std::int32_t base, std::int32_t i) const {
    return s[static_cast<std::size_t>(base + i)];
  }

  void tick_steps(std::span<const std::int32_t> s, std::vector<Label>& labels,
                  std::vector<std::int32_t>& out) const {
    const std::size_t w = layout.width();
    auto emit = [&](std::int64_t step, std::int16_t which) {
      const auto base = out.size();
      out.insert(out.end(), s.begin(), s.end());
      std::span<std::int32_t> post(out.data() + base, w);
      if (now >= 0)
        post[static_cast<std::size_t>(now)] =
            static_cast<std::int32_t>((post[static_cast<std::size_t>(now)] + step) % maximal);
      for (std::int32_t i = 0; i < count; ++i) {
        auto& t = post[static_cast<std::size_t>(timer + i)];
        if (t != infinity) t = static_cast<std::int32_t>(t - step);
        if (lower >= 0) {
          auto& l = post[static_cast<std::size_t>(lower + i)];
          if (l != 0) l = static_cast<std::int32_t>(l - step);
        }
      }
      labels.push_back({-1, which});
    };
    for (std::int32_t i = 0; i < count; ++i)
      if (at(s, timer, i) <= 0) return;
    if (mode == TickMode::Ledm) {
      emit(1, kTickUnit);
      return;
    }
    bool active = false;
    for (std::int32_t i = 0; i < count; ++i) active = active || at(s, timer, i) != infinity;
    if (!active) return;
    bool raised = false;
    if (signal >= 0)
      for (std::int32_t i = 0; i < count; ++i) raised = raised || at(s, signal, i) == 1;
    if (!raised)
      emit(min_active_timer(s.subspan(static_cast<std::size_t>(timer), static_cast<std::size_t>(count)),
                            infinity),
           kTickLeap);
    else
      emit(1, kTickStandard);
  }
};

Semantics::Semantics(const Model& model) : impl_(std::make_unique<Impl>(model)) {
  if (auto diags = validate(model); !diags.empty()) throw ModelError(to_string(diags.front()));
  auto& I = *impl_;
  const auto& m = I.model;
  I.property = m.property;
  I.receivers.resize(m.channels.size());
  auto channel_index = [&](const std::string& n) {
    for (std::size_t c = 0; c < m.channels.size(); ++c)
      if (m.channels[c].name == n) return c;
    throw ModelError("unresolved channel '" + n + "'");
  };
  for (std::size_t p = 0; p < m.processes.size(); ++p) {
    const auto& proc = m.processes[p];
    CProcess cp;
    cp.location_slot = I.layout.location_slot(p);
    cp.by_location.resize(proc.locations.size());
    cp.accepting.resize(proc.locations.size());
    for (const auto& a : proc.accepting) cp.accepting[*proc.location_index(a)] = true;
    for (std::size_t ti = 0; ti < proc.transitions.size(); ++ti) {
      const auto& t = proc.transitions[ti];
      CTransition ct;
      ct.src = static_cast<std::int32_t>(*proc.location_index(t.src));
      ct.dst = static_cast<std::int32_t>(*proc.location_index(t.dst));
      ct.always = t.guard.is_true_literal();
      if (!ct.always) ct.guard = Compiler(m, I.layout, p).compile(t.guard);
      for (const auto& a : t.effects)
        ct.effects.push_back({I.target_of(a.target, p), Compiler(m, I.layout, p).compile(a.value)});
      if (t.sync) {
        ct.channel = channel_index(t.sync->channel);
        if (t.sync->dir == SyncDir::Send) {
          ct.kind = CTransition::Kind::Send;
          for (const auto& v : t.sync->values) ct.payload.push_back(Compiler(m, I.layout, p).compile(v));
        } else {
          ct.kind = CTransition::Kind::Recv;
          for (const auto& lv : t.sync->targets) ct.receive.push_back(I.target_of(lv, p));
          I.receivers[ct.channel].emplace_back(static_cast<std::uint32_t>(p),
                                               static_cast<std::uint32_t>(ti));
        }
      }
      cp.by_location[static_cast<std::size_t>(ct.src)].push_back(static_cast<std::uint32_t>(ti));
      cp.transitions.push_back(std::move(ct));
    }
    I.procs.push_back(std::move(cp));
  }
  if (m.tick) {
    const auto& t = *m.tick;
    I.has_tick = true;
    I.mode = t.mode;
    I.infinity = t.infinity;
    I.maximal = t.maximal;
    auto slot = [&](const std::string& n) {
      auto s = I.layout.global(n);
      if (!s) throw ModelError("clock array '" + n + "' is not declared");
      return *s;
    };
    auto ts = slot(t.timers.at(0));
    I.timer = ts.offset;
    I.count = ts.length;
    if (t.mode == TickMode::Ledm) I.lower = slot(t.timers.at(1)).offset;
    if (t.signals) I.signal = slot(*t.signals).offset;
    if (t.now) I.now = slot(*t.now).offset;
  }
  I.init = initial_state(m);
}

Semantics::~Semantics() = default;

const Model& Semantics::model() const { return impl_->model; }
std::size_t Semantics::width() const { return impl_->layout.width(); }
State Semantics::initial() const { return impl_->init; }

void Semantics::successors(std::span<const std::int32_t> state, std::vector<Label>& labels,
                           std::vector<std::int32_t>& out) const {
  const auto& I = *impl_;
  if (!I.property) {
    I.system_steps(state, labels, out);
    return;
  }
  // Synchronous product: the property moves on the pre-state of each system step.
  const auto pp = *I.property;
  const auto& cp = I.procs[pp];
  std::vector<std::int16_t> moves;
  const auto loc = state[static_cast<std::size_t>(cp.location_slot)];
  for (auto ti : cp.by_location[static_cast<std::size_t>(loc)]) {
    try {
      if (I.enabled(cp.transitions[ti], state)) moves.push_back(static_cast<std::int16_t>(ti));
    } catch (const EvalError& e) {
      I.rethrow(e.message + " in " + I.where(pp, ti), state);
    }
  }
  if (moves.empty()) return;
  std::vector<Label> sys_labels;
  std::vector<std::int32_t> sys_out;
  I.system_steps(state, sys_labels, sys_out);
  const std::size_t w = width();
  for (std::size_t k = 0; k < sys_labels.size(); ++k) {
    for (auto mv : moves) {
      auto l = sys_labels[k];
      l.property_transition = mv;
      labels.push_back(l);
      const auto base = out.size();
      out.insert(out.end(), sys_out.begin() + static_cast<std::ptrdiff_t>(k * w),
                 sys_out.begin() + static_cast<std::ptrdiff_t>((k + 1) * w));
      out[base + static_cast<std::size_t>(cp.location_slot)] =
          cp.transitions[static_cast<std::size_t>(mv)].dst;
    }
  }
}

std::vector<std::pair<Label, State>> Semantics::successors(const State& s) const {
  std::vector<Label> labels;
  std::vector<std::int32_t> out;
  successors(s.values, labels, out);
  std::vector<std::pair<Label, State>> result;
  const std::size_t w = width();
  for (std::size_t k = 0; k < labels.size(); ++k)
    result.emplace_back(labels[k], State{std::vector<std::int32_t>(
                                       out.begin() + static_cast<std::ptrdiff_t>(k * w),
                                       out.begin() + static_cast<std::ptrdiff_t>((k + 1) * w))});
  return result;
}

bool Semantics::accepting(std::span<const std::int32_t> state) const {
  const auto& I = *impl_;
  if (!I.property) return false;
  const auto& cp = I.procs[*I.property];
  return cp.accepting[static_cast<std::size_t>(state[static_cast<std::size_t>(cp.location_slot)])];
}

CompiledExpr Semantics::compile(const Expr& e) const {
  CompiledExpr c;
  *c.code_ = Compiler(impl_->model, impl_->layout, std::nullopt).compile(e);
  return c;
}

std::string Semantics::label_text(const Label& l) const {
  const auto& m = impl_->model;
  std::string s;
  if (l.is_tick()) {
    if (!m.tick || m.tick->mode == TickMode::Ledm)
      s = "Tick.tick";
    else
      s = l.transition == kTickStandard ? "Tick.standard" : "Tick.leap";
  } else {
    s = impl_->where(static_cast<std::size_t>(l.process), static_cast<std::size_t>(l.transition));
    if (l.partner >= 0)
      s += "/" + impl_->where(static_cast<std::size_t>(l.partner),
                              static_cast<std::size_t>(l.partner_transition));
  }
  if (l.property_transition >= 0 && m.property)
    s += " & " + impl_->where(*m.property, static_cast<std::size_t>(l.property_transition));
  return s;
}

std::string Semantics::state_text(std::span<const std::int32_t> state) const {
  return tdve::state_text(impl_->model, state);
}

std::int64_t Semantics::tick_advance(const Label& l, std::span<const std::int32_t> state) const {
  const auto& I = *impl_;
  if (!l.is_tick()) return 0;
  if (I.mode == TickMode::Ledm || l.transition == kTickStandard) return 1;
  return min_active_timer(state.subspan(static_cast<std::size_t>(I.timer),
                                        static_cast<std::size_t>(I.count)),
                          I.infinity);
}

std::int32_t Semantics::location(std::span<const std::int32_t> state, std::size_t p) const {
  return state[static_cast<std::size_t>(impl_->layout.location_slot(p))];
}

std::int32_t Semantics::global_value(std::span<const std::int32_t> state, const std::string& name,
                                     std::size_t element) const {
  auto slot = impl_->layout.global(name);
  if (!slot) throw ModelError("unresolved identifier '" + name + "'");
  if (element >= static_cast<std::size_t>(slot->length))
    throw ModelError("index " + std::to_string(element) + " out of range for array '" + name + "'");
  return state[static_cast<std::size_t>(slot->offset) + element];
}

std::vector<std::pair<Label, State>> successors(const Model& model, const State& s) {
  return Semantics(model).successors(s);
}

// ---------------------------------------------------------------------------
// Exploration

std::uint64_t peak_rss_bytes() {
  std::ifstream status("/proc/self/status");
  std::string line;
  while (std::getline(status, line)) {
    if (line.rfind("VmHWM:", 0) == 0) {
      std::istringstream is(line.substr(6));
      std::uint64_t kb = 0;
      is >> kb;
      return kb * 1024;
    }
  }
  rusage ru{};
  getrusage(RUSAGE_SELF, &ru);
  return static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
}

namespace {

std::uint64_t hash_words(const std::int32_t* w, std::size_t n) {
  std::uint64_t h = 0x9E3779B97F4A7C15ull ^ n;
  for (std::size_t i = 0; i < n; ++i) {
    h ^= static_cast<std::uint32_t>(w[i]);
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 32;
  }
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ull;
  h ^= h >> 33;
  return h;
}

constexpr std::uint32_t kEmpty = std::numeric_limits<std::uint32_t>::max();

struct Outbox {
  std::vector<std::int32_t> words;
  std::vector<std::uint64_t> hashes;
  std::vector<std::uint32_t> result;
};

struct Pending {
  std::uint32_t owner;
  std::uint32_t index;
  Label label;
};

struct Partition {
  std::size_t width = 0;
  std::vector<std::int32_t> words;
  std::vector<std::uint64_t> hashes;
  std::vector<std::uint32_t> table = std::vector<std::uint32_t>(1024, kEmpty);

  std::vector<std::uint64_t> edge_begin{0};
  std::vector<std::uint64_t> edge_target;  // owner << 32 | local id
  std::vector<Label> edge_label;

  std::size_t frontier_begin = 0, frontier_end = 0, next_end = 0;
  std::vector<Outbox> out;
  std::vector<Pending> pending;
  std::vector<std::uint32_t> fanout;

  std::size_t size() const { return hashes.size(); }

  void grow() {
    std::vector<std::uint32_t> t(table.size() * 2, kEmpty);
    const std::size_t mask = t.size() - 1;
    for (std::uint32_t id = 0; id < hashes.size(); ++id) {
      std::size_t i = hashes[id] & mask;
      while (t[i] != kEmpty) i = (i + 1) & mask;
      t[i] = id;
    }
    table.swap(t);
  }

  // Returns the local id and whether the state was new.
  std::pair<std::uint32_t, bool> insert(const std::int32_t* w, std::uint64_t h) {
    if ((hashes.size() + 1) * 2 > table.size()) grow();
    const std::size_t mask = table.size() - 1;
    std::size_t i = h & mask;
    while (table[i] != kEmpty) {
      const auto id = table[i];
      if (hashes[id] == h &&
          std::memcmp(words.data() + id * width, w, width * sizeof(std::int32_t)) == 0)
        return {id, false};
      i = (i + 1) & mask;
    }
    const auto id = static_cast<std::uint32_t>(hashes.size());
    table[i] = id;
    hashes.push_back(h);
    words.insert(words.end(), w, w + width);
    return {id, true};
  }
};

}  // namespace

StateGraph StateGraph::from_edges(std::size_t n,
                                  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges,
                                  const std::vector<bool>& accepting) {
  StateGraph g;
  g.width = 1;
  g.words.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.words[i] = static_cast<std::int32_t>(i);
  auto sorted = edges;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  g.offsets.assign(n + 1, 0);
  for (const auto& [u, v] : sorted) ++g.offsets[u + 1];
  for (std::size_t i = 0; i < n; ++i) g.offsets[i + 1] += g.offsets[i];
  for (const auto& [u, v] : sorted) {
    g.targets.push_back(v);
    g.labels.push_back(Label{});
  }
  g.accepting = accepting;
  g.accepting.resize(n, false);
  return g;
}

StateGraph explore(const Semantics& sem, const ExploreOptions& opts, ExplorationStats* stats) {
  const auto start = std::chrono::steady_clock::now();
  const unsigned W = std::max(1u, opts.workers);
  const std::size_t width = sem.width();

  std::vector<Partition> parts(W);
  for (auto& p : parts) {
    p.width = width;
    p.out.resize(W);
  }
  auto owner_of = [W](std::uint64_t h) { return static_cast<std::uint32_t>((h >> 40) % W); };

  const auto init = sem.initial();
  const auto h0 = hash_words(init.values.data(), width);
  const auto root_owner = owner_of(h0);
  parts[root_owner].insert(init.values.data(), h0);
  parts[root_owner].frontier_end = 1;
  parts[root_owner].next_end = 1;

  std::atomic<std::uint64_t> total{1};
  std::atomic<bool> abort{false};
  bool resource = false;
  bool done = false;
  std::exception_ptr error;
  std::mutex error_mutex;

  auto fail = [&](std::exception_ptr e) {
    std::lock_guard lock(error_mutex);
    if (!error) error = e;
    abort = true;
  };

  auto on_level_end = [&]() noexcept {
    bool any = false;
    for (const auto& p : parts) any = any || p.frontier_begin < p.frontier_end;
    done = !any || abort.load();
  };
  std::barrier level(static_cast<std::ptrdiff_t>(W), on_level_end);
  std::barrier step(static_cast<std::ptrdiff_t>(W));

  auto worker = [&](unsigned me) {
    auto& P = parts[me];
    std::vector<Label> labels;
    std::vector<std::int32_t> buf;
    while (true) {
      // expand the frontier and route successors to their owners
      if (!abort) {
        try {
          for (std::size_t s = P.frontier_begin; s < P.frontier_end; ++s) {
            labels.clear();
            buf.clear();
            sem.successors({P.words.data() + s * width, width}, labels, buf);
            for (std::size_t k = 0; k < labels.size(); ++k) {
              const auto* w = buf.data() + k * width;
              const auto h = hash_words(w, width);
              const auto q = owner_of(h);
              auto& ob = P.out[q];
              P.pending.push_back({q, static_cast<std::uint32_t>(ob.hashes.size()), labels[k]});
              ob.words.insert(ob.words.end(), w, w + width);
              ob.hashes.push_back(h);
            }
            P.fanout.push_back(static_cast<std::uint32_t>(labels.size()));
          }
        } catch (...) {
          fail(std::current_exception());
        }
      }
      step.arrive_and_wait();
      // deduplicate the states this worker owns
      if (!abort) {
        try {
          for (unsigned src = 0; src < W; ++src) {
            auto& ob = parts[src].out[me];
            ob.result.resize(ob.hashes.size());
            for (std::size_t i = 0; i < ob.hashes.size(); ++i) {
              auto [id, fresh] = P.insert(ob.words.data() + i * width, ob.hashes[i]);
              ob.result[i] = id;
              if (fresh && ++total > opts.max_states) {
                resource = true;
                abort = true;
              }
            }
          }
          P.next_end = P.size();
        } catch (...) {
          fail(std::current_exception());
        }
      }
      step.arrive_and_wait();
      // record edges in successor order
      if (!abort) {
        std::size_t e = 0;
        for (auto n : P.fanout) {
          for (std::uint32_t k = 0; k < n; ++k, ++e) {
            const auto& pd = P.pending[e];
            const auto target = P.out[pd.owner].result[pd.index];
            P.edge_target.push_back((std::uint64_t{pd.owner} << 32) | target);
            P.edge_label.push_back(pd.label);
          }
          P.edge_begin.push_back(P.edge_target.size());
        }
        for (auto& ob : P.out) {
          ob.words.clear();
          ob.hashes.clear();
          ob.result.clear();
        }
        P.pending.clear();
        P.fanout.clear();
        P.frontier_begin = P.frontier_end;
        P.frontier_end = P.next_end;
      }
      level.arrive_and_wait();
      if (done) break;
    }
  };

  {
    std::vector<std::jthread> threads;
    for (unsigned t = 1; t < W; ++t) threads.emplace_back(worker, t);
    worker(0);
  }

  ExplorationStats st;
  auto elapsed = [&] {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
  };
  if (error) std::rethrow_exception(error);
  if (resource) {
    st.states = total.load();
    for (const auto& p : parts) st.transitions += p.edge_target.size();
    st.time_ms = elapsed();
    st.mem_bytes = peak_rss_bytes();
    if (stats) *stats = st;
    throw ResourceError("state budget of " + std::to_string(opts.max_states) + " exceeded", st);
  }

  // Canonical renumbering: breadth-first over the explored edges in successor order.
  StateGraph g;
  g.width = width;
  std::vector<std::vector<std::uint32_t>> renum(W);
  std::uint64_t n_states = 0, n_edges = 0;
  for (unsigned p = 0; p < W; ++p) {
    renum[p].assign(parts[p].size(), kEmpty);
    n_states += parts[p].size();
    n_edges += parts[p].edge_target.size();
  }
  std::vector<std::uint64_t> order;
  order.reserve(n_states);
  g.words.reserve(n_states * width);
  g.offsets.reserve(n_states + 1);
  g.targets.reserve(n_edges);
  g.labels.reserve(n_edges);
  order.push_back(std::uint64_t{root_owner} << 32);
  renum[root_owner][0] = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto o = static_cast<std::uint32_t>(order[i] >> 32);
    const auto l = static_cast<std::uint32_t>(order[i]);
    const auto& P = parts[o];
    g.words.insert(g.words.end(), P.words.begin() + static_cast<std::ptrdiff_t>(l * width),
                   P.words.begin() + static_cast<std::ptrdiff_t>((l + 1) * width));
    for (auto e = P.edge_begin[l]; e < P.edge_begin[l + 1]; ++e) {
      const auto t = P.edge_target[e];
      const auto to = static_cast<std::uint32_t>(t >> 32);
      const auto tl = static_cast<std::uint32_t>(t);
      auto& id = renum[to][tl];
      if (id == kEmpty) {
        id = static_cast<std::uint32_t>(order.size());
        order.push_back(t);
      }
      g.targets.push_back(id);
      g.labels.push_back(P.edge_label[e]);
    }
    g.offsets.push_back(g.targets.size());
  }
  parts.clear();
  g.accepting.resize(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    g.accepting[i] = sem.accepting(g.state(i));
    if (g.offsets[i] == g.offsets[i + 1]) ++st.deadlocks;
  }
  st.states = g.size();
  st.transitions = g.edge_count();
  st.time_ms = elapsed();
  st.mem_bytes = peak_rss_bytes();
  if (stats) *stats = st;
  return g;
}

StateGraph explore(const Model& model, unsigned workers, ExplorationStats* stats) {
  Semantics sem(model);
  return explore(sem, ExploreOptions{.workers = workers}, stats);
}

std::vector<TraceStep> shortest_path(const StateGraph& g, std::uint32_t target) {
  const std::size_t n = g.size();
  std::vector<std::uint32_t> parent(n, kEmpty);
  std::vector<std::uint64_t> via(n, 0);
  std::vector<std::uint32_t> queue{g.initial};
  parent[g.initial] = g.initial;
  for (std::size_t i = 0; i < queue.size() && parent[target] == kEmpty; ++i) {
    const auto u = queue[i];
    for (auto e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
      const auto v = g.targets[e];
      if (parent[v] != kEmpty) continue;
      parent[v] = u;
      via[v] = e;
      queue.push_back(v);
    }
  }
  std::vector<TraceStep> path;
  if (parent[target] == kEmpty) return path;
  auto words = [&](std::uint32_t v) {
    auto s = g.state(v);
    return State{std::vector<std::int32_t>(s.begin(), s.end())};
  };
  for (auto v = target;; v = parent[v]) {
    path.push_back({words(v), std::nullopt});
    if (v == g.initial) break;
  }
  std::reverse(path.begin(), path.end());
  // fill in edge labels along the path
  auto v = target;
  for (std::size_t k = path.size() - 1; k > 0; --k) {
    path[k - 1].next = g.labels[via[v]];
    v = parent[v];
  }
  return path;
}

Verdict check_safety(const Semantics& sem, const Expr& bad, const ExploreOptions& opts) {
  auto pred = sem.compile(bad);
  Verdict v;
  auto g = explore(sem, opts, &v.stats);
  for (std::uint32_t i = 0; i < g.size(); ++i) {
    std::int64_t hit = 0;
    try {
      hit = pred(g.state(i));
    } catch (const ModelError& e) {
      throw ModelError(e.what(), sem.state_text(g.state(i)));
    }
    if (hit) {
      v.holds = false;
      v.trace = shortest_path(g, i);
      break;
    }
  }
  return v;
}

Verdict check_safety(const Model& model, const Expr& bad, unsigned workers) {
  Semantics sem(model);
  return check_safety(sem, bad, ExploreOptions{.workers = workers});
}

std::string format_trace(const Semantics& sem, const std::vector<TraceStep>& trace,
                         std::optional<std::size_t> cycle_start) {
  std::ostringstream os;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    os << '#' << k << ' ' << sem.state_text(trace[k].state.values);
    if (trace[k].next) os << " --(" << sem.label_text(*trace[k].next) << ")-->";
    os << '\n';
  }
  if (cycle_start) os << "loop #" << *cycle_start << '\n';
  return os.str();
}

std::string replay_trace(const Semantics& sem, const std::vector<TraceStep>& trace) {
  if (trace.empty()) return {};
  if (trace.front().state != sem.initial()) return "step 0 is not the initial state";
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    if (!trace[k].next) return "step " + std::to_string(k) + " has no outgoing label";
    bool found = false;
    for (const auto& [l, s] : sem.successors(trace[k].state))
      if (l == *trace[k].next && s == trace[k + 1].state) found = true;
    if (!found)
      return "step " + std::to_string(k) + " -> " + std::to_string(k + 1) +
             " is not a transition of the model";
  }
  return {};
}

std::string replay_trace_text(const Semantics& sem, const std::string& text) {
  struct Line {
    std::string state;
    std::string label;
  };
  std::vector<Line> lines;
  std::optional<std::size_t> loop;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("loop #", 0) == 0) {
      loop = std::stoul(line.substr(6));
      continue;
    }
    if (line[0] != '#') return "unexpected line: " + line;
    auto sp = line.find(' ');
    if (sp == std::string::npos) return "malformed line: " + line;
    Line l;
    auto rest = line.substr(sp + 1);
    auto arrow = rest.rfind(" --(");
    if (arrow != std::string::npos && rest.size() >= 4 && rest.ends_with(")-->")) {
      l.label = rest.substr(arrow + 4, rest.size() - arrow - 8);
      rest = rest.substr(0, arrow);
    }
    l.state = rest;
    lines.push_back(std::move(l));
  }
  if (lines.empty()) return "empty trace";
  auto cur = sem.initial();
  if (sem.state_text(cur.values) != lines[0].state) return "step 0 is not the initial state";
  auto advance = [&](std::size_t k, const std::string& want) -> std::optional<State> {
    for (const auto& [l, s] : sem.successors(cur))
      if (sem.label_text(l) == lines[k].label && sem.state_text(s.values) == want) return s;
    return std::nullopt;
  };
  for (std::size_t k = 0; k + 1 < lines.size(); ++k) {
    auto nxt = advance(k, lines[k + 1].state);
    if (!nxt) return "step " + std::to_string(k) + " -> " + std::to_string(k + 1) + " does not replay";
    cur = *nxt;
  }
  if (loop) {
    if (*loop >= lines.size()) return "loop target out of range";
    if (lines.back().label.empty()) return "loop step has no label";
    if (!advance(lines.size() - 1, lines[*loop].state)) return "loop edge does not replay";
  }
  return {};
}

}  // namespace tdve
