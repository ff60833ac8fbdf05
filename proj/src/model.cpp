#include "tdve/model.hpp"

#include <algorithm>
#include <limits>
#include <sstream>
#include <unordered_set>

namespace tdve {

std::string to_string(const Diagnostic& d, const std::string& path) {
  std::ostringstream os;
  os << (path.empty() ? "<model>" : path) << ':' << d.loc.line << ':' << d.loc.column << ": "
     << d.message;
  return os.str();
}

const char* to_string(TickMode m) { return m == TickMode::Ledm ? "ledm" : "eedm"; }

// ---------------------------------------------------------------------------
// Expr construction

Expr Expr::integer(std::int64_t v, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Int;
  e.value = v;
  e.loc = loc;
  return e;
}

Expr Expr::boolean(bool b, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Bool;
  e.value = b ? 1 : 0;
  e.loc = loc;
  return e;
}

Expr Expr::variable(std::string name, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Var;
  e.name = std::move(name);
  e.loc = loc;
  return e;
}

Expr Expr::element(std::string name, Expr index, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Index;
  e.name = std::move(name);
  e.args.push_back(std::move(index));
  e.loc = loc;
  return e;
}

Expr Expr::unary_op(UnaryOp op, Expr x, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Unary;
  e.unary = op;
  e.args.push_back(std::move(x));
  e.loc = loc;
  return e;
}

Expr Expr::binary_op(BinaryOp op, Expr lhs, Expr rhs, SourceLoc loc) {
  Expr e;
  e.kind = ExprKind::Binary;
  e.binary = op;
  e.args.push_back(std::move(lhs));
  e.args.push_back(std::move(rhs));
  e.loc = loc;
  return e;
}

Expr Expr::min_active_timer() {
  Expr e;
  e.kind = ExprKind::MinActiveTimer;
  return e;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case ExprKind::Int:
    case ExprKind::Bool:
      return a.value == b.value;
    case ExprKind::Var:
      return a.name == b.name;
    case ExprKind::Index:
      return a.name == b.name && a.args == b.args;
    case ExprKind::Unary:
      return a.unary == b.unary && a.args == b.args;
    case ExprKind::Binary:
      return a.binary == b.binary && a.args == b.args;
    case ExprKind::MinActiveTimer:
      return true;
  }
  return false;
}

Expr operator&&(Expr a, Expr b) { return Expr::binary_op(BinaryOp::And, std::move(a), std::move(b)); }
Expr operator||(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Or, std::move(a), std::move(b)); }
Expr operator!(Expr a) { return Expr::unary_op(UnaryOp::Not, std::move(a)); }
Expr eq(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Eq, std::move(a), std::move(b)); }
Expr ne(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Ne, std::move(a), std::move(b)); }
Expr lt(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Lt, std::move(a), std::move(b)); }
Expr gt(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Gt, std::move(a), std::move(b)); }
Expr add(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return Expr::binary_op(BinaryOp::Sub, std::move(a), std::move(b)); }

Expr conjoin(Expr a, Expr b) {
  if (a.is_true_literal()) return b;
  if (b.is_true_literal()) return a;
  return std::move(a) && std::move(b);
}

const char* symbol(BinaryOp op) {
  switch (op) {
    case BinaryOp::Add: return "+";
    case BinaryOp::Sub: return "-";
    case BinaryOp::Mul: return "*";
    case BinaryOp::Mod: return "%";
    case BinaryOp::Eq: return "==";
    case BinaryOp::Ne: return "!=";
    case BinaryOp::Lt: return "<";
    case BinaryOp::Le: return "<=";
    case BinaryOp::Gt: return ">";
    case BinaryOp::Ge: return ">=";
    case BinaryOp::And: return "&&";
    case BinaryOp::Or: return "||";
  }
  return "?";
}

int precedence(BinaryOp op) {
  switch (op) {
    case BinaryOp::Or: return 1;
    case BinaryOp::And: return 2;
    case BinaryOp::Eq:
    case BinaryOp::Ne: return 3;
    case BinaryOp::Lt:
    case BinaryOp::Le:
    case BinaryOp::Gt:
    case BinaryOp::Ge: return 4;
    case BinaryOp::Add:
    case BinaryOp::Sub: return 5;
    case BinaryOp::Mul:
    case BinaryOp::Mod: return 6;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Lookup helpers

std::optional<std::size_t> Process::location_index(const std::string& l) const {
  auto it = std::find(locations.begin(), locations.end(), l);
  if (it == locations.end()) return std::nullopt;
  return static_cast<std::size_t>(it - locations.begin());
}

const VarDecl* Process::find_local(const std::string& n) const {
  for (const auto& v : locals)
    if (v.name == n) return &v;
  return nullptr;
}

const VarDecl* Model::find_global(const std::string& n) const {
  for (const auto& v : globals)
    if (v.name == n) return &v;
  return nullptr;
}

std::optional<std::int64_t> Model::find_constant(const std::string& n) const {
  for (const auto& [name, value] : constants)
    if (name == n) return value;
  return std::nullopt;
}

const ChannelDecl* Model::find_channel(const std::string& n) const {
  for (const auto& c : channels)
    if (c.name == n) return &c;
  return nullptr;
}

std::optional<std::size_t> Model::process_index(const std::string& n) const {
  for (std::size_t i = 0; i < processes.size(); ++i)
    if (processes[i].name == n) return i;
  return std::nullopt;
}

std::vector<std::size_t> Model::system_processes() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < processes.size(); ++i)
    if (!is_property(i)) out.push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

constexpr std::int64_t kWordMin = std::numeric_limits<std::int32_t>::min();
constexpr std::int64_t kWordMax = std::numeric_limits<std::int32_t>::max();

class Validator {
 public:
  explicit Validator(const Model& m) : m_(m) {}

  std::vector<Diagnostic> run() {
    check_globals();
    check_processes();
    if (m_.property && *m_.property >= m_.processes.size())
      error({}, "property process index out of range");
    if (m_.tick) check_tick();
    return std::move(out_);
  }

 private:
  void error(SourceLoc loc, std::string msg) { out_.push_back({loc, std::move(msg)}); }

  void check_var(const VarDecl& v) {
    if (v.lo > v.hi) error(v.loc, "empty range for '" + v.name + "'");
    if (v.lo < kWordMin || v.hi > kWordMax)
      error(v.loc, "range of '" + v.name + "' exceeds 32-bit storage");
    if (v.length && *v.length <= 0) error(v.loc, "array '" + v.name + "' must have positive length");
    if (v.init.empty() || (v.init.size() != 1 && (!v.length || std::int64_t(v.init.size()) != *v.length)))
      error(v.loc, "initializer of '" + v.name + "' has wrong element count");
    for (auto x : v.init)
      if (x < v.lo || x > v.hi) {
        error(v.loc, "initial value of '" + v.name + "' out of range");
        break;
      }
  }

  void check_globals() {
    std::unordered_set<std::string> seen;
    auto declare = [&](const std::string& n, SourceLoc loc) {
      if (!seen.insert(n).second) error(loc, "duplicate name '" + n + "'");
    };
    for (const auto& [name, value] : m_.constants) declare(name, {});
    for (const auto& v : m_.globals) {
      declare(v.name, v.loc);
      check_var(v);
    }
    for (const auto& c : m_.channels) {
      declare(c.name, c.loc);
      if (c.arity < 0) error(c.loc, "negative channel arity");
      if (!c.rendezvous) error(c.loc, "buffered channel '" + c.name + "' not supported");
    }
    std::unordered_set<std::string> procs;
    for (const auto& p : m_.processes)
      if (!procs.insert(p.name).second) error(p.loc, "duplicate name '" + p.name + "'");
  }

  void check_processes() {
    for (std::size_t pi = 0; pi < m_.processes.size(); ++pi) {
      const auto& p = m_.processes[pi];
      proc_ = &p;
      std::unordered_set<std::string> seen;
      for (const auto& v : p.locals) {
        if (!seen.insert(v.name).second) error(v.loc, "duplicate name '" + v.name + "'");
        check_var(v);
      }
      std::unordered_set<std::string> locs;
      for (const auto& l : p.locations)
        if (!locs.insert(l).second) error(p.loc, "duplicate location '" + l + "' in " + p.name);
      if (p.locations.empty()) error(p.loc, "process '" + p.name + "' has no locations");
      if (!locs.count(p.initial))
        error(p.loc, "initial location '" + p.initial + "' of " + p.name + " is not declared");
      for (const auto& a : p.accepting)
        if (!locs.count(a)) error(p.loc, "accepting location '" + a + "' is not declared");
      const bool is_prop = m_.is_property(pi);
      if (!p.accepting.empty() && !is_prop)
        error(p.loc, "accepting locations are only allowed in the property process");
      for (const auto& t : p.transitions) {
        if (!locs.count(t.src)) error(t.loc, "unknown source location '" + t.src + "'");
        if (!locs.count(t.dst)) error(t.loc, "unknown target location '" + t.dst + "'");
        expect(t.guard, ExprType::Bool, "guard");
        for (const auto& a : t.effects) {
          check_lvalue(a.target);
          expect(a.value, ExprType::Int, "assigned value");
        }
        if (t.sync) check_sync(*t.sync);
        if (is_prop && (t.sync || !t.effects.empty()))
          error(t.loc, "property process transitions may not synchronise or assign");
      }
    }
    proc_ = nullptr;
  }

  void check_sync(const Sync& s) {
    const auto* ch = m_.find_channel(s.channel);
    if (!ch) {
      error(s.loc, "unresolved identifier '" + s.channel + "' (channel)");
      return;
    }
    if (static_cast<int>(s.payload_size()) != ch->arity)
      error(s.loc, "channel '" + s.channel + "' expects " + std::to_string(ch->arity) +
                       " value(s)");
    for (const auto& v : s.values) expect(v, ExprType::Int, "sent value");
    for (const auto& t : s.targets) check_lvalue(t);
  }

  const VarDecl* resolve_var(const std::string& n) const {
    if (proc_)
      if (const auto* v = proc_->find_local(n)) return v;
    return m_.find_global(n);
  }

  void check_lvalue(const LValue& lv) {
    const auto* v = resolve_var(lv.name);
    if (!v) {
      if (m_.find_constant(lv.name))
        error(lv.loc, "cannot assign to constant '" + lv.name + "'");
      else
        error(lv.loc, "unresolved identifier '" + lv.name + "'");
      return;
    }
    if (v->length.has_value() != lv.index.has_value())
      error(lv.loc, v->length ? "array '" + lv.name + "' needs an index"
                              : "'" + lv.name + "' is not an array");
    if (lv.index) expect(*lv.index, ExprType::Int, "array index");
  }

  void expect(const Expr& e, ExprType want, const char* what) {
    auto t = type_of(e);
    if (t && *t != want)
      error(e.loc, std::string(what) + " must be " + (want == ExprType::Int ? "integer" : "boolean"));
  }

  std::optional<ExprType> type_of(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Int: return ExprType::Int;
      case ExprKind::Bool: return ExprType::Bool;
      case ExprKind::MinActiveTimer:
        error(e.loc, "MIN_ACTIVE_TIMER is reserved for the clock process");
        return ExprType::Int;
      case ExprKind::Var: {
        if (m_.find_constant(e.name) && !resolve_var(e.name)) return ExprType::Int;
        const auto* v = resolve_var(e.name);
        if (!v) {
          error(e.loc, "unresolved identifier '" + e.name + "'");
          return std::nullopt;
        }
        if (v->length) error(e.loc, "array '" + e.name + "' used without index");
        return ExprType::Int;
      }
      case ExprKind::Index: {
        const auto* v = resolve_var(e.name);
        if (!v) {
          error(e.loc, "unresolved identifier '" + e.name + "'");
        } else if (!v->length) {
          error(e.loc, "'" + e.name + "' is not an array");
        }
        expect(e.args.at(0), ExprType::Int, "array index");
        return ExprType::Int;
      }
      case ExprKind::Unary: {
        auto want = e.unary == UnaryOp::Neg ? ExprType::Int : ExprType::Bool;
        expect(e.args.at(0), want, e.unary == UnaryOp::Neg ? "operand of '-'" : "operand of '!'");
        return want;
      }
      case ExprKind::Binary: {
        switch (e.binary) {
          case BinaryOp::Add:
          case BinaryOp::Sub:
          case BinaryOp::Mul:
          case BinaryOp::Mod:
            expect(e.args[0], ExprType::Int, "arithmetic operand");
            expect(e.args[1], ExprType::Int, "arithmetic operand");
            return ExprType::Int;
          case BinaryOp::Lt:
          case BinaryOp::Le:
          case BinaryOp::Gt:
          case BinaryOp::Ge:
            expect(e.args[0], ExprType::Int, "comparison operand");
            expect(e.args[1], ExprType::Int, "comparison operand");
            return ExprType::Bool;
          case BinaryOp::Eq:
          case BinaryOp::Ne: {
            auto l = type_of(e.args[0]);
            auto r = type_of(e.args[1]);
            if (l && r && *l != *r) error(e.loc, "operands of equality have different types");
            return ExprType::Bool;
          }
          case BinaryOp::And:
          case BinaryOp::Or:
            expect(e.args[0], ExprType::Bool, "logical operand");
            expect(e.args[1], ExprType::Bool, "logical operand");
            return ExprType::Bool;
        }
      }
    }
    return std::nullopt;
  }

  void check_tick() {
    const auto& t = *m_.tick;
    const std::size_t want_timers = t.mode == TickMode::Ledm ? 2 : 1;
    if (t.timers.size() != want_timers) error({}, "clock process has wrong number of timer arrays");
    const auto n = static_cast<std::int64_t>(m_.system_processes().size());
    for (const auto& name : t.timers) {
      const auto* v = m_.find_global(name);
      if (!v || v->length.value_or(-1) != n)
        error({}, "timer array '" + name + "' must be a global array with one slot per process");
    }
    if (t.signals) {
      if (t.mode != TickMode::Eedm) error({}, "signal array only exists for the efficient clock");
      const auto* v = m_.find_global(*t.signals);
      if (!v || v->length.value_or(-1) != n) error({}, "signal array '" + *t.signals + "' malformed");
    }
    if (t.now && !m_.find_global(*t.now)) error({}, "clock variable '" + *t.now + "' not declared");
    if (t.maximal <= t.infinity) error({}, "MAXIMAL must exceed INFINITY");
  }

  const Model& m_;
  const Process* proc_ = nullptr;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate(const Model& model) { return Validator(model).run(); }

std::vector<Diagnostic> validate(const TimedModel& tm) {
  auto out = validate(tm.base);
  if (tm.base.tick) out.push_back({{}, "a timed model must not carry a clock process"});
  auto check_ref = [&](const TransitionRef& r) -> const Transition* {
    if (r.process >= tm.base.processes.size() ||
        r.transition >= tm.base.processes[r.process].transitions.size()) {
      out.push_back({{}, "time annotation refers to a missing transition"});
      return nullptr;
    }
    return &tm.base.processes[r.process].transitions[r.transition];
  };
  for (const auto& [ref, b] : tm.bounds) {
    const auto* t = check_ref(ref);
    if (!t) continue;
    if (!b.lower && !b.upper) out.push_back({t->loc, "time clause without bounds"});
    if (b.lower && *b.lower < 0) out.push_back({t->loc, "lower bound must be nonnegative"});
    if (b.upper && *b.upper < 1) out.push_back({t->loc, "upper bound must be at least 1"});
    if (b.lower && b.upper && *b.lower > *b.upper)
      out.push_back({t->loc, "lower bound exceeds upper bound"});
    if (t->sync) out.push_back({t->loc, "a bounded transition may not synchronise"});
    if (tm.base.is_property(ref.process))
      out.push_back({t->loc, "property transitions may not carry time bounds"});
  }
  for (const auto& ref : tm.observe) {
    const auto* t = check_ref(ref);
    if (t && !tm.bounds.count(ref)) out.push_back({t->loc, "observe requires a time clause"});
  }
  return out;
}

}  // namespace tdve
