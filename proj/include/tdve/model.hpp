#pragma once

// Intermediate representation for untimed and timed guarded-command models.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tdve {

struct SourceLoc {
  int line = 0;
  int column = 0;
};

struct Diagnostic {
  SourceLoc loc;
  std::string message;
};

std::string to_string(const Diagnostic& d, const std::string& path = {});

/// Raised while executing a model: out-of-range assignment, bad array index,
/// modulo by zero. Carries the textual form of the offending state.
class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, std::string state_text = {})
      : std::runtime_error(what), state_text_(std::move(state_text)) {}
  const std::string& state_text() const { return state_text_; }

 private:
  std::string state_text_;
};

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind { Int, Bool, Var, Index, Unary, Binary, MinActiveTimer };
enum class UnaryOp { Neg, Not };
enum class BinaryOp { Add, Sub, Mul, Mod, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

struct Expr {
  ExprKind kind = ExprKind::Bool;
  std::int64_t value = 1;  // Int literal value, Bool literal truth
  std::string name;        // Var and Index
  UnaryOp unary = UnaryOp::Neg;
  BinaryOp binary = BinaryOp::Add;
  std::vector<Expr> args;  // Index: {index}; Unary: {x}; Binary: {lhs, rhs}
  SourceLoc loc;

  static Expr integer(std::int64_t v, SourceLoc loc = {});
  static Expr boolean(bool b, SourceLoc loc = {});
  static Expr variable(std::string name, SourceLoc loc = {});
  static Expr element(std::string name, Expr index, SourceLoc loc = {});
  static Expr unary_op(UnaryOp op, Expr x, SourceLoc loc = {});
  static Expr binary_op(BinaryOp op, Expr lhs, Expr rhs, SourceLoc loc = {});
  static Expr min_active_timer();

  bool is_true_literal() const { return kind == ExprKind::Bool && value != 0; }

  // Structural equality; source locations are ignored.
  friend bool operator==(const Expr& a, const Expr& b);
};

// Shorthands used by generators and lowering.
Expr operator&&(Expr a, Expr b);
Expr operator||(Expr a, Expr b);
Expr operator!(Expr a);
Expr eq(Expr a, Expr b);
Expr ne(Expr a, Expr b);
Expr lt(Expr a, Expr b);
Expr gt(Expr a, Expr b);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);

/// Conjunction that drops literal `true` operands.
Expr conjoin(Expr a, Expr b);

const char* symbol(BinaryOp op);
int precedence(BinaryOp op);

struct LValue {
  std::string name;
  std::optional<Expr> index;
  SourceLoc loc;

  friend bool operator==(const LValue& a, const LValue& b) {
    return a.name == b.name && a.index == b.index;
  }
};

struct Assignment {
  LValue target;
  Expr value;

  friend bool operator==(const Assignment& a, const Assignment& b) {
    return a.target == b.target && a.value == b.value;
  }
};

// ---------------------------------------------------------------------------
// Declarations

struct VarDecl {
  std::string name;
  std::int64_t lo = 0;
  std::int64_t hi = 0;
  // One value (broadcast to every element) or one value per element.
  std::vector<std::int64_t> init{0};
  std::optional<std::int64_t> length;  // array when present
  SourceLoc loc;

  std::int64_t width() const { return length.value_or(1); }
  std::int64_t init_at(std::int64_t i) const {
    return init.size() == 1 ? init.front() : init.at(static_cast<std::size_t>(i));
  }

  friend bool operator==(const VarDecl& a, const VarDecl& b) {
    return a.name == b.name && a.lo == b.lo && a.hi == b.hi && a.init == b.init &&
           a.length == b.length;
  }
};

struct ChannelDecl {
  std::string name;
  bool rendezvous = true;  // buffered channels are not supported
  int arity = 0;
  SourceLoc loc;

  friend bool operator==(const ChannelDecl& a, const ChannelDecl& b) {
    return a.name == b.name && a.rendezvous == b.rendezvous && a.arity == b.arity;
  }
};

enum class SyncDir { Send, Recv };

struct Sync {
  std::string channel;
  SyncDir dir = SyncDir::Send;
  std::vector<Expr> values;     // Send payload
  std::vector<LValue> targets;  // Recv payload
  SourceLoc loc;

  std::size_t payload_size() const {
    return dir == SyncDir::Send ? values.size() : targets.size();
  }

  friend bool operator==(const Sync& a, const Sync& b) {
    return a.channel == b.channel && a.dir == b.dir && a.values == b.values &&
           a.targets == b.targets;
  }
};

struct Transition {
  std::string src;
  std::string dst;
  Expr guard = Expr::boolean(true);
  std::optional<Sync> sync;
  std::vector<Assignment> effects;  // simultaneous: every RHS reads the pre-state
  SourceLoc loc;

  friend bool operator==(const Transition& a, const Transition& b) {
    return a.src == b.src && a.dst == b.dst && a.guard == b.guard && a.sync == b.sync &&
           a.effects == b.effects;
  }
};

struct Process {
  std::string name;
  std::vector<VarDecl> locals;
  std::vector<std::string> locations;
  std::string initial;
  std::vector<Transition> transitions;
  std::vector<std::string> accepting;
  SourceLoc loc;

  std::optional<std::size_t> location_index(const std::string& l) const;
  const VarDecl* find_local(const std::string& n) const;

  friend bool operator==(const Process& a, const Process& b) {
    return a.name == b.name && a.locals == b.locals && a.locations == b.locations &&
           a.initial == b.initial && a.transitions == b.transitions &&
           a.accepting == b.accepting;
  }
};

enum class TickMode { Ledm, Eedm };

const char* to_string(TickMode m);

/// Native clock process added by lowering. Its guards and effects are fixed by
/// the mode and evaluated by the engine, not expressed as transitions.
struct TickSpec {
  TickMode mode = TickMode::Ledm;
  // Ledm: {ubtimer, lbtimer}; Eedm: {timer}. Each names a global array with
  // one element per non-property process.
  std::vector<std::string> timers;
  std::optional<std::string> signals;
  std::optional<std::string> now;
  std::int64_t infinity = 1'000'000;
  std::int64_t maximal = std::int64_t{1} << 30;

  friend bool operator==(const TickSpec&, const TickSpec&) = default;
};

struct Model {
  std::vector<std::pair<std::string, std::int64_t>> constants;
  std::vector<VarDecl> globals;
  std::vector<ChannelDecl> channels;
  std::vector<Process> processes;
  std::optional<std::size_t> property;
  std::optional<TickSpec> tick;

  const VarDecl* find_global(const std::string& n) const;
  std::optional<std::int64_t> find_constant(const std::string& n) const;
  const ChannelDecl* find_channel(const std::string& n) const;
  std::optional<std::size_t> process_index(const std::string& n) const;

  bool is_property(std::size_t p) const { return property && *property == p; }
  /// Processes other than the property process, in declaration order.
  std::vector<std::size_t> system_processes() const;

  friend bool operator==(const Model& a, const Model& b) {
    return a.constants == b.constants && a.globals == b.globals && a.channels == b.channels &&
           a.processes == b.processes && a.property == b.property && a.tick == b.tick;
  }
};

// ---------------------------------------------------------------------------
// Timed models

struct TransitionRef {
  std::size_t process = 0;
  std::size_t transition = 0;
  friend auto operator<=>(const TransitionRef&, const TransitionRef&) = default;
};

struct TimeBound {
  std::optional<std::int64_t> lower;
  std::optional<std::int64_t> upper;
  friend bool operator==(const TimeBound&, const TimeBound&) = default;
};

struct TimedModel {
  Model base;
  std::map<TransitionRef, TimeBound> bounds;
  std::set<TransitionRef> observe;

  friend bool operator==(const TimedModel&, const TimedModel&) = default;
};

// ---------------------------------------------------------------------------
// Validation

std::vector<Diagnostic> validate(const Model& model);
std::vector<Diagnostic> validate(const TimedModel& model);

enum class ExprType { Int, Bool };

}  // namespace tdve
