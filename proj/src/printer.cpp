#include <sstream>

#include "tdve/frontend.hpp"

namespace tdve {

namespace {

void print_expr(std::ostream& os, const Expr& e);

void print_operand(std::ostream& os, const Expr& child, int min_prec) {
  bool parens = child.kind == ExprKind::Binary && precedence(child.binary) < min_prec;
  if (parens) os << '(';
  print_expr(os, child);
  if (parens) os << ')';
}

void print_expr(std::ostream& os, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Int:
      os << e.value;
      return;
    case ExprKind::Bool:
      os << (e.value ? "true" : "false");
      return;
    case ExprKind::Var:
      os << e.name;
      return;
    case ExprKind::Index:
      os << e.name << '[';
      print_expr(os, e.args[0]);
      os << ']';
      return;
    case ExprKind::MinActiveTimer:
      os << "MIN_ACTIVE_TIMER";
      return;
    case ExprKind::Unary:
      if (e.unary == UnaryOp::Neg) {
        // always parenthesised so that -(3) is not read back as the literal -3
        os << "-(";
        print_expr(os, e.args[0]);
        os << ')';
      } else {
        os << '!';
        print_operand(os, e.args[0], 100);
      }
      return;
    case ExprKind::Binary: {
      const int p = precedence(e.binary);
      print_operand(os, e.args[0], p);
      os << ' ' << symbol(e.binary) << ' ';
      print_operand(os, e.args[1], p + 1);
      return;
    }
  }
}

void print_lvalue(std::ostream& os, const LValue& lv) {
  os << lv.name;
  if (lv.index) {
    os << '[';
    print_expr(os, *lv.index);
    os << ']';
  }
}

void print_var(std::ostream& os, const VarDecl& v, const char* indent) {
  os << indent << "int[" << v.lo << ".." << v.hi << "] " << v.name;
  if (v.length) os << '[' << *v.length << ']';
  os << " = ";
  if (v.init.size() == 1) {
    os << v.init.front();
  } else {
    os << '{';
    for (std::size_t i = 0; i < v.init.size(); ++i) os << (i ? ", " : "") << v.init[i];
    os << '}';
  }
  os << ";\n";
}

void print_list(std::ostream& os, const std::vector<std::string>& xs) {
  for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? ", " : "") << xs[i];
}

void print_sync(std::ostream& os, const Sync& s) {
  os << "sync " << s.channel << (s.dir == SyncDir::Send ? '!' : '?');
  const auto n = s.payload_size();
  if (n > 1) os << '{';
  for (std::size_t i = 0; i < n; ++i) {
    if (i) os << ", ";
    if (s.dir == SyncDir::Send)
      print_expr(os, s.values[i]);
    else
      print_lvalue(os, s.targets[i]);
  }
  if (n > 1) os << '}';
  os << "; ";
}

void print_transition(std::ostream& os, const Transition& t, const TimeBound* bound,
                      bool observe) {
  os << "    " << t.src << " -> " << t.dst << " { ";
  if (!t.guard.is_true_literal()) {
    os << "guard ";
    print_expr(os, t.guard);
    os << "; ";
  }
  if (t.sync) print_sync(os, *t.sync);
  if (!t.effects.empty()) {
    os << "effect ";
    for (std::size_t i = 0; i < t.effects.size(); ++i) {
      if (i) os << ", ";
      print_lvalue(os, t.effects[i].target);
      os << " = ";
      print_expr(os, t.effects[i].value);
    }
    os << "; ";
  }
  if (bound) {
    os << "time [";
    if (bound->lower) os << *bound->lower;
    os << ", ";
    if (bound->upper) os << *bound->upper;
    os << ']';
    if (observe) os << " observe";
    os << "; ";
  }
  os << '}';
}

void print_process(std::ostream& os, const Process& p, const TimedModel* tm, std::size_t index) {
  os << "process " << p.name << " {\n";
  for (const auto& v : p.locals) print_var(os, v, "  ");
  os << "  state ";
  print_list(os, p.locations);
  os << ";\n  init " << p.initial << ";\n";
  if (!p.accepting.empty()) {
    os << "  accept ";
    print_list(os, p.accepting);
    os << ";\n";
  }
  if (!p.transitions.empty()) {
    os << "  trans\n";
    for (std::size_t t = 0; t < p.transitions.size(); ++t) {
      const TimeBound* bound = nullptr;
      bool observe = false;
      if (tm) {
        TransitionRef ref{index, t};
        if (auto it = tm->bounds.find(ref); it != tm->bounds.end()) bound = &it->second;
        observe = tm->observe.count(ref) > 0;
      }
      print_transition(os, p.transitions[t], bound, observe);
      os << (t + 1 == p.transitions.size() ? ";\n" : ",\n");
    }
  }
  os << "}\n";
}

void print_model(std::ostream& os, const Model& m, const TimedModel* tm) {
  for (const auto& [name, value] : m.constants) os << "const " << name << " = " << value << ";\n";
  for (const auto& v : m.globals) print_var(os, v, "");
  for (const auto& c : m.channels) {
    os << "channel " << c.name;
    if (c.arity) os << " : " << c.arity;
    os << ";\n";
  }
  for (std::size_t p = 0; p < m.processes.size(); ++p) {
    os << '\n';
    print_process(os, m.processes[p], tm, p);
  }
  if (m.property) os << "\nproperty " << m.processes[*m.property].name << ";\n";
}

std::string conj_text(const std::vector<std::string>& parts, const char* op) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? std::string(" ") + op + " " : "") + parts[i];
  return out;
}

std::vector<std::string> each(const std::string& array, std::size_t n, const std::string& cmp) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(array + "[" + std::to_string(i) + "] " + cmp);
  return out;
}

void print_tick(std::ostream& os, const Model& m) {
  const auto& t = *m.tick;
  const auto n = m.system_processes().size();
  const std::string inf = std::to_string(t.infinity);
  std::string now_effect = t.now ? *t.now + " = (" + *t.now + " + STEP) % " +
                                       std::to_string(t.maximal) + ", "
                                 : std::string{};
  auto with_step = [&](const std::string& step) {
    std::string s = now_effect;
    if (auto pos = s.find("STEP"); pos != std::string::npos) s.replace(pos, 4, step);
    return s;
  };
  os << "\n// clock process (" << to_string(t.mode) << "), evaluated natively\n";
  os << "process Tick {\n  state tick;\n  init tick;\n  trans\n";
  if (t.mode == TickMode::Ledm) {
    const auto& ub = t.timers.at(0);
    const auto& lb = t.timers.at(1);
    os << "    // guard: every " << ub << "[i] > 0\n";
    os << "    // effect: " << with_step("1") << "every " << ub << "[i] != " << inf
       << " decremented by 1, every " << lb << "[i] != 0 decremented by 1\n";
    auto guard = conj_text(each(ub, n, "> 0"), "&&");
    os << "    tick -> tick { " << (guard.empty() ? "" : "guard " + guard + "; ") << "};\n";
  } else {
    const auto& tm = t.timers.at(0);
    auto base = conj_text(each(tm, n, "> 0"), "&&");
    auto some = conj_text(each(tm, n, "!= " + inf), "||");
    std::string guard = "(" + base + ") && (" + some + ")";
    os << "    // leaping: guard every " << tm << "[i] > 0, some " << tm << "[i] != " << inf;
    if (t.signals) os << ", every " << *t.signals << "[i] == 0";
    os << "\n    // effect: " << with_step("MIN_ACTIVE_TIMER") << "every " << tm << "[i] != " << inf
       << " decremented by MIN_ACTIVE_TIMER\n";
    std::string leap_guard = guard;
    if (t.signals) leap_guard += " && (" + conj_text(each(*t.signals, n, "== 0"), "&&") + ")";
    os << "    tick -> tick { guard " << leap_guard << "; }";
    if (t.signals) {
      os << ",\n    // standard: guard every " << tm << "[i] > 0, some " << tm << "[i] != " << inf
         << ", some " << *t.signals << "[i] == 1\n";
      os << "    // effect: " << with_step("1") << "every " << tm << "[i] != " << inf
         << " decremented by 1\n";
      os << "    tick -> tick { guard " << guard << " && ("
         << conj_text(each(*t.signals, n, "== 1"), "||") << "); }";
    }
    os << ";\n";
  }
  os << "}\n";
}

}  // namespace

std::string pretty(const Expr& e) {
  std::ostringstream os;
  print_expr(os, e);
  return os.str();
}

std::string pretty(const Process& p) {
  std::ostringstream os;
  print_process(os, p, nullptr, 0);
  return os.str();
}

std::string pretty(const TimedModel& model) {
  std::ostringstream os;
  print_model(os, model.base, &model);
  return os.str();
}

std::string pretty_lowered(const Model& model) {
  std::ostringstream os;
  Model untimed = model;
  untimed.tick.reset();
  TimedModel wrapper{std::move(untimed), {}, {}};
  print_model(os, wrapper.base, &wrapper);
  if (model.tick) print_tick(os, model);
  return os.str();
}

}  // namespace tdve
