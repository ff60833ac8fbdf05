#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>

#include "tdve/frontend.hpp"

namespace tdve {

std::string ParseError::format(const std::string& path) const {
  return to_string(Diagnostic{loc_, what()}, path);
}

SourceFile read_source(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError({0, 0}, "cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return {os.str(), path};
}

namespace {

enum class Tok { Ident, Number, Punct, End };

struct Token {
  Tok kind = Tok::End;
  std::string text;
  std::int64_t number = 0;
  SourceLoc loc;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skip_space();
      Token t;
      t.loc = {line_, col_};
      if (pos_ >= src_.size()) {
        t.kind = Tok::End;
        out.push_back(t);
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        t.kind = Tok::Ident;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
          t.text += advance();
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        t.kind = Tok::Number;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          t.text += advance();
        if (t.text.size() > 18) throw ParseError(t.loc, "integer literal too large");
        t.number = std::stoll(t.text);
      } else {
        t.kind = Tok::Punct;
        static constexpr std::string_view two[] = {"->", "==", "!=", "<=", ">=", "&&", "||", ".."};
        std::string_view rest = src_.substr(pos_);
        for (auto op : two)
          if (rest.substr(0, 2) == op) {
            t.text = std::string(op);
            advance();
            advance();
            break;
          }
        if (t.text.empty()) {
          static constexpr std::string_view one = "{}[]();,=!<>+-*%?:";
          if (one.find(c) == std::string_view::npos) {
            std::string shown = std::isprint(static_cast<unsigned char>(c))
                                    ? std::string(1, c)
                                    : "\\x" + std::to_string(static_cast<unsigned char>(c));
            throw ParseError(t.loc, "unexpected character '" + shown + "'");
          }
          t.text = std::string(1, advance());
        }
      }
      out.push_back(std::move(t));
    }
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : toks_(Lexer(text).run()) {}

  TimedModel model() {
    TimedModel tm;
    auto& m = tm.base;
    current_model_ = &m;
    while (!at_end()) {
      if (accept_word("const")) {
        auto name = ident();
        expect("=");
        auto v = signed_number();
        expect(";");
        m.constants.emplace_back(name, v);
      } else if (accept_word("channel")) {
        do {
          ChannelDecl c;
          c.loc = peek().loc;
          c.name = ident();
          if (accept(":")) c.arity = static_cast<int>(number());
          m.channels.push_back(std::move(c));
        } while (accept(","));
        expect(";");
      } else if (is_type_start()) {
        var_decls(m.globals);
      } else if (peek_word("process")) {
        process(tm, m.processes.size());
      } else if (accept_word("property")) {
        auto loc = peek().loc;
        auto name = ident();
        expect(";");
        if (m.property) throw ParseError(loc, "second property declaration");
        auto idx = m.process_index(name);
        if (!idx) throw ParseError(loc, "property refers to unknown process '" + name + "'");
        m.property = *idx;
      } else {
        fail("expected a declaration, process or property");
      }
    }
    return tm;
  }

  Process single_process() {
    TimedModel tm;
    process(tm, 0);
    if (!at_end()) fail("trailing input after process");
    if (!tm.bounds.empty()) throw ParseError({1, 1}, "claims may not carry time clauses");
    return std::move(tm.base.processes.front());
  }

  Expr whole_expr() {
    auto e = expr();
    if (!at_end()) fail("trailing input after expression");
    return e;
  }

 private:
  // --- token helpers ---
  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == Tok::End; }
  const Token& next() {
    const Token& t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    std::string got = t.kind == Tok::End ? "end of input" : "'" + t.text + "'";
    throw ParseError(t.loc, msg + ", found " + got);
  }

  bool peek_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }
  bool peek_word(std::string_view w) const { return peek().kind == Tok::Ident && peek().text == w; }
  bool accept(std::string_view p) {
    if (!peek_punct(p)) return false;
    next();
    return true;
  }
  bool accept_word(std::string_view w) {
    if (!peek_word(w)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "'");
  }
  void expect_word(std::string_view w) {
    if (!accept_word(w)) fail("expected '" + std::string(w) + "'");
  }

  static bool reserved(const std::string& s) {
    static const char* words[] = {"const",  "channel", "process", "property", "state",
                                  "init",   "accept",  "trans",   "guard",    "sync",
                                  "effect", "time",    "observe", "int",      "byte",
                                  "true",   "false",   "and",     "or",       "not",
                                  "MIN_ACTIVE_TIMER"};
    for (auto* w : words)
      if (s == w) return true;
    return false;
  }

  std::string ident() {
    if (peek().kind != Tok::Ident || reserved(peek().text)) fail("expected identifier");
    return next().text;
  }

  std::int64_t number() {
    if (peek().kind != Tok::Number) fail("expected integer");
    return next().number;
  }

  std::int64_t signed_number() {
    bool neg = accept("-");
    auto v = number();
    return neg ? -v : v;
  }

  // Integer in a declaration: literal or previously declared constant.
  std::int64_t const_value(const Model* m) {
    if (peek().kind == Tok::Ident && m) {
      auto loc = peek().loc;
      auto name = ident();
      if (auto c = m->find_constant(name)) return *c;
      throw ParseError(loc, "unresolved identifier '" + name + "' (constant expected)");
    }
    return signed_number();
  }

  // --- declarations ---
  bool is_type_start() const { return peek_word("int") || peek_word("byte"); }

  void var_decls(std::vector<VarDecl>& out) {
    std::int64_t lo = 0, hi = 0;
    if (accept_word("byte")) {
      lo = 0;
      hi = 255;
    } else {
      expect_word("int");
      if (accept("[")) {
        lo = const_value(current_model_);
        expect("..");
        hi = const_value(current_model_);
        expect("]");
      } else {
        lo = -32768;
        hi = 32767;
      }
    }
    do {
      VarDecl v;
      v.loc = peek().loc;
      v.name = ident();
      v.lo = lo;
      v.hi = hi;
      v.init = {0};
      if (accept("[")) {
        v.length = const_value(current_model_);
        expect("]");
      }
      if (accept("=")) {
        if (accept("{")) {
          v.init.clear();
          do v.init.push_back(const_value(current_model_));
          while (accept(","));
          expect("}");
        } else {
          v.init = {const_value(current_model_)};
        }
      } else if (lo > 0 || hi < 0) {
        v.init = {lo};
      }
      out.push_back(std::move(v));
    } while (accept(","));
    expect(";");
  }

  std::vector<std::string> ident_list() {
    std::vector<std::string> out;
    do out.push_back(ident());
    while (accept(","));
    return out;
  }

  void process(TimedModel& tm, std::size_t index) {
    Process p;
    p.loc = peek().loc;
    expect_word("process");
    p.name = ident();
    expect("{");
    while (is_type_start()) var_decls(p.locals);
    expect_word("state");
    p.locations = ident_list();
    expect(";");
    expect_word("init");
    p.initial = ident();
    expect(";");
    if (accept_word("accept")) {
      p.accepting = ident_list();
      expect(";");
    }
    if (accept_word("trans")) {
      while (!peek_punct("}")) {
        transition(tm, p, index);
        if (!accept(",")) {
          accept(";");
          break;
        }
      }
    }
    expect("}");
    tm.base.processes.push_back(std::move(p));
  }

  void transition(TimedModel& tm, Process& p, std::size_t index) {
    Transition t;
    t.loc = peek().loc;
    t.src = ident();
    expect("->");
    t.dst = ident();
    expect("{");
    const TransitionRef ref{index, p.transitions.size()};
    if (accept_word("guard")) {
      t.guard = expr();
      expect(";");
    }
    if (accept_word("sync")) {
      t.sync = sync();
      expect(";");
    }
    if (accept_word("effect")) {
      do {
        Assignment a;
        a.target = lvalue();
        expect("=");
        a.value = expr();
        t.effects.push_back(std::move(a));
      } while (accept(","));
      expect(";");
    }
    if (peek_word("time")) {
      auto loc = next().loc;
      TimeBound b;
      expect("[");
      if (!peek_punct(",")) b.lower = const_value(&tm.base);
      expect(",");
      if (!peek_punct("]")) b.upper = const_value(&tm.base);
      expect("]");
      if (!b.lower && !b.upper) throw ParseError(loc, "time clause needs at least one bound");
      if (accept_word("observe")) tm.observe.insert(ref);
      expect(";");
      tm.bounds[ref] = b;
    }
    expect("}");
    p.transitions.push_back(std::move(t));
  }

  Sync sync() {
    Sync s;
    s.loc = peek().loc;
    s.channel = ident();
    if (accept("!")) {
      s.dir = SyncDir::Send;
      if (accept("{")) {
        do s.values.push_back(expr());
        while (accept(","));
        expect("}");
      } else if (!peek_punct(";")) {
        s.values.push_back(expr());
      }
    } else if (accept("?")) {
      s.dir = SyncDir::Recv;
      if (accept("{")) {
        do s.targets.push_back(lvalue());
        while (accept(","));
        expect("}");
      } else if (!peek_punct(";")) {
        s.targets.push_back(lvalue());
      }
    } else {
      fail("expected '!' or '?'");
    }
    return s;
  }

  LValue lvalue() {
    LValue lv;
    lv.loc = peek().loc;
    lv.name = ident();
    if (accept("[")) {
      lv.index = expr();
      expect("]");
    }
    return lv;
  }

  // --- expressions (precedence climbing) ---
  Expr expr() { return or_expr(); }

  Expr or_expr() {
    auto lhs = and_expr();
    for (;;) {
      auto loc = peek().loc;
      if (accept("||") || accept_word("or"))
        lhs = Expr::binary_op(BinaryOp::Or, std::move(lhs), and_expr(), loc);
      else
        return lhs;
    }
  }

  Expr and_expr() {
    auto lhs = eq_expr();
    for (;;) {
      auto loc = peek().loc;
      if (accept("&&") || accept_word("and"))
        lhs = Expr::binary_op(BinaryOp::And, std::move(lhs), eq_expr(), loc);
      else
        return lhs;
    }
  }

  Expr eq_expr() {
    auto lhs = rel_expr();
    for (;;) {
      auto loc = peek().loc;
      if (accept("=="))
        lhs = Expr::binary_op(BinaryOp::Eq, std::move(lhs), rel_expr(), loc);
      else if (accept("!="))
        lhs = Expr::binary_op(BinaryOp::Ne, std::move(lhs), rel_expr(), loc);
      else
        return lhs;
    }
  }

  Expr rel_expr() {
    auto lhs = add_expr();
    for (;;) {
      auto loc = peek().loc;
      BinaryOp op;
      if (accept("<"))
        op = BinaryOp::Lt;
      else if (accept("<="))
        op = BinaryOp::Le;
      else if (accept(">"))
        op = BinaryOp::Gt;
      else if (accept(">="))
        op = BinaryOp::Ge;
      else
        return lhs;
      lhs = Expr::binary_op(op, std::move(lhs), add_expr(), loc);
    }
  }

  Expr add_expr() {
    auto lhs = mul_expr();
    for (;;) {
      auto loc = peek().loc;
      if (accept("+"))
        lhs = Expr::binary_op(BinaryOp::Add, std::move(lhs), mul_expr(), loc);
      else if (accept("-"))
        lhs = Expr::binary_op(BinaryOp::Sub, std::move(lhs), mul_expr(), loc);
      else
        return lhs;
    }
  }

  Expr mul_expr() {
    auto lhs = unary();
    for (;;) {
      auto loc = peek().loc;
      if (accept("*"))
        lhs = Expr::binary_op(BinaryOp::Mul, std::move(lhs), unary(), loc);
      else if (accept("%"))
        lhs = Expr::binary_op(BinaryOp::Mod, std::move(lhs), unary(), loc);
      else
        return lhs;
    }
  }

  Expr unary() {
    if (++depth_ > kMaxDepth) throw ParseError(peek().loc, "expression nested too deeply");
    struct Guard {
      int& d;
      ~Guard() { --d; }
    } guard{depth_};
    auto loc = peek().loc;
    if (accept("-")) {
      // `-<digits>` is a negative literal; any other operand is a negation.
      if (peek().kind == Tok::Number) return Expr::integer(-next().number, loc);
      return Expr::unary_op(UnaryOp::Neg, unary(), loc);
    }
    if (accept("!") || accept_word("not")) return Expr::unary_op(UnaryOp::Not, unary(), loc);
    return primary();
  }

  Expr primary() {
    auto loc = peek().loc;
    if (peek().kind == Tok::Number) return Expr::integer(next().number, loc);
    if (accept("(")) {
      auto e = expr();
      expect(")");
      return e;
    }
    if (accept_word("true")) return Expr::boolean(true, loc);
    if (accept_word("false")) return Expr::boolean(false, loc);
    if (accept_word("MIN_ACTIVE_TIMER")) {
      auto e = Expr::min_active_timer();
      e.loc = loc;
      return e;
    }
    auto name = ident();
    if (accept("[")) {
      auto idx = expr();
      expect("]");
      return Expr::element(std::move(name), std::move(idx), loc);
    }
    return Expr::variable(std::move(name), loc);
  }

  static constexpr int kMaxDepth = 256;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  const Model* current_model_ = nullptr;  // constants visible to declarations
};

}  // namespace

TimedModel parse(const SourceFile& src) { return parse(std::string_view(src.text)); }

TimedModel parse(std::string_view text) { return Parser(text).model(); }

Expr parse_expr(std::string_view text) { return Parser(text).whole_expr(); }

Process parse_process(std::string_view text) { return Parser(text).single_process(); }

}  // namespace tdve
