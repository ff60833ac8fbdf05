#pragma once

// Parser and printers for the .tdve modelling language: a DVE-like subset with
// an optional `time [lb, ub] [observe];` clause on transitions.
// The grammar is documented in docs/language.md.

#include <stdexcept>
#include <string>
#include <string_view>

#include "tdve/model.hpp"

namespace tdve {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourceLoc loc, const std::string& msg)
      : std::runtime_error(msg), loc_(loc) {}
  SourceLoc loc() const { return loc_; }
  /// `path:line:col: message`
  std::string format(const std::string& path) const;

 private:
  SourceLoc loc_;
};

struct SourceFile {
  std::string text;
  std::string path;
};

SourceFile read_source(const std::string& path);

/// Throws ParseError on malformed input. Semantic checks are left to validate().
TimedModel parse(const SourceFile& src);
TimedModel parse(std::string_view text);

/// Parses a standalone expression, e.g. a property argument on the command line.
Expr parse_expr(std::string_view text);

/// Parses a single `process` block (used for never-claim files).
Process parse_process(std::string_view text);

std::string pretty(const Expr& e);
std::string pretty(const TimedModel& model);
std::string pretty(const Process& p);

/// Renders a lowered model, including its clock process. The clock's native
/// guard and effect appear as comments next to an expanded transition; the
/// output is meant for reading and does not parse back into the same model.
std::string pretty_lowered(const Model& model);

}  // namespace tdve
