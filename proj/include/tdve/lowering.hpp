#pragma once

// Compiles time-annotated models into untimed models plus a native clock
// process. Two encodings are provided:
//
//  * ledm: a count-down pair (ubtimer[i], lbtimer[i]) per process; the clock
//    advances one unit per tick and is blocked while some ubtimer is zero.
//  * eedm: a single count-down timer[i] per process; the clock leaps by the
//    smallest active timer, or advances one unit at a time while some
//    signal[i] is raised by an `observe` transition.
//
// Bounds are installed by the transitions entering the source location of a
// bounded transition (and at start-up for the initial location).

#include <cstdint>
#include <optional>
#include <stdexcept>

#include "tdve/model.hpp"

namespace tdve {

class LoweringError : public std::runtime_error {
 public:
  LoweringError(SourceLoc loc, const std::string& msg) : std::runtime_error(msg), loc_(loc) {}
  SourceLoc loc() const { return loc_; }

 private:
  SourceLoc loc_;
};

struct LoweringConfig {
  TickMode method = TickMode::Ledm;
  // Unset: keep `now` only when some transition is observed.
  std::optional<bool> include_now;
  std::int64_t infinity = 1'000'000;
  std::int64_t maximal = std::int64_t{1} << 30;
};

Model lower_ledm(const TimedModel& tm, const LoweringConfig& cfg = {});
Model lower_eedm(const TimedModel& tm, const LoweringConfig& cfg = {.method = TickMode::Eedm});
/// Dispatches on cfg.method.
Model lower(const TimedModel& tm, const LoweringConfig& cfg);

/// Wraps an untimed model as a timed model with no annotations.
TimedModel untimed(Model m);

}  // namespace tdve
