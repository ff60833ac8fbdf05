#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tdve/model.hpp"

namespace tdve {

/// Slot assignment for a model's runtime state: globals first (arrays
/// flattened), then for each process its location index followed by its locals.
class StateLayout {
 public:
  struct Slot {
    std::int32_t offset = 0;
    std::int32_t length = 1;
    bool array = false;
    const VarDecl* decl = nullptr;
  };

  explicit StateLayout(const Model& model);

  std::size_t width() const { return width_; }
  std::int32_t location_slot(std::size_t process) const { return procs_[process].location; }

  /// Resolves a variable name as seen from `process` (locals shadow globals).
  std::optional<Slot> lookup(const std::string& name,
                             std::optional<std::size_t> process = std::nullopt) const;
  std::optional<Slot> global(const std::string& name) const { return lookup(name); }

  const Model& model() const { return *model_; }

 private:
  struct ProcSlots {
    std::int32_t location = 0;
    std::vector<std::pair<std::string, Slot>> locals;
  };
  const Model* model_;
  std::vector<std::pair<std::string, Slot>> globals_;
  std::vector<ProcSlots> procs_;
  std::size_t width_ = 0;
};

/// Full valuation of a model. Values are stored as 32-bit words in layout order.
struct State {
  std::vector<std::int32_t> values;
  friend auto operator<=>(const State&, const State&) = default;
};

State initial_state(const Model& model);

/// Canonical byte encoding: each word biased by 2^31 and written big-endian,
/// so byte-lexicographic order equals word-lexicographic order.
std::vector<std::uint8_t> encode(std::span<const std::int32_t> words);
State decode(std::span<const std::uint8_t> bytes);

/// Human-readable canonical text, e.g. `x=0 a=[1,2] | P@ncs t=3 | Q@b`.
std::string state_text(const Model& model, std::span<const std::int32_t> words);

using Value = std::variant<std::int64_t, bool>;

/// Reference tree-walking evaluator. `process` selects the local scope.
Value eval(const Expr& expr, const Model& model, const State& state,
           std::optional<std::size_t> process = std::nullopt);
bool eval_bool(const Expr& expr, const Model& model, const State& state,
               std::optional<std::size_t> process = std::nullopt);

/// Mathematical modulo: nonnegative result for a nonzero modulus.
inline std::int64_t floor_mod(std::int64_t a, std::int64_t m) {
  std::int64_t r = a % m;
  if (r < 0) r += (m < 0 ? -m : m);
  return r;
}

/// Smallest timer value different from `infinity`, or `infinity` when none.
std::int64_t min_active_timer(std::span<const std::int32_t> timers, std::int64_t infinity);

}  // namespace tdve
