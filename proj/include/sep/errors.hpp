#pragma once

#include <stdexcept>
#include <string>

namespace sep {

// Positive mass reached a state from which the barrier can never be hit with
// finite expected time (corridor unbounded on one or both sides).
struct NonTerminatingError : std::runtime_error {
  NonTerminatingError(const std::string& what, double pos, double max, double min)
      : std::runtime_error(what), pos(pos), max(max), min(min) {}
  double pos, max, min;
};

struct MassLeakError : std::runtime_error {
  MassLeakError(const std::string& what, double total)
      : std::runtime_error(what), total(total) {}
  double total;
};

struct PathBudgetExceededError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvexOrderViolatedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sep
