#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sep/engine.hpp"
#include "sep/measure.hpp"
#include "sep/step_function.hpp"

namespace sep {

// Bounded strictly increasing test function phi.
struct AuxiliaryFunction {
  enum class Tag { Tanh, Atan, PiecewiseLinearBounded };
  Tag tag = Tag::Tanh;
  std::vector<std::pair<double, double>> breakpoints;  // PiecewiseLinearBounded only

  double operator()(double x) const;
  std::string name() const;
};

// tanh, scaled atan, and one bounded piecewise-linear map with breakpoints on
// the instance grid.
std::vector<AuxiliaryFunction> standard_battery(std::span<const double> grid_levels);

// g1 = E[phi(max)], g2 = -E[phi(min)], g3 = -E[phi(max) B^2],
// g4 = -E[phi(-min) B^2]; the multifold objectives, minimized lexicographically.
struct ObjectiveVector {
  double g1, g2, g3, g4;
};
ObjectiveVector objective_vector(const StoppedLaw& law, const AuxiliaryFunction& phi);
int lex_compare(const ObjectiveVector& a, const ObjectiveVector& b, double tol = 1e-9);

struct DominanceVerdict {
  enum class Kind { Equal, FirstSmaller, SecondSmaller, Crossing };
  Kind kind = Kind::Equal;
  double at = 0.0;  // first crossing level when kind == Crossing
};

enum class Extremum { Max, Min };

StepFunction cdf_of(const DiscreteMeasure& m);
StepFunction extrema_cdf(const StoppedLaw& law, Extremum which);

// First-order stochastic dominance via pointwise CDF comparison: FirstSmaller
// means a >= b everywhere with a strict gap somewhere, i.e. a's law is
// stochastically smaller.
DominanceVerdict dominance(const StepFunction& a, const StepFunction& b,
                           double tol = 1e-9);

// Total variation between the endpoint marginal and mu.
double verify_embedding(const StoppedLaw& law, const DiscreteMeasure& mu);

// ½ sum of |mass differences| over joint records; laws must come from runs on
// a common critical grid for the records to align.
double joint_tv(const StoppedLaw& a, const StoppedLaw& b);

struct LoynesReport {
  double endpoint_tv_r_s = 0.0;
  double endpoint_tv_r_union = 0.0;
  double endpoint_tv_s_union = 0.0;
  double joint_tv_r_s = 0.0;
  bool same_target = false;  // R and S embed the same endpoint law
  std::int64_t paths = 0;
  std::int64_t violations = 0;  // events where tau_{RuS} != min(tau_R, tau_S)
};

// Exact laws for R, S and R u S under shared atom rule nu, plus a pathwise
// Monte Carlo check of tau_{RuS} = tau_R ^ tau_S on shared driving
// randomness.
LoynesReport loynes_check(const VhBarrier& r, const VhBarrier& s,
                          const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                          std::int64_t n_paths = 10000, std::uint64_t seed = 42);

// Joint records contributed at positive time must sit at a running extremum;
// returns the violators (expected empty). Time-0 records (max == min) exempt.
std::vector<JointAtom> monotonicity_audit(const StoppedLaw& law);

// Deterministic-start structure: with levels increasing, v-depths and h-right
// ends must be non-increasing (decreasing boundary functions).
std::vector<std::string> barrier_monotonicity_violations(const VhBarrier& b,
                                                         double tol = 1e-9);

}  // namespace sep
