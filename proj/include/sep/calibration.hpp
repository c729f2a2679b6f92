#pragma once

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "sep/engine.hpp"
#include "sep/errors.hpp"
#include "sep/measure.hpp"
#include "sep/rules.hpp"

namespace sep {

struct CalibrationResult {
  PerkinsRule rule;
  double residual_tv = 0.0;
  int iterations = 0;  // exact-engine evaluations spent
  StoppedLaw certificate;
  DiscreteMeasure lambda;
  DiscreteMeasure mu;
};

struct NoProgressError : std::runtime_error {
  NoProgressError(const std::string& what, CalibrationResult best_so_far)
      : std::runtime_error(what), best(std::move(best_so_far)) {}
  CalibrationResult best;
};

struct CalibrationOptions {
  double tol = 1e-10;
  int max_sweeps = 10000;
  double bracket_floor = 1e-14;
  // Optional permutation of the interior target levels per sweep; empty means
  // the default outside-in order.
  std::vector<std::size_t> sweep_order;
  // First bisection probe in (0, 2); <= 0 means the midpoint of the bracket.
  double first_probe = -1.0;
  // (interior index, extent) pairs held fixed during the sweeps.
  std::vector<std::pair<std::size_t, double>> pinned_caps;
};

// Construct the Perkins rule for (lambda, mu): atom_stop = lambda ^ mu, then
// one monotone extent parameter per residual target level (v-line depth,
// crossing over into h-line right-end) solved by bisection with Gauss-Seidel
// sweeps until the exact-engine endpoint law matches mu within tol.
CalibrationResult calibrate_perkins(const DiscreteMeasure& lambda,
                                    const DiscreteMeasure& mu, double tol = 1e-10);
CalibrationResult calibrate_perkins(const DiscreteMeasure& lambda,
                                    const DiscreteMeasure& mu,
                                    const CalibrationOptions& options);

// Largest target-atom mass embeddable at `level` with a v-line only and with
// v+h lines, line parameters pushed to their extreme positions.
std::pair<double, double> feasible_band(const DiscreteMeasure& lambda,
                                        const DiscreteMeasure& mu_prototype,
                                        double level);

enum class PerturbMode {
  Resolve,         // re-calibrate along a different search trajectory
  BreakDominance,  // force one v-extent over-deep and try to re-solve
};

// A rule embedding the same mu within the original tolerance, constructed
// along a different search trajectory. BreakDominance throws NoProgressError
// when no mis-structured embedding exists (the expected outcome).
StoppingRule perturb_solution(const CalibrationResult& result, std::uint64_t seed,
                              PerturbMode mode = PerturbMode::Resolve);

}  // namespace sep
