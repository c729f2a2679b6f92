#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "sep/barrier.hpp"
#include "sep/extrema_state.hpp"
#include "sep/measure.hpp"
#include "sep/step_function.hpp"

namespace sep {

// Stop at the first new running extremum inside the vh-barrier; atom_stop is
// the sub-measure of lambda stopped at time 0 (lambda ^ mu when calibrated).
struct PerkinsRule {
  VhBarrier barrier;
  DiscreteMeasure atom_stop;
  bool operator==(const PerkinsRule&) const = default;
};

// Stop when the position falls to boundary(running max).
struct AzemaYorRule {
  StepFunction boundary;
  bool operator==(const AzemaYorRule&) const = default;
};

// tau_G ^ tau_g with externally randomized level G ~ G_law drawn once per
// path at time 0; g maps the running max to a stop level. Monte Carlo only.
struct HobsonPedersenRule {
  DiscreteMeasure G_law;
  StepFunction g;
  bool operator==(const HobsonPedersenRule&) const = default;
};

struct RootRule {
  TimeSpaceBarrier barrier;  // RootBarrier kind
  bool operator==(const RootRule&) const = default;
};

struct RostRule {
  TimeSpaceBarrier barrier;  // InverseBarrier kind
  DiscreteMeasure atom_stop;
  bool operator==(const RostRule&) const = default;
};

using StoppingRule =
    std::variant<PerkinsRule, AzemaYorRule, HobsonPedersenRule, RootRule, RostRule>;

std::string rule_name(const StoppingRule& rule);

// Uniform stop predicate. time_or_aux carries the elapsed time for Root/Rost
// and the sampled G level for Hobson-Pedersen; it is ignored otherwise.
// Perkins uses the engine's event semantics on recorded extrema: v-lines fire
// at NewMax with recorded min strictly above the depth, h-lines at NewMin
// with recorded max strictly below the right end, h-line tails at NewMax at
// their level.
bool should_stop(const StoppingRule& rule, const ExtremaState& state,
                 double time_or_aux = 0.0);

// Barycenter construction for the Azema-Yor baseline: psi_mu(x) is the mean
// of mu restricted to [x, inf); the returned boundary is its generalized
// inverse b(m) = sup{x : psi_mu(x) <= m}. Requires a centered probability mu.
StepFunction azema_yor_boundary(const DiscreteMeasure& mu);

// Every level coordinate the rule can touch; laws of different rules must be
// evaluated with each other's coordinates as refinements before their
// extrema marginals are comparable at grid resolution.
std::vector<double> rule_coordinates(const StoppingRule& rule);

void to_json(nlohmann::json& j, const StepFunction& f);
void from_json(const nlohmann::json& j, StepFunction& f);
void to_json(nlohmann::json& j, const StoppingRule& rule);
void from_json(const nlohmann::json& j, StoppingRule& rule);

}  // namespace sep
