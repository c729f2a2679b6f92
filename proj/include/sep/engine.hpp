#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "sep/barrier.hpp"
#include "sep/errors.hpp"
#include "sep/measure.hpp"
#include "sep/rng.hpp"
#include "sep/rules.hpp"

namespace sep {

struct JointAtom {
  double endpoint;
  double max;
  double min;
  double mass;
  bool operator==(const JointAtom&) const = default;
};

// Exact joint law of (B_tau, max, min) with E[tau]; extrema are recorded at
// critical-grid resolution, where their survival functions are exact.
struct StoppedLaw {
  std::vector<JointAtom> joint;  // sorted by (endpoint, max, min), merged
  double expected_duration = 0.0;
  DiscreteMeasure atom_mass_at_zero;

  double total_mass() const;
  DiscreteMeasure endpoint_law() const;
  DiscreteMeasure max_law() const;
  DiscreteMeasure min_law() const;
  void canonicalize();

  bool operator==(const StoppedLaw&) const = default;
};

void to_json(nlohmann::json& j, const StoppedLaw& law);
void from_json(const nlohmann::json& j, StoppedLaw& law);
void write_csv(std::ostream& os, const StoppedLaw& law);

struct ExitSplit {
  double p_down;
  double p_up;
  double e_time;
};

// Gambler's-ruin kernel: Brownian first exit of (a, b) from x.
ExitSplit exit_split(double x, double a, double b);

// Strictly increasing levels: supports, barrier coordinates and refinements,
// deduplicated within 1e-12. All first passages of these levels are the
// engine's events, which is what makes the finite DP exact. When a secondary
// coordinate (a searched depth or right end) falls within tolerance of a
// primary level (a support point, line level or query refinement), the
// primary value is kept so law supports stay verbatim.
class CriticalGrid {
 public:
  CriticalGrid() = default;
  explicit CriticalGrid(std::vector<double> levels);
  CriticalGrid(std::vector<double> primary, std::vector<double> secondary);

  std::size_t size() const { return levels_.size(); }
  double level(std::size_t i) const { return levels_[i]; }
  const std::vector<double>& levels() const { return levels_; }
  std::optional<std::size_t> index_of(double x) const;  // within 1e-12

 private:
  std::vector<double> levels_;
};

// The critical grid a Perkins-rule run uses: lambda's support, the barrier's
// line levels and query refinements as primaries, line extents as
// secondaries.
CriticalGrid make_vh_grid(const DiscreteMeasure& lambda, const VhBarrier& b,
                          std::span<const double> extra_levels = {});

// Hit tests are strict on the recorded opposite extremum
// (HitConvention::Open): after time 0 the true running min/max lies strictly
// beyond the recorded grid value almost surely, so this reproduces the
// continuous law of the closed barrier (its fine closure) exactly.
// HitConvention::Closed instead treats recorded extrema as inside closed
// segments; the two conventions agree unless live mass touches a line
// parameter before a later hit test there.
StoppedLaw exact_stopped_law(const PerkinsRule& rule, const DiscreteMeasure& lambda,
                             std::span<const double> extra_levels = {},
                             HitConvention recorded_convention = HitConvention::Open);

StoppedLaw exact_stopped_law(const AzemaYorRule& rule, const DiscreteMeasure& lambda,
                             std::span<const double> extra_levels = {});

// Same DP as the Perkins engine with hit tests routed through the psi maps
// into the doubled-axis barrier; agrees with exact_stopped_law bit for bit
// when db = to_dbarrier(rule.barrier).
StoppedLaw dbarrier_stopped_law(const DBarrier& db, const DiscreteMeasure& lambda,
                                const DiscreteMeasure& atom_stop,
                                std::span<const double> extra_levels = {});

struct McOptions {
  double dt = 1e-4;                      // Euler step for Root/Rost
  std::uint64_t step_cap = 10'000'000;   // per-path budget (Euler rules)
  int threads = 1;
  std::vector<double> extra_levels;
};

// Seeded Monte Carlo sampler. Walk rules (Perkins, Azema-Yor,
// Hobson-Pedersen) use exact exit_split draws on the critical grid, so the
// sampled law carries no time-discretization bias and expected_duration is
// unbiased (per-step expected times). Root/Rost use Gaussian increments with
// step dt. Deterministic in seed with per-path substreams; results do not
// depend on the thread count.
StoppedLaw mc_stopped_law(const StoppingRule& rule, const DiscreteMeasure& lambda,
                          std::int64_t n_paths, std::uint64_t seed,
                          const McOptions& options = {});

// Event skeleton of one (max, min) trajectory: the sequence of new-extremum
// events until the grid edge, independent of any stopping rule. Shared
// across rules for pathwise coupling checks.
struct EventStep {
  Event event;
  std::size_t max_idx;
  std::size_t min_idx;
};
std::vector<EventStep> simulate_event_path(const CriticalGrid& grid,
                                           std::size_t start_idx, Rng& rng);

}  // namespace sep
