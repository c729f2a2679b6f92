#include "sep/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "sep/numeric.hpp"
#include "sep/rng.hpp"

namespace sep {

namespace {

struct Problem {
  DiscreteMeasure lambda;
  DiscreteMeasure mu;
  DiscreteMeasure nu;        // lambda ^ mu, stopped at time 0
  DiscreteMeasure residual;  // mu - nu, to be embedded by the barrier
  std::vector<double> levels;  // support(residual)
  double bottom = 0.0, top = 0.0;
  double lowest_start = 0.0;  // lowest residual start of lambda
};

Problem make_problem(const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
  Problem pb;
  pb.lambda = lambda;
  pb.mu = mu;
  pb.nu = meet(lambda, mu);
  pb.residual = subtract(mu, pb.nu);
  pb.levels = pb.residual.support();
  if (!pb.levels.empty()) {
    pb.bottom = pb.levels.front();
    pb.top = pb.levels.back();
  }
  pb.lowest_start = kInf;
  for (const auto& a : lambda.atoms()) {
    if (a.p - pb.nu.mass_at(a.x) > 1e-15) {
      pb.lowest_start = a.x;
      break;
    }
  }
  return pb;
}

// Interior extent parameter t in [0, 2]: t in (0, 1] is a v-line with depth
// sliding from the level down to the bottom target; t in (1, 2] crosses into
// an h-line with right end sliding from the level to the top target. The
// mass stopped at the level is continuous and non-decreasing in t, and the
// extreme targets carry full crossing lines, so every candidate terminates.
// Bracket endpoints are pinned to the exact target coordinates so they do
// not drift off the critical grid.
VhBarrier barrier_from_caps(const Problem& pb, const std::vector<double>& caps) {
  if (pb.levels.empty()) return VhBarrier{};
  std::vector<VLine> v;
  std::vector<HLine> h;
  v.push_back({pb.top, pb.bottom});
  h.push_back({pb.bottom, pb.top});
  for (std::size_t i = 0; i + 2 < pb.levels.size(); ++i) {
    const double y = pb.levels[i + 1];
    const double t = caps[i];
    if (t <= 0.0) continue;
    if (t <= 1.0) {
      v.push_back({y, t >= 1.0 ? pb.bottom : y - t * (y - pb.bottom)});
    } else {
      h.push_back({y, t >= 2.0 ? pb.top : y + (t - 1.0) * (pb.top - y)});
      // The tail stops every rising path; the explicit v-line records that
      // where rising arrivals exist.
      if (pb.lowest_start < y) v.push_back({y, pb.bottom});
    }
  }
  return VhBarrier(std::move(v), std::move(h));
}

class Solver {
 public:
  Solver(Problem pb, const CalibrationOptions& opt) : pb_(std::move(pb)), opt_(opt) {}

  CalibrationResult solve() {
    const std::size_t interior = pb_.levels.size() >= 2 ? pb_.levels.size() - 2 : 0;
    caps_.assign(interior, 0.0);
    targets_.resize(interior);
    for (std::size_t i = 0; i < interior; ++i)
      targets_[i] = pb_.mu.mass_at(pb_.levels[i + 1]);
    std::vector<bool> pinned(interior, false);
    for (const auto& [idx, t] : opt_.pinned_caps) {
      if (idx >= interior) throw std::invalid_argument("calibrate: bad pinned cap index");
      caps_[idx] = t;
      pinned[idx] = true;
    }

    if (pb_.residual.empty()) return finish();

    const double per_level_tol =
        opt_.tol / (2.0 * static_cast<double>(pb_.levels.size()));
    auto order = sweep_order(interior);
    order.erase(std::remove_if(order.begin(), order.end(),
                               [&pinned](std::size_t i) { return pinned[i]; }),
                order.end());

    double best_tv = kInf;
    CalibrationResult best;
    int stalled = 0;
    for (int sweep = 0; sweep < opt_.max_sweeps; ++sweep) {
      for (std::size_t i : order) bisect_level(i, per_level_tol);
      CalibrationResult current = finish();
      if (current.residual_tv <= opt_.tol) return current;
      if (current.residual_tv < best_tv - 1e-16) {
        best_tv = current.residual_tv;
        best = std::move(current);
        stalled = 0;
      } else if (++stalled >= 3) {
        throw NoProgressError(
            "NoProgress: residual stalled at " + std::to_string(best_tv), best);
      }
    }
    throw NoProgressError("NoProgress: sweep cap reached", best);
  }

 private:
  std::vector<std::size_t> sweep_order(std::size_t interior) const {
    if (!opt_.sweep_order.empty()) {
      if (opt_.sweep_order.size() != interior)
        throw std::invalid_argument("calibrate_perkins: bad sweep_order size");
      return opt_.sweep_order;
    }
    // Outside-in: levels nearest the extreme targets first.
    std::vector<std::size_t> order(interior);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [this](std::size_t a, std::size_t b) {
      auto dist = [this](std::size_t i) {
        const double y = pb_.levels[i + 1];
        return std::min(y - pb_.bottom, pb_.top - y);
      };
      return dist(a) < dist(b);
    });
    return order;
  }

  // Endpoint mass at the i-th interior level (including the time-0 atom
  // there) when its extent parameter is t and the others are held fixed.
  double mass_at(std::size_t i, double t) {
    const double saved = caps_[i];
    caps_[i] = t;
    PerkinsRule rule{barrier_from_caps(pb_, caps_), pb_.nu};
    const StoppedLaw law = exact_stopped_law(rule, pb_.lambda);
    ++evals_;
    caps_[i] = saved;
    return law.endpoint_law().mass_at(pb_.levels[i + 1]);
  }

  void bisect_level(std::size_t i, double per_level_tol) {
    const double target = targets_[i];
    const double current = mass_at(i, caps_[i]);
    if (std::abs(current - target) <= 0.05 * per_level_tol) return;

    if (mass_at(i, 2.0) <= target - per_level_tol) {
      caps_[i] = 2.0;  // saturated; other levels must release mass first
      return;
    }
    double lo = 0.0, hi = 2.0;
    bool first = true;
    while (hi - lo > opt_.bracket_floor) {
      double mid = 0.5 * (lo + hi);
      if (first && opt_.first_probe > lo && opt_.first_probe < hi)
        mid = opt_.first_probe;
      first = false;
      if (mass_at(i, mid) < target) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    // Prefer the smaller extent when both bracket ends match the target; this
    // lands on the left edge of any plateau and keeps barriers canonical.
    caps_[i] = std::abs(mass_at(i, lo) - target) <= per_level_tol ? lo : hi;
  }

  CalibrationResult finish() {
    CalibrationResult out;
    out.lambda = pb_.lambda;
    out.mu = pb_.mu;
    out.rule = PerkinsRule{barrier_from_caps(pb_, caps_), pb_.nu};
    out.certificate = exact_stopped_law(out.rule, pb_.lambda);
    ++evals_;
    out.residual_tv = tv_distance(out.certificate.endpoint_law(), pb_.mu);
    out.iterations = evals_;
    return out;
  }

  Problem pb_;
  CalibrationOptions opt_;
  std::vector<double> caps_;
  std::vector<double> targets_;
  int evals_ = 0;
};

void check_instance(const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
  if (!lambda.is_probability() || !mu.is_probability())
    throw std::invalid_argument("calibrate_perkins: probability measures required");
  if (!convex_order(lambda, mu))
    throw ConvexOrderViolatedError(
        "ConvexOrderViolated: lambda is not prior to mu in convex order");
}

}  // namespace

CalibrationResult calibrate_perkins(const DiscreteMeasure& lambda,
                                    const DiscreteMeasure& mu, double tol) {
  CalibrationOptions opt;
  opt.tol = tol;
  return calibrate_perkins(lambda, mu, opt);
}

CalibrationResult calibrate_perkins(const DiscreteMeasure& lambda,
                                    const DiscreteMeasure& mu,
                                    const CalibrationOptions& options) {
  if (options.tol <= 0.0) throw std::invalid_argument("calibrate_perkins: tol > 0");
  check_instance(lambda, mu);
  Solver solver(make_problem(lambda, mu), options);
  return solver.solve();
}

std::pair<double, double> feasible_band(const DiscreteMeasure& lambda,
                                        const DiscreteMeasure& mu_prototype,
                                        double level) {
  const double atom_available = lambda.mass_at(level);
  if (mu_prototype.empty()) return {atom_available, atom_available};
  const double bottom = mu_prototype.min_support();
  const double top = mu_prototype.max_support();
  if (!(bottom < level && level < top)) return {atom_available, atom_available};

  // Atom rule takes everything available at the level; elsewhere the shared
  // mass stops at time 0 as usual.
  std::vector<MassAtom> nu_atoms;
  const DiscreteMeasure shared = meet(lambda, mu_prototype);
  for (const auto& a : shared.atoms()) {
    if (a.x != level) nu_atoms.push_back(a);
  }
  if (atom_available > 0.0) nu_atoms.push_back({level, atom_available});
  const DiscreteMeasure nu{std::move(nu_atoms)};

  auto line_mass = [&](bool with_h) {
    std::vector<VLine> v{{top, bottom}, {level, bottom}};
    std::vector<HLine> h{{bottom, top}};
    if (with_h) h.push_back({level, top});
    PerkinsRule rule{VhBarrier(std::move(v), std::move(h)), nu};
    return exact_stopped_law(rule, lambda).endpoint_law().mass_at(level) -
           nu.mass_at(level);
  };
  return {atom_available + line_mass(false), atom_available + line_mass(true)};
}

StoppingRule perturb_solution(const CalibrationResult& result, std::uint64_t seed,
                              PerturbMode mode) {
  std::uint64_t s = seed;
  const Problem pb = make_problem(result.lambda, result.mu);
  const std::size_t interior = pb.levels.size() >= 2 ? pb.levels.size() - 2 : 0;
  CalibrationOptions opt;
  opt.tol = std::max(result.residual_tv, 1e-10);

  if (mode == PerturbMode::Resolve) {
    if (interior > 1) {
      std::vector<std::size_t> order(interior);
      std::iota(order.begin(), order.end(), std::size_t{0});
      for (std::size_t i = order.size(); i > 1; --i) {
        const std::size_t j = splitmix64(s) % i;
        std::swap(order[i - 1], order[j]);
      }
      opt.sweep_order = std::move(order);
    }
    opt.first_probe = 0.25 + 1.5 * (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53);
    return calibrate_perkins(result.lambda, result.mu, opt).rule;
  }

  // BreakDominance: pin one interior extent deeper than calibrated and let the
  // sweep try to re-embed mu around it. Loynes uniqueness of vh-barrier
  // solutions predicts failure; NoProgressError reports the absence.
  if (interior == 0)
    throw NoProgressError("BreakDominance: no interior level to deepen", result);
  std::vector<std::size_t> deepenable;
  for (std::size_t i = 0; i < interior; ++i) {
    const double y = pb.levels[i + 1];
    const VLine* v = result.rule.barrier.v_line_at(y);
    const HLine* h = result.rule.barrier.h_line_at(y);
    if (v != nullptr && h == nullptr && v->depth > pb.bottom + 1e-9) deepenable.push_back(i);
  }
  if (deepenable.empty())
    throw NoProgressError("BreakDominance: no over-deepenable v-line", result);
  const std::size_t pick = deepenable[splitmix64(s) % deepenable.size()];
  const double y = pb.levels[pick + 1];
  const double depth = result.rule.barrier.v_line_at(y)->depth;
  // Current extent t for depth d is (y - d)/(y - bottom); push halfway to 1.
  const double t_now = (y - depth) / (y - pb.bottom);
  opt.pinned_caps.push_back({pick, t_now + 0.5 * (1.0 - t_now)});
  return calibrate_perkins(result.lambda, result.mu, opt).rule;
}

}  // namespace sep
