#include "sep/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "sep/numeric.hpp"
#include "sep/rng.hpp"
#include "sep/rules.hpp"

namespace sep {

double AuxiliaryFunction::operator()(double x) const {
  switch (tag) {
    case Tag::Tanh:
      return std::tanh(x);
    case Tag::Atan:
      return 0.63661977236758134308 * std::atan(x);  // 2/pi
    case Tag::PiecewiseLinearBounded: {
      if (breakpoints.empty()) return 0.0;
      if (x <= breakpoints.front().first) return breakpoints.front().second;
      if (x >= breakpoints.back().first) return breakpoints.back().second;
      auto hi = std::upper_bound(
          breakpoints.begin(), breakpoints.end(), x,
          [](double v, const auto& p) { return v < p.first; });
      auto lo = std::prev(hi);
      const double w = (x - lo->first) / (hi->first - lo->first);
      return lo->second + w * (hi->second - lo->second);
    }
  }
  return 0.0;
}

std::string AuxiliaryFunction::name() const {
  switch (tag) {
    case Tag::Tanh:
      return "tanh";
    case Tag::Atan:
      return "atan";
    case Tag::PiecewiseLinearBounded:
      return "piecewise_linear";
  }
  return "";
}

std::vector<AuxiliaryFunction> standard_battery(std::span<const double> grid_levels) {
  std::vector<AuxiliaryFunction> battery;
  battery.push_back({AuxiliaryFunction::Tag::Tanh, {}});
  battery.push_back({AuxiliaryFunction::Tag::Atan, {}});
  AuxiliaryFunction pl{AuxiliaryFunction::Tag::PiecewiseLinearBounded, {}};
  const std::size_t n = grid_levels.size();
  for (std::size_t i = 0; i < n; ++i) {
    pl.breakpoints.push_back(
        {grid_levels[i], static_cast<double>(i + 1) / static_cast<double>(n + 1)});
  }
  if (pl.breakpoints.empty()) pl.breakpoints = {{0.0, 0.5}};
  battery.push_back(std::move(pl));
  return battery;
}

ObjectiveVector objective_vector(const StoppedLaw& law, const AuxiliaryFunction& phi) {
  KahanSum g1, g2, g3, g4;
  for (const auto& a : law.joint) {
    const double e2 = a.endpoint * a.endpoint;
    g1.add(a.mass * phi(a.max));
    g2.add(-a.mass * phi(a.min));
    g3.add(-a.mass * phi(a.max) * e2);
    g4.add(-a.mass * phi(-a.min) * e2);
  }
  return {g1.value(), g2.value(), g3.value(), g4.value()};
}

int lex_compare(const ObjectiveVector& a, const ObjectiveVector& b, double tol) {
  const double av[4] = {a.g1, a.g2, a.g3, a.g4};
  const double bv[4] = {b.g1, b.g2, b.g3, b.g4};
  for (int i = 0; i < 4; ++i) {
    if (av[i] < bv[i] - tol) return -1;
    if (av[i] > bv[i] + tol) return 1;
  }
  return 0;
}

StepFunction cdf_of(const DiscreteMeasure& m) {
  std::vector<std::pair<double, double>> pts;
  double cum = 0.0;
  for (const auto& a : m.atoms()) {
    cum += a.p;
    pts.push_back({a.x, cum});
  }
  return StepFunction(std::move(pts), 0.0);
}

StepFunction extrema_cdf(const StoppedLaw& law, Extremum which) {
  return cdf_of(which == Extremum::Max ? law.max_law() : law.min_law());
}

DominanceVerdict dominance(const StepFunction& a, const StepFunction& b, double tol) {
  std::set<double> levels;
  for (const auto& [x, _] : a.breakpoints()) levels.insert(x);
  for (const auto& [x, _] : b.breakpoints()) levels.insert(x);
  bool first_larger = false, second_larger = false;
  for (double x : levels) {
    const double d = a(x) - b(x);
    if (d > tol) {
      if (second_larger) return {DominanceVerdict::Kind::Crossing, x};
      first_larger = true;
    } else if (d < -tol) {
      if (first_larger) return {DominanceVerdict::Kind::Crossing, x};
      second_larger = true;
    }
  }
  if (first_larger) return {DominanceVerdict::Kind::FirstSmaller, 0.0};
  if (second_larger) return {DominanceVerdict::Kind::SecondSmaller, 0.0};
  return {DominanceVerdict::Kind::Equal, 0.0};
}

double verify_embedding(const StoppedLaw& law, const DiscreteMeasure& mu) {
  return tv_distance(law.endpoint_law(), mu);
}

double joint_tv(const StoppedLaw& a, const StoppedLaw& b) {
  std::map<std::array<double, 3>, double> diff;
  for (const auto& r : a.joint) diff[{r.endpoint, r.max, r.min}] += r.mass;
  for (const auto& r : b.joint) diff[{r.endpoint, r.max, r.min}] -= r.mass;
  KahanSum s;
  for (const auto& [_, d] : diff) s.add(std::abs(d));
  return 0.5 * s.value();
}

LoynesReport loynes_check(const VhBarrier& r, const VhBarrier& s,
                          const DiscreteMeasure& lambda, const DiscreteMeasure& nu,
                          std::int64_t n_paths, std::uint64_t seed) {
  LoynesReport report;
  const VhBarrier u = barrier_union(r, s);

  // Common refinement so the three joints live on one grid.
  std::vector<double> extra = r.coordinates();
  const auto cs = s.coordinates();
  extra.insert(extra.end(), cs.begin(), cs.end());

  const StoppedLaw law_r = exact_stopped_law(PerkinsRule{r, nu}, lambda, extra);
  const StoppedLaw law_s = exact_stopped_law(PerkinsRule{s, nu}, lambda, extra);
  const StoppedLaw law_u = exact_stopped_law(PerkinsRule{u, nu}, lambda, extra);

  report.endpoint_tv_r_s = tv_distance(law_r.endpoint_law(), law_s.endpoint_law());
  report.endpoint_tv_r_union = tv_distance(law_r.endpoint_law(), law_u.endpoint_law());
  report.endpoint_tv_s_union = tv_distance(law_s.endpoint_law(), law_u.endpoint_law());
  report.joint_tv_r_s = joint_tv(law_r, law_s);
  report.same_target = report.endpoint_tv_r_s <= 1e-9;

  // Pathwise tau_{RuS} = tau_R ^ tau_S on shared driving randomness.
  std::vector<double> primary = lambda.support();
  const auto ns = nu.support();
  primary.insert(primary.end(), ns.begin(), ns.end());
  std::vector<double> secondary;
  for (const VhBarrier* b : {&r, &s}) {
    for (const auto& v : b->v_lines()) {
      primary.push_back(v.level);
      secondary.push_back(v.depth);
    }
    for (const auto& h : b->h_lines()) {
      primary.push_back(h.level);
      secondary.push_back(h.right_end);
    }
  }
  CriticalGrid grid{std::move(primary), std::move(secondary)};

  const PerkinsRule rule_r{r, nu}, rule_s{s, nu}, rule_u{u, nu};
  const double lambda_total = lambda.total();
  std::vector<double> cumulative;
  double cum = 0.0;
  for (const auto& a : lambda.atoms()) {
    cum += a.p;
    cumulative.push_back(cum);
  }

  report.paths = n_paths;
  const std::size_t kNoFire = static_cast<std::size_t>(-1);
  for (std::int64_t p = 0; p < n_paths; ++p) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
    const double udraw = rng.uniform() * lambda_total;
    std::size_t k = 0;
    while (k + 1 < cumulative.size() && udraw >= cumulative[k]) ++k;
    const MassAtom start = lambda.atoms()[k];
    // Atom rule is shared, so a time-0 stop is common to all three rules.
    const double p0 = nu.mass_at(start.x) / start.p;
    if (p0 > 0.0 && rng.uniform() < p0) continue;

    const auto steps = simulate_event_path(grid, *grid.index_of(start.x), rng);
    std::size_t fire_r = kNoFire, fire_s = kNoFire, fire_u = kNoFire;
    for (std::size_t e = 0; e < steps.size(); ++e) {
      const auto& st = steps[e];
      const double max = grid.level(st.max_idx);
      const double min = grid.level(st.min_idx);
      const ExtremaState state{st.event == Event::NewMax ? max : min, max, min,
                               st.event};
      if (fire_r == kNoFire && should_stop(StoppingRule{rule_r}, state)) fire_r = e;
      if (fire_s == kNoFire && should_stop(StoppingRule{rule_s}, state)) fire_s = e;
      if (fire_u == kNoFire && should_stop(StoppingRule{rule_u}, state)) fire_u = e;
      if (fire_r != kNoFire && fire_s != kNoFire && fire_u != kNoFire) break;
    }
    if (std::min(fire_r, fire_s) != fire_u) ++report.violations;
  }
  return report;
}

std::vector<JointAtom> monotonicity_audit(const StoppedLaw& law) {
  std::vector<JointAtom> violators;
  for (const auto& a : law.joint) {
    if (a.mass <= 0.0) continue;
    if (a.max == a.min) continue;  // stopped at time 0
    if (std::abs(a.endpoint - a.max) > 1e-12 && std::abs(a.endpoint - a.min) > 1e-12)
      violators.push_back(a);
  }
  return violators;
}

std::vector<std::string> barrier_monotonicity_violations(const VhBarrier& b,
                                                         double tol) {
  std::vector<std::string> out;
  const auto& v = b.v_lines();
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].depth > v[i - 1].depth + tol) {
      std::ostringstream os;
      os << "v-line depth increases from level " << v[i - 1].level << " (depth "
         << v[i - 1].depth << ") to level " << v[i].level << " (depth " << v[i].depth
         << ")";
      out.push_back(os.str());
    }
  }
  const auto& h = b.h_lines();
  for (std::size_t i = 1; i < h.size(); ++i) {
    if (h[i].right_end > h[i - 1].right_end + tol) {
      std::ostringstream os;
      os << "h-line right end increases from level " << h[i - 1].level << " ("
         << h[i - 1].right_end << ") to level " << h[i].level << " (" << h[i].right_end
         << ")";
      out.push_back(os.str());
    }
  }
  return out;
}

}  // namespace sep
