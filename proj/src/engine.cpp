#include "sep/engine.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <ostream>
#include <sstream>
#include <iomanip>
#include <stdexcept>

#include "sep/numeric.hpp"

namespace sep {

double StoppedLaw::total_mass() const {
  KahanSum s;
  for (const auto& a : joint) s.add(a.mass);
  return s.value();
}

namespace {

DiscreteMeasure marginal(const std::vector<JointAtom>& joint, double JointAtom::*field) {
  std::vector<MassAtom> atoms;
  atoms.reserve(joint.size());
  for (const auto& a : joint) atoms.push_back({a.*field, a.mass});
  return DiscreteMeasure(std::move(atoms));
}

}  // namespace

DiscreteMeasure StoppedLaw::endpoint_law() const { return marginal(joint, &JointAtom::endpoint); }
DiscreteMeasure StoppedLaw::max_law() const { return marginal(joint, &JointAtom::max); }
DiscreteMeasure StoppedLaw::min_law() const { return marginal(joint, &JointAtom::min); }

void StoppedLaw::canonicalize() {
  std::sort(joint.begin(), joint.end(), [](const JointAtom& a, const JointAtom& b) {
    if (a.endpoint != b.endpoint) return a.endpoint < b.endpoint;
    if (a.max != b.max) return a.max < b.max;
    return a.min < b.min;
  });
  std::vector<JointAtom> merged;
  for (const auto& a : joint) {
    if (a.mass == 0.0) continue;
    if (!merged.empty() && merged.back().endpoint == a.endpoint &&
        merged.back().max == a.max && merged.back().min == a.min) {
      merged.back().mass += a.mass;
    } else {
      merged.push_back(a);
    }
  }
  joint = std::move(merged);
}

void to_json(nlohmann::json& j, const StoppedLaw& law) {
  nlohmann::json joint = nlohmann::json::array();
  for (const auto& a : law.joint) {
    joint.push_back({{"endpoint", a.endpoint}, {"max", a.max}, {"min", a.min}, {"mass", a.mass}});
  }
  j = nlohmann::json{{"joint", std::move(joint)},
                     {"expected_duration", law.expected_duration},
                     {"atom_mass_at_zero", law.atom_mass_at_zero}};
}

void from_json(const nlohmann::json& j, StoppedLaw& law) {
  law = StoppedLaw{};
  for (const auto& ja : j.at("joint")) {
    law.joint.push_back({ja.at("endpoint").get<double>(), ja.at("max").get<double>(),
                         ja.at("min").get<double>(), ja.at("mass").get<double>()});
  }
  law.expected_duration = j.at("expected_duration").get<double>();
  law.atom_mass_at_zero = j.at("atom_mass_at_zero").get<DiscreteMeasure>();
}

void write_csv(std::ostream& os, const StoppedLaw& law) {
  os << "endpoint,max,min,mass\n";
  char buf[160];
  for (const auto& a : law.joint) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", a.endpoint, a.max,
                  a.min, a.mass);
    os << buf;
  }
}

ExitSplit exit_split(double x, double a, double b) {
  if (!(a < x && x < b)) throw std::invalid_argument("exit_split: need a < x < b");
  const double w = b - a;
  return {(b - x) / w, (x - a) / w, (x - a) * (b - x)};
}

CriticalGrid::CriticalGrid(std::vector<double> levels) {
  for (double x : levels) {
    if (!std::isfinite(x)) throw std::invalid_argument("CriticalGrid: non-finite level");
  }
  std::sort(levels.begin(), levels.end());
  levels_ = dedup_sorted(std::move(levels), 1e-12);
}

CriticalGrid::CriticalGrid(std::vector<double> primary, std::vector<double> secondary)
    : CriticalGrid(std::move(primary)) {
  std::sort(secondary.begin(), secondary.end());
  std::vector<double> inserted;
  for (double s : secondary) {
    if (!std::isfinite(s)) throw std::invalid_argument("CriticalGrid: non-finite level");
    if (index_of(s)) continue;
    if (!inserted.empty() && s - inserted.back() <= 1e-12) continue;
    inserted.push_back(s);
  }
  levels_.insert(levels_.end(), inserted.begin(), inserted.end());
  std::sort(levels_.begin(), levels_.end());
}

std::optional<std::size_t> CriticalGrid::index_of(double x) const {
  // Up to two levels can fall inside the +-1e-12 window; pick the nearest.
  auto it = std::lower_bound(levels_.begin(), levels_.end(), x - 2e-12);
  std::optional<std::size_t> best;
  double best_dist = kInf;
  for (; it != levels_.end() && *it <= x + 2e-12; ++it) {
    const double d = std::abs(*it - x);
    if (d <= 1e-12 && d < best_dist) {
      best_dist = d;
      best = static_cast<std::size_t>(it - levels_.begin());
    }
  }
  return best;
}

namespace {

// Hit predicates on recorded extrema, resolved to grid indices once per run
// so that coordinates agreeing within the grid tolerance are the same
// critical level. Strict comparisons on the opposite extremum reproduce the
// continuous law of closed (and open) barriers: after time 0 the true
// running min/max lies strictly beyond the recorded grid value almost
// surely.
struct IndexRouter {
  static constexpr std::ptrdiff_t kNone = -2;
  static constexpr std::ptrdiff_t kAll = -1;  // whole left half: any min stops
  std::vector<std::ptrdiff_t> v_depth;   // per level: depth index, or kNone/kAll
  std::vector<std::ptrdiff_t> h_right;   // per level: right-end index, or kNone
  bool closed_on_recorded = false;

  bool stop_new_max(std::size_t max_idx, std::size_t min_idx) const {
    const std::ptrdiff_t d = v_depth[max_idx];
    if (d == kNone) return false;
    if (d == kAll) return true;
    const auto m = static_cast<std::ptrdiff_t>(min_idx);
    return closed_on_recorded ? m >= d : m > d;
  }
  bool stop_new_min(std::size_t min_idx, std::size_t max_idx) const {
    const std::ptrdiff_t r = h_right[min_idx];
    if (r == kNone) return false;
    const auto M = static_cast<std::ptrdiff_t>(max_idx);
    return closed_on_recorded ? M <= r : M < r;
  }
};

std::size_t grid_index(const CriticalGrid& grid, double x, const char* what) {
  const auto idx = grid.index_of(x);
  if (!idx) {
    std::ostringstream os;
    os << "engine: " << what << " off the grid (" << std::setprecision(17) << x << ")";
    throw std::logic_error(os.str());
  }
  return *idx;
}

IndexRouter make_router(const CriticalGrid& grid, const VhBarrier& b) {
  IndexRouter r;
  r.v_depth.assign(grid.size(), IndexRouter::kNone);
  r.h_right.assign(grid.size(), IndexRouter::kNone);
  for (const auto& v : b.v_lines()) {
    const std::size_t lvl = grid_index(grid, v.level, "v-line level");
    const auto d = static_cast<std::ptrdiff_t>(grid_index(grid, v.depth, "v-line depth"));
    if (r.v_depth[lvl] == IndexRouter::kNone || d < r.v_depth[lvl]) r.v_depth[lvl] = d;
  }
  for (const auto& h : b.h_lines()) {
    const std::size_t lvl = grid_index(grid, h.level, "h-line level");
    const auto x =
        static_cast<std::ptrdiff_t>(grid_index(grid, h.right_end, "h-line right end"));
    if (r.h_right[lvl] < x) r.h_right[lvl] = x;
    r.v_depth[lvl] = IndexRouter::kAll;  // downward tail: any new max here stops
  }
  return r;
}

IndexRouter make_router(const CriticalGrid& grid, const DBarrier& db) {
  IndexRouter r;
  r.v_depth.assign(grid.size(), IndexRouter::kNone);
  r.h_right.assign(grid.size(), IndexRouter::kNone);
  for (const auto& e : db.entries()) {
    const std::size_t lvl = grid_index(grid, e.level, "d-barrier level");
    const auto val =
        static_cast<std::ptrdiff_t>(grid_index(grid, e.rightmost.value, "d-barrier cap"));
    if (e.rightmost.side == DPoint::Side::Right) {
      // psi-bar image (Left(min), level) lies left of Right(cap) for any min,
      // psi-under image (Right(max), level) needs max < cap.
      if (r.h_right[lvl] < val) r.h_right[lvl] = val;
      r.v_depth[lvl] = IndexRouter::kAll;
    } else {
      // Left(min) <_D Left(depth) iff min > depth.
      if (r.v_depth[lvl] == IndexRouter::kNone || val < r.v_depth[lvl])
        r.v_depth[lvl] = val;
    }
  }
  return r;
}

struct StartMass {
  std::size_t idx;
  double mass;
};

[[noreturn]] void throw_non_terminating(const char* side, double pos, double max,
                                        double min) {
  std::ostringstream os;
  os << "NonTerminating: positive mass at state (pos " << pos << ", max " << max
     << ", min " << min << ") with no catchable barrier " << side
     << "; the stopping time cannot be integrable";
  throw NonTerminatingError(os.str(), pos, max, min);
}

std::vector<StartMass> residual_starts(const CriticalGrid& grid,
                                       const DiscreteMeasure& lambda,
                                       const DiscreteMeasure& atom_stop) {
  std::vector<StartMass> starts;
  for (const auto& a : lambda.atoms()) {
    const double stopped = atom_stop.mass_at(a.x);
    if (stopped > a.p + 1e-12)
      throw std::invalid_argument("engine: atom_stop exceeds lambda at x");
    const double rest = a.p - stopped;
    if (rest <= 0.0) continue;
    const auto idx = grid.index_of(a.x);
    if (!idx) throw std::logic_error("engine: start not on critical grid");
    starts.push_back({*idx, rest});
  }
  for (const auto& a : atom_stop.atoms()) {
    if (lambda.mass_at(a.x) + 1e-12 < a.p)
      throw std::invalid_argument("engine: atom_stop not dominated by lambda");
  }
  return starts;
}

// Exact dynamic program over new-extremum events. States are strata
// (max_idx, min_idx) entered at the max (after NewMax) or at the min (after
// NewMin); each stratum exit is one gambler's-ruin draw between the adjacent
// grid levels outside the stratum.
StoppedLaw run_extrema_dp(const CriticalGrid& grid, const DiscreteMeasure& lambda,
                          const DiscreteMeasure& atom_stop, const IndexRouter& router) {
  const std::size_t n = grid.size();
  StoppedLaw law;
  law.atom_mass_at_zero = atom_stop;

  std::map<std::array<std::size_t, 3>, double> records;  // (end, max, min) -> mass
  for (const auto& a : atom_stop.atoms()) {
    if (a.p <= 0.0) continue;
    const auto idx = grid.index_of(a.x);
    if (!idx) throw std::logic_error("engine: atom_stop not on critical grid");
    records[{*idx, *idx, *idx}] += a.p;
  }

  const auto starts = residual_starts(grid, lambda, atom_stop);
  KahanSum duration;

  // massAt[side][M][m]: unstopped mass sitting at the max (side 0) or min
  // (side 1) of stratum (M, m).
  std::vector<double> mass_at_max(n * n, 0.0), mass_at_min(n * n, 0.0);
  auto at = [n](std::vector<double>& v, std::size_t M, std::size_t m) -> double& {
    return v[M * n + m];
  };

  auto push_new_max = [&](std::size_t M, std::size_t m, double mass) {
    if (router.stop_new_max(M, m)) {
      records[{M, M, m}] += mass;
    } else {
      at(mass_at_max, M, m) += mass;
    }
  };
  auto push_new_min = [&](std::size_t M, std::size_t m, double mass) {
    if (router.stop_new_min(m, M)) {
      records[{m, M, m}] += mass;
    } else {
      at(mass_at_min, M, m) += mass;
    }
  };

  for (const auto& s : starts) {
    if (s.idx == 0 || s.idx + 1 == n) {
      const double x = grid.level(s.idx);
      throw_non_terminating(s.idx == 0 ? "below" : "above", x, x, x);
    }
    const ExitSplit es =
        exit_split(grid.level(s.idx), grid.level(s.idx - 1), grid.level(s.idx + 1));
    duration.add(s.mass * es.e_time);
    push_new_max(s.idx + 1, s.idx, s.mass * es.p_up);
    push_new_min(s.idx, s.idx - 1, s.mass * es.p_down);
  }

  // Strata only widen; process by width.
  for (std::size_t width = 1; width < n; ++width) {
    for (std::size_t m = 0; m + width < n; ++m) {
      const std::size_t M = m + width;
      for (int side = 0; side < 2; ++side) {
        double& cell = side == 0 ? at(mass_at_max, M, m) : at(mass_at_min, M, m);
        const double mass = cell;
        if (mass == 0.0) continue;
        cell = 0.0;
        const double pos = side == 0 ? grid.level(M) : grid.level(m);
        if (M + 1 == n)
          throw_non_terminating("above", pos, grid.level(M), grid.level(m));
        if (m == 0) throw_non_terminating("below", pos, grid.level(M), grid.level(m));
        const ExitSplit es = exit_split(pos, grid.level(m - 1), grid.level(M + 1));
        duration.add(mass * es.e_time);
        push_new_max(M + 1, m, mass * es.p_up);
        push_new_min(M, m - 1, mass * es.p_down);
      }
    }
  }

  for (const auto& [key, mass] : records) {
    law.joint.push_back(
        {grid.level(key[0]), grid.level(key[1]), grid.level(key[2]), mass});
  }
  law.expected_duration = duration.value();
  law.canonicalize();

  const double total = law.total_mass();
  if (std::abs(total - lambda.total()) > 1e-9)
    throw MassLeakError("MassLeak: stopped mass " + std::to_string(total) +
                            " does not match input mass",
                        total);
  return law;
}

}  // namespace

CriticalGrid make_vh_grid(const DiscreteMeasure& lambda, const VhBarrier& b,
                          std::span<const double> extra_levels) {
  std::vector<double> primary = lambda.support();
  std::vector<double> secondary(extra_levels.begin(), extra_levels.end());
  for (const auto& v : b.v_lines()) {
    primary.push_back(v.level);
    secondary.push_back(v.depth);
  }
  for (const auto& h : b.h_lines()) {
    primary.push_back(h.level);
    secondary.push_back(h.right_end);
  }
  return CriticalGrid(std::move(primary), std::move(secondary));
}

StoppedLaw exact_stopped_law(const PerkinsRule& rule, const DiscreteMeasure& lambda,
                             std::span<const double> extra_levels,
                             HitConvention recorded_convention) {
  const CriticalGrid grid = make_vh_grid(lambda, rule.barrier, extra_levels);
  IndexRouter router = make_router(grid, rule.barrier);
  router.closed_on_recorded = recorded_convention == HitConvention::Closed;
  return run_extrema_dp(grid, lambda, rule.atom_stop, router);
}

StoppedLaw dbarrier_stopped_law(const DBarrier& db, const DiscreteMeasure& lambda,
                                const DiscreteMeasure& atom_stop,
                                std::span<const double> extra_levels) {
  std::vector<double> primary = lambda.support();
  std::vector<double> secondary(extra_levels.begin(), extra_levels.end());
  for (const auto& e : db.entries()) {
    primary.push_back(e.level);
    secondary.push_back(e.rightmost.value);
  }
  CriticalGrid grid(std::move(primary), std::move(secondary));
  return run_extrema_dp(grid, lambda, atom_stop, make_router(grid, db));
}

// ---------------------------------------------------------------------------
// Azema-Yor exact law.
//
// Within a stratum (max M, min m) the rule can only stop at the boundary
// level b(M); the walk is absorbed at max(b(M), next grid level below m) and
// at the next grid level above M, one gambler's-ruin draw per stratum.
// ---------------------------------------------------------------------------

namespace {

struct AyGrid {
  CriticalGrid grid;
  std::vector<std::ptrdiff_t> boundary_idx;  // per max level; -1 if below grid
};

AyGrid ay_grid_for(const AzemaYorRule& rule, const DiscreteMeasure& lambda,
                   std::span<const double> extra) {
  std::vector<double> primary = lambda.support();
  std::vector<double> secondary;
  for (const auto& [m_at, value] : rule.boundary.breakpoints()) {
    secondary.push_back(m_at);
    primary.push_back(value);
  }
  secondary.insert(secondary.end(), extra.begin(), extra.end());
  AyGrid out{CriticalGrid(std::move(primary), std::move(secondary)), {}};
  out.boundary_idx.resize(out.grid.size());
  for (std::size_t i = 0; i < out.grid.size(); ++i) {
    const double b = rule.boundary(out.grid.level(i));
    if (b == -kInf) {
      out.boundary_idx[i] = -1;
      continue;
    }
    const auto idx = out.grid.index_of(b);
    if (!idx) throw std::logic_error("azema-yor: boundary value off the grid");
    out.boundary_idx[i] = static_cast<std::ptrdiff_t>(*idx);
  }
  return out;
}

}  // namespace

StoppedLaw exact_stopped_law(const AzemaYorRule& rule, const DiscreteMeasure& lambda,
                             std::span<const double> extra_levels) {
  const AyGrid ag = ay_grid_for(rule, lambda, extra_levels);
  const CriticalGrid& grid = ag.grid;
  const std::size_t n = grid.size();

  StoppedLaw law;
  std::map<std::array<std::size_t, 3>, double> records;
  KahanSum duration;

  std::vector<double> mass_at_max(n * n, 0.0), mass_at_min(n * n, 0.0);
  auto at = [n](std::vector<double>& v, std::size_t M, std::size_t m) -> double& {
    return v[M * n + m];
  };

  // Entry tests: stopping happens the moment pos <= b(max) first holds.
  auto enter_new_max = [&](std::size_t M, std::size_t m, double mass) {
    if (ag.boundary_idx[M] >= static_cast<std::ptrdiff_t>(M)) {
      records[{M, M, m}] += mass;
    } else {
      at(mass_at_max, M, m) += mass;
    }
  };
  auto enter_new_min = [&](std::size_t M, std::size_t m, double mass) {
    if (ag.boundary_idx[M] >= static_cast<std::ptrdiff_t>(m)) {
      records[{m, M, m}] += mass;
    } else {
      at(mass_at_min, M, m) += mass;
    }
  };

  for (const auto& a : lambda.atoms()) {
    const auto idx_opt = grid.index_of(a.x);
    if (!idx_opt) throw std::logic_error("azema-yor: start off the grid");
    const std::size_t i = *idx_opt;
    if (ag.boundary_idx[i] >= static_cast<std::ptrdiff_t>(i)) {
      records[{i, i, i}] += a.p;  // immediate stop at time 0
      continue;
    }
    if (i == 0 || i + 1 == n)
      throw_non_terminating(i == 0 ? "below" : "above", a.x, a.x, a.x);
    const std::ptrdiff_t b = ag.boundary_idx[i];
    const std::size_t lower = std::max<std::ptrdiff_t>(b, static_cast<std::ptrdiff_t>(i) - 1);
    const ExitSplit es = exit_split(a.x, grid.level(lower), grid.level(i + 1));
    duration.add(a.p * es.e_time);
    enter_new_max(i + 1, i, a.p * es.p_up);
    if (static_cast<std::ptrdiff_t>(lower) == b && b > static_cast<std::ptrdiff_t>(i) - 1) {
      records[{lower, i, i}] += a.p * es.p_down;  // absorbed at the boundary
    } else {
      enter_new_min(i, i - 1, a.p * es.p_down);
    }
  }

  for (std::size_t width = 1; width < n; ++width) {
    for (std::size_t m = 0; m + width < n; ++m) {
      const std::size_t M = m + width;
      const std::ptrdiff_t b = ag.boundary_idx[M];
      for (int side = 0; side < 2; ++side) {
        double& cell = side == 0 ? at(mass_at_max, M, m) : at(mass_at_min, M, m);
        const double mass = cell;
        if (mass == 0.0) continue;
        cell = 0.0;
        const double pos = side == 0 ? grid.level(M) : grid.level(m);
        if (M + 1 == n)
          throw_non_terminating("above", pos, grid.level(M), grid.level(m));
        const std::ptrdiff_t lower =
            std::max<std::ptrdiff_t>(b, static_cast<std::ptrdiff_t>(m) - 1);
        if (lower < 0)
          throw_non_terminating("below", pos, grid.level(M), grid.level(m));
        const ExitSplit es =
            exit_split(pos, grid.level(static_cast<std::size_t>(lower)), grid.level(M + 1));
        duration.add(mass * es.e_time);
        enter_new_max(M + 1, m, mass * es.p_up);
        if (lower == b && b >= static_cast<std::ptrdiff_t>(m)) {
          records[{static_cast<std::size_t>(b), M, m}] += mass * es.p_down;
        } else {
          enter_new_min(M, m - 1, mass * es.p_down);
        }
      }
    }
  }

  for (const auto& [key, mass] : records) {
    law.joint.push_back(
        {grid.level(key[0]), grid.level(key[1]), grid.level(key[2]), mass});
  }
  law.expected_duration = duration.value();
  law.canonicalize();
  const double total = law.total_mass();
  if (std::abs(total - lambda.total()) > 1e-9)
    throw MassLeakError("MassLeak: azema-yor law mass " + std::to_string(total), total);
  return law;
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

namespace {

struct PathOutcome {
  std::array<std::size_t, 3> record;  // (end, max, min) grid indices
  double duration;
};

struct McContext {
  const CriticalGrid* grid;
  const DiscreteMeasure* lambda;
  std::vector<double> start_cumulative;
  double lambda_total;
};

std::size_t draw_start_atom(const McContext& ctx, Rng& rng) {
  const double u = rng.uniform() * ctx.lambda_total;
  const auto& cum = ctx.start_cumulative;
  std::size_t k = 0;
  while (k + 1 < cum.size() && u >= cum[k]) ++k;
  return k;
}

// One stratum-exit walk under a vh/d hit router.
PathOutcome walk_vh_path(const McContext& ctx, const IndexRouter& router,
                         const DiscreteMeasure& atom_stop, Rng& rng) {
  const CriticalGrid& grid = *ctx.grid;
  const std::size_t n = grid.size();
  const MassAtom start_atom = ctx.lambda->atoms()[draw_start_atom(ctx, rng)];
  const std::size_t i = *grid.index_of(start_atom.x);
  const double p_stop0 = atom_stop.mass_at(start_atom.x) / start_atom.p;
  if (p_stop0 > 0.0 && rng.uniform() < p_stop0) return {{i, i, i}, 0.0};

  std::size_t M = i, m = i;
  bool at_max = true;
  double duration = 0.0;
  for (;;) {
    const double pos = at_max ? grid.level(M) : grid.level(m);
    if (M + 1 == n) throw_non_terminating("above", pos, grid.level(M), grid.level(m));
    if (m == 0) throw_non_terminating("below", pos, grid.level(M), grid.level(m));
    const ExitSplit es = exit_split(pos, grid.level(m - 1), grid.level(M + 1));
    duration += es.e_time;
    if (rng.uniform() < es.p_up) {
      ++M;
      if (router.stop_new_max(M, m)) return {{M, M, m}, duration};
      at_max = true;
    } else {
      --m;
      if (router.stop_new_min(m, M)) return {{m, M, m}, duration};
      at_max = false;
    }
  }
}

// Azema-Yor / Hobson-Pedersen walk; g_cap_idx is the grid index of the
// sampled G level for HP (one past the grid for AY).
PathOutcome walk_boundary_path(const McContext& ctx,
                               const std::vector<std::ptrdiff_t>& boundary_idx,
                               std::size_t g_cap_idx, Rng& rng) {
  const CriticalGrid& grid = *ctx.grid;
  const std::size_t n = grid.size();
  const std::size_t i = *grid.index_of(ctx.lambda->atoms()[draw_start_atom(ctx, rng)].x);
  if (boundary_idx[i] >= static_cast<std::ptrdiff_t>(i) || i >= g_cap_idx)
    return {{i, i, i}, 0.0};

  std::size_t M = i, m = i;
  bool at_max = true;
  double duration = 0.0;
  for (;;) {
    const std::ptrdiff_t b = boundary_idx[M];
    const double pos = at_max ? grid.level(M) : grid.level(m);
    if (M + 1 == n) throw_non_terminating("above", pos, grid.level(M), grid.level(m));
    const std::ptrdiff_t lower =
        std::max<std::ptrdiff_t>(b, static_cast<std::ptrdiff_t>(m) - 1);
    if (lower < 0) throw_non_terminating("below", pos, grid.level(M), grid.level(m));
    const ExitSplit es =
        exit_split(pos, grid.level(static_cast<std::size_t>(lower)), grid.level(M + 1));
    duration += es.e_time;
    if (rng.uniform() < es.p_up) {
      ++M;
      at_max = true;
      if (M >= g_cap_idx) return {{M, M, m}, duration};  // tau_G
      if (boundary_idx[M] >= static_cast<std::ptrdiff_t>(M)) return {{M, M, m}, duration};
    } else {
      if (lower == b && b >= static_cast<std::ptrdiff_t>(m)) {
        return {{static_cast<std::size_t>(b), M, m}, duration};  // absorbed at boundary
      }
      --m;
      at_max = false;
      if (boundary_idx[M] >= static_cast<std::ptrdiff_t>(m)) return {{m, M, m}, duration};
    }
  }
}

PathOutcome walk_euler_path(const McContext& ctx, const TimeSpaceBarrier& barrier,
                            bool rost, const DiscreteMeasure& atom_stop, double dt,
                            std::uint64_t step_cap, Rng& rng) {
  const CriticalGrid& grid = *ctx.grid;
  const auto& levels = grid.levels();
  const MassAtom start_atom = ctx.lambda->atoms()[draw_start_atom(ctx, rng)];
  const std::size_t i = *grid.index_of(start_atom.x);
  if (rost) {
    const double p_stop0 = atom_stop.mass_at(start_atom.x) / start_atom.p;
    if (p_stop0 > 0.0 && rng.uniform() < p_stop0) return {{i, i, i}, 0.0};
  } else if (barrier.in_region(0.0, start_atom.x)) {
    return {{i, i, i}, 0.0};
  }

  double pos = start_atom.x;
  double t = 0.0;
  std::size_t max_idx = i, min_idx = i;
  const double sqrt_dt = std::sqrt(dt);
  for (std::uint64_t step = 0; step < step_cap; ++step) {
    const double next = pos + sqrt_dt * rng.gauss();
    t += dt;
    if (next > pos) {
      // Grid levels crossed upward, in order.
      auto first = std::upper_bound(levels.begin(), levels.end(), pos);
      for (auto it = first; it != levels.end() && *it <= next; ++it) {
        const std::size_t k = static_cast<std::size_t>(it - levels.begin());
        max_idx = std::max(max_idx, k);
        if (barrier.in_region(t, *it)) return {{k, max_idx, min_idx}, t};
      }
    } else if (next < pos) {
      auto first = std::lower_bound(levels.begin(), levels.end(), pos);
      while (first != levels.begin() && *(first - 1) >= next) {
        --first;
        const std::size_t k = static_cast<std::size_t>(first - levels.begin());
        min_idx = std::min(min_idx, k);
        if (barrier.in_region(t, *first)) return {{k, max_idx, min_idx}, t};
      }
    }
    pos = next;
  }
  throw PathBudgetExceededError("PathBudgetExceeded: Euler path exceeded step cap");
}

struct BlockTally {
  std::map<std::array<std::size_t, 3>, std::uint64_t> counts;
  KahanSum duration;
};

}  // namespace

StoppedLaw mc_stopped_law(const StoppingRule& rule, const DiscreteMeasure& lambda,
                          std::int64_t n_paths, std::uint64_t seed,
                          const McOptions& options) {
  if (n_paths < 1) throw std::invalid_argument("mc_stopped_law: n_paths >= 1");
  if (lambda.empty()) throw std::invalid_argument("mc_stopped_law: empty lambda");

  // Assemble the grid per rule variant.
  std::vector<double> primary = lambda.support();
  std::vector<double> secondary;
  const DiscreteMeasure* atom_stop = nullptr;
  std::vector<std::ptrdiff_t> boundary_idx;
  const TimeSpaceBarrier* ts_barrier = nullptr;
  bool rost = false;
  const VhBarrier* vh = nullptr;
  const HobsonPedersenRule* hp = nullptr;

  std::visit(
      [&](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PerkinsRule>) {
          for (const auto& v : r.barrier.v_lines()) {
            primary.push_back(v.level);
            secondary.push_back(v.depth);
          }
          for (const auto& h : r.barrier.h_lines()) {
            primary.push_back(h.level);
            secondary.push_back(h.right_end);
          }
          atom_stop = &r.atom_stop;
          vh = &r.barrier;
        } else if constexpr (std::is_same_v<T, AzemaYorRule>) {
          for (const auto& [m_at, value] : r.boundary.breakpoints()) {
            secondary.push_back(m_at);
            primary.push_back(value);
          }
        } else if constexpr (std::is_same_v<T, HobsonPedersenRule>) {
          for (const auto& [m_at, value] : r.g.breakpoints()) {
            secondary.push_back(m_at);
            primary.push_back(value);
          }
          const auto gs = r.G_law.support();
          primary.insert(primary.end(), gs.begin(), gs.end());
          hp = &r;
        } else if constexpr (std::is_same_v<T, RootRule>) {
          const auto ls = r.barrier.levels();
          primary.insert(primary.end(), ls.begin(), ls.end());
          ts_barrier = &r.barrier;
        } else {
          const auto ls = r.barrier.levels();
          primary.insert(primary.end(), ls.begin(), ls.end());
          ts_barrier = &r.barrier;
          atom_stop = &r.atom_stop;
          rost = true;
        }
      },
      rule);
  secondary.insert(secondary.end(), options.extra_levels.begin(),
                   options.extra_levels.end());

  McContext ctx;
  CriticalGrid grid{std::move(primary), std::move(secondary)};
  ctx.grid = &grid;
  ctx.lambda = &lambda;
  ctx.lambda_total = lambda.total();
  double cum = 0.0;
  for (const auto& a : lambda.atoms()) {
    cum += a.p;
    ctx.start_cumulative.push_back(cum);
  }

  IndexRouter vh_router;
  if (vh != nullptr) vh_router = make_router(grid, *vh);

  if (const auto* ay = std::get_if<AzemaYorRule>(&rule)) {
    boundary_idx.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double b = ay->boundary(grid.level(k));
      boundary_idx[k] = b == -kInf ? -1 : static_cast<std::ptrdiff_t>(*grid.index_of(b));
    }
  } else if (hp != nullptr) {
    boundary_idx.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double b = hp->g(grid.level(k));
      boundary_idx[k] = b == -kInf ? -1 : static_cast<std::ptrdiff_t>(*grid.index_of(b));
    }
  }

  constexpr std::int64_t kBlock = 8192;
  const std::int64_t n_blocks = (n_paths + kBlock - 1) / kBlock;
  std::vector<BlockTally> tallies(static_cast<std::size_t>(n_blocks));

  auto run_block = [&](std::int64_t block) {
    BlockTally& tally = tallies[static_cast<std::size_t>(block)];
    const std::int64_t lo = block * kBlock;
    const std::int64_t hi = std::min(n_paths, lo + kBlock);
    for (std::int64_t p = lo; p < hi; ++p) {
      Rng rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
      PathOutcome out;
      if (vh != nullptr) {
        out = walk_vh_path(ctx, vh_router, *atom_stop, rng);
      } else if (!boundary_idx.empty() && hp == nullptr) {
        out = walk_boundary_path(ctx, boundary_idx, grid.size() + 1, rng);
      } else if (hp != nullptr) {
        // G is drawn once per path at time 0 from the path's substream.
        std::size_t g_cap = grid.size() + 1;
        if (!hp->G_law.empty()) {
          const double uG = rng.uniform() * hp->G_law.total();
          double acc = 0.0;
          double g_level = hp->G_law.atoms().back().x;
          for (const auto& a : hp->G_law.atoms()) {
            acc += a.p;
            if (uG < acc) {
              g_level = a.x;
              break;
            }
          }
          g_cap = *grid.index_of(g_level);
        }
        out = walk_boundary_path(ctx, boundary_idx, g_cap, rng);
      } else {
        out = walk_euler_path(ctx, *ts_barrier, rost,
                              atom_stop ? *atom_stop : DiscreteMeasure{}, options.dt,
                              options.step_cap, rng);
      }
      tally.counts[out.record] += 1;
      tally.duration.add(out.duration);
    }
  };

  const int threads = std::max(1, options.threads);
  if (threads == 1) {
    for (std::int64_t b = 0; b < n_blocks; ++b) run_block(b);
  } else {
    std::vector<std::future<void>> futs;
    std::atomic<std::int64_t> next{0};
    for (int w = 0; w < threads; ++w) {
      futs.push_back(std::async(std::launch::async, [&]() {
        for (;;) {
          const std::int64_t b = next.fetch_add(1);
          if (b >= n_blocks) return;
          run_block(b);
        }
      }));
    }
    for (auto& f : futs) f.get();
  }

  std::map<std::array<std::size_t, 3>, std::uint64_t> counts;
  KahanSum duration;
  for (const auto& tally : tallies) {
    for (const auto& [key, c] : tally.counts) counts[key] += c;
    duration.add(tally.duration.value());
  }

  StoppedLaw law;
  const double w = lambda.total() / static_cast<double>(n_paths);
  for (const auto& [key, c] : counts) {
    law.joint.push_back({grid.level(key[0]), grid.level(key[1]), grid.level(key[2]),
                         static_cast<double>(c) * w});
  }
  law.expected_duration = duration.value() / static_cast<double>(n_paths);
  if (atom_stop != nullptr) law.atom_mass_at_zero = *atom_stop;
  law.canonicalize();
  return law;
}

std::vector<EventStep> simulate_event_path(const CriticalGrid& grid,
                                           std::size_t start_idx, Rng& rng) {
  std::vector<EventStep> steps;
  const std::size_t n = grid.size();
  std::size_t M = start_idx, m = start_idx;
  bool at_max = true, from_start = true;
  while (M + 1 < n && m > 0) {
    const double pos = from_start ? grid.level(start_idx)
                                  : (at_max ? grid.level(M) : grid.level(m));
    from_start = false;
    const ExitSplit es = exit_split(pos, grid.level(m - 1), grid.level(M + 1));
    if (rng.uniform() < es.p_up) {
      ++M;
      at_max = true;
      steps.push_back({Event::NewMax, M, m});
    } else {
      --m;
      at_max = false;
      steps.push_back({Event::NewMin, M, m});
    }
  }
  return steps;
}

}  // namespace sep
