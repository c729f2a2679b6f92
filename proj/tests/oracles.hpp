#pragma once

// Test-only oracles, independent of the engine code paths they check.

#include <cmath>
#include <cstdint>
#include <vector>

#include "sep/barrier.hpp"
#include "sep/measure.hpp"
#include "sep/rng.hpp"

namespace sep::testing {

struct LatticeExitEstimate {
  double p_up;
  double p_up_se;
  double e_time;
  double e_time_se;
};

// Symmetric +-h random walk started at x in (a, b); exact embedding of the
// Brownian exit problem when (x - a)/h and (b - x)/h are integers.
inline LatticeExitEstimate lattice_exit_oracle(double x, double a, double b, double h,
                                               std::int64_t n_paths,
                                               std::uint64_t seed) {
  Rng rng(seed);
  std::int64_t ups = 0;
  double time_sum = 0.0, time_sq = 0.0;
  for (std::int64_t p = 0; p < n_paths; ++p) {
    double pos = x;
    std::int64_t steps = 0;
    while (pos > a + 0.5 * h && pos < b - 0.5 * h) {
      pos += (rng.bits() & 1u) ? h : -h;
      ++steps;
    }
    if (pos > b - 0.5 * h) ++ups;
    const double t = static_cast<double>(steps) * h * h;
    time_sum += t;
    time_sq += t * t;
  }
  const double n = static_cast<double>(n_paths);
  const double p_hat = static_cast<double>(ups) / n;
  const double t_hat = time_sum / n;
  const double t_var = time_sq / n - t_hat * t_hat;
  return {p_hat, std::sqrt(p_hat * (1.0 - p_hat) / n), t_hat,
          std::sqrt(std::max(t_var, 0.0) / n)};
}

// Independent geometric point-in-set check for vh-barriers (closed segments,
// h-lines carrying their downward tails).
inline bool brute_force_vh_hit(const VhBarrier& b, double max, double min) {
  for (const auto& v : b.v_lines()) {
    if (max == v.level && min >= v.depth && min <= v.level) return true;
  }
  for (const auto& h : b.h_lines()) {
    if (min == h.level && max >= h.level && max <= h.right_end) return true;
    if (max == h.level && min <= h.level) return true;  // tail
  }
  return false;
}

// Deterministic-start corpus: mu built from delta_0 by repeated random
// mean-preserving dilation, kept clear of mass at the origin.
inline DiscreteMeasure delta0_target(std::uint64_t seed, int rounds, double spread) {
  DiscreteMeasure mu = DiscreteMeasure::point_mass(0.0);
  std::uint64_t s = seed;
  for (int r = 0; r < rounds; ++r) {
    mu = mean_preserving_dilation(mu, splitmix64(s), spread, r == 0 ? 0.0 : 0.3);
  }
  return mu;
}

struct LatticeVhLaw {
  DiscreteMeasure endpoints;
  double expected_duration;
};

// Independent oracle for vh-barrier stopping: a +-h lattice walk (an exact
// Brownian skeleton at spatial resolution h) with purely geometric hit tests
// at every new lattice extremum, carried out in integer lattice units so the
// dynamics are exact. Converges to the engine's law as h -> 0; shares no
// code with the stratum dynamic program. Requires every coordinate of the
// instance to sit on the lattice.
inline LatticeVhLaw lattice_vh_law(const VhBarrier& barrier,
                                   const DiscreteMeasure& lambda,
                                   const DiscreteMeasure& atom_stop, double h,
                                   std::int64_t n_paths, std::uint64_t seed) {
  auto to_units = [h](double x) {
    const double q = x / h;
    const auto r = static_cast<std::int64_t>(std::llround(q));
    if (std::abs(q - static_cast<double>(r)) > 1e-9)
      throw std::invalid_argument("lattice oracle: coordinate off the lattice");
    return r;
  };
  struct IntV {
    std::int64_t level, depth;
  };
  struct IntH {
    std::int64_t level, right;
  };
  std::vector<IntV> iv;
  std::vector<IntH> ih;
  std::vector<double> stop_levels;  // for snapping endpoints back to doubles
  for (const auto& v : barrier.v_lines()) {
    iv.push_back({to_units(v.level), to_units(v.depth)});
    stop_levels.push_back(v.level);
  }
  for (const auto& hl : barrier.h_lines()) {
    ih.push_back({to_units(hl.level), to_units(hl.right_end)});
    stop_levels.push_back(hl.level);
  }
  auto snap = [&stop_levels, h](double x) {
    for (double l : stop_levels) {
      if (std::abs(l - x) < 0.5 * h) return l;
    }
    return x;
  };

  std::vector<MassAtom> out;
  double duration_sum = 0.0;
  for (std::int64_t p = 0; p < n_paths; ++p) {
    Rng rng(substream_seed(seed, static_cast<std::uint64_t>(p)));
    const double u = rng.uniform() * lambda.total();
    double cum = 0.0;
    std::size_t k = 0;
    for (; k + 1 < lambda.size(); ++k) {
      cum += lambda.atoms()[k].p;
      if (u < cum) break;
    }
    const MassAtom start = lambda.atoms()[k];
    const double p0 = atom_stop.mass_at(start.x) / start.p;
    if (p0 > 0.0 && rng.uniform() < p0) {
      out.push_back({start.x, 1.0});
      continue;
    }
    std::int64_t pos = to_units(start.x), max = pos, min = pos;
    std::uint64_t bits = 0;
    int bits_left = 0;
    std::int64_t steps = 0;
    bool stopped = false;
    while (!stopped) {
      if (bits_left == 0) {
        bits = rng.bits();
        bits_left = 64;
      }
      pos += (bits & 1u) ? 1 : -1;
      bits >>= 1;
      --bits_left;
      ++steps;
      bool event = false;
      if (pos > max) {
        max = pos;
        event = true;
      } else if (pos < min) {
        min = pos;
        event = true;
      }
      if (event) {
        for (const auto& v : iv) {
          if (max == v.level && min >= v.depth) stopped = true;
        }
        for (const auto& hl : ih) {
          if (min == hl.level && max <= hl.right) stopped = true;
          if (max == hl.level) stopped = true;  // downward tail
        }
      }
      if (steps > 100'000'000) throw std::runtime_error("lattice oracle: runaway path");
    }
    duration_sum += static_cast<double>(steps) * h * h;
    out.push_back({snap(static_cast<double>(pos) * h), 1.0});
  }
  const double w = lambda.total() / static_cast<double>(n_paths);
  for (auto& a : out) a.p = w;
  return {DiscreteMeasure(std::move(out)), duration_sum / static_cast<double>(n_paths)};
}

}  // namespace sep::testing
