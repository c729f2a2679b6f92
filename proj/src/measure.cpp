#include "sep/measure.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sep/numeric.hpp"
#include "sep/rng.hpp"

namespace sep {

DiscreteMeasure::DiscreteMeasure(std::vector<MassAtom> atoms) {
  for (const auto& a : atoms) {
    if (!std::isfinite(a.x) || !std::isfinite(a.p))
      throw std::invalid_argument("DiscreteMeasure: non-finite atom");
    if (a.p < 0.0) throw std::invalid_argument("DiscreteMeasure: negative mass");
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const MassAtom& a, const MassAtom& b) { return a.x < b.x; });
  for (const auto& a : atoms) {
    if (a.p == 0.0) continue;
    if (!atoms_.empty() && atoms_.back().x == a.x) {
      atoms_.back().p += a.p;
    } else {
      atoms_.push_back(a);
    }
  }
}

DiscreteMeasure DiscreteMeasure::point_mass(double x, double p) {
  return DiscreteMeasure({{x, p}});
}

double DiscreteMeasure::total() const {
  KahanSum s;
  for (const auto& a : atoms_) s.add(a.p);
  return s.value();
}

double DiscreteMeasure::mass_at(double x) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), x,
                             [](const MassAtom& a, double v) { return a.x < v; });
  if (it != atoms_.end() && it->x == x) return it->p;
  return 0.0;
}

bool DiscreteMeasure::is_probability(double tol) const {
  return std::abs(total() - 1.0) <= tol;
}

double DiscreteMeasure::raw_moment(int k) const {
  KahanSum s;
  for (const auto& a : atoms_) {
    double xk = 1.0;
    for (int i = 0; i < k; ++i) xk *= a.x;
    s.add(a.p * xk);
  }
  return s.value();
}

double DiscreteMeasure::min_support() const {
  if (atoms_.empty()) throw std::logic_error("min_support of empty measure");
  return atoms_.front().x;
}

double DiscreteMeasure::max_support() const {
  if (atoms_.empty()) throw std::logic_error("max_support of empty measure");
  return atoms_.back().x;
}

std::vector<double> DiscreteMeasure::support() const {
  std::vector<double> xs;
  xs.reserve(atoms_.size());
  for (const auto& a : atoms_) xs.push_back(a.x);
  return xs;
}

double moment(const DiscreteMeasure& m, int k) {
  if (k != 1 && k != 2) throw std::invalid_argument("moment: k must be 1 or 2");
  return m.raw_moment(k);
}

double potential(const DiscreteMeasure& m, double x) {
  KahanSum s;
  for (const auto& a : m.atoms()) s.add(-a.p * std::abs(x - a.x));
  return s.value();
}

bool convex_order(const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
  constexpr double tol = 1e-12;
  if (std::abs(lambda.mean() - mu.mean()) > tol) return false;
  // Potentials are piecewise linear with kinks on the supports, so comparing
  // at the union of supports decides the order exactly.
  for (const auto& a : lambda.atoms()) {
    if (potential(mu, a.x) > potential(lambda, a.x) + tol) return false;
  }
  for (const auto& a : mu.atoms()) {
    if (potential(mu, a.x) > potential(lambda, a.x) + tol) return false;
  }
  return true;
}

DiscreteMeasure meet(const DiscreteMeasure& lambda, const DiscreteMeasure& mu) {
  std::vector<MassAtom> out;
  for (const auto& a : lambda.atoms()) {
    const double q = mu.mass_at(a.x);
    if (q > 0.0) out.push_back({a.x, std::min(a.p, q)});
  }
  return DiscreteMeasure(std::move(out));
}

DiscreteMeasure subtract(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         double tol) {
  std::vector<MassAtom> out;
  for (const auto& atom : a.atoms()) {
    const double rest = atom.p - b.mass_at(atom.x);
    if (rest < -tol)
      throw std::invalid_argument("subtract: second measure not dominated");
    if (rest > tol) out.push_back({atom.x, rest});
  }
  for (const auto& atom : b.atoms()) {
    if (a.mass_at(atom.x) + tol < atom.p)
      throw std::invalid_argument("subtract: second measure not dominated");
  }
  return DiscreteMeasure(std::move(out));
}

DiscreteMeasure mirrored(const DiscreteMeasure& m) {
  std::vector<MassAtom> out;
  for (const auto& a : m.atoms()) out.push_back({-a.x, a.p});
  return DiscreteMeasure(std::move(out));
}

double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  KahanSum s;
  for (const auto& atom : a.atoms()) s.add(std::abs(atom.p - b.mass_at(atom.x)));
  for (const auto& atom : b.atoms()) {
    if (a.mass_at(atom.x) == 0.0) s.add(atom.p);
  }
  return 0.5 * s.value();
}

DiscreteMeasure mean_preserving_dilation(const DiscreteMeasure& m, std::uint64_t seed,
                                         double spread, double keep_prob) {
  Rng rng(seed);
  std::vector<MassAtom> out;
  for (const auto& a : m.atoms()) {
    if (rng.uniform() < keep_prob) {
      out.push_back(a);
      continue;
    }
    // Split into {x - d_lo, x + d_hi} with masses balancing the mean.
    const double d_lo = (0.25 + 0.75 * rng.uniform()) * spread;
    const double d_hi = (0.25 + 0.75 * rng.uniform()) * spread;
    const double p_hi = a.p * d_lo / (d_lo + d_hi);
    out.push_back({a.x - d_lo, a.p - p_hi});
    out.push_back({a.x + d_hi, p_hi});
  }
  return DiscreteMeasure(std::move(out));
}

std::pair<DiscreteMeasure, DiscreteMeasure> random_convex_pair(
    std::uint64_t seed, int n_atoms, double spread, double keep_prob) {
  if (n_atoms < 1) throw std::invalid_argument("random_convex_pair: n_atoms >= 1");
  if (spread <= 0.0) throw std::invalid_argument("random_convex_pair: spread > 0");
  std::uint64_t s0 = seed;
  Rng rng(splitmix64(s0));
  std::vector<MassAtom> atoms;
  for (int i = 0; i < n_atoms; ++i) {
    atoms.push_back({(2.0 * rng.uniform() - 1.0) * spread, 0.2 + rng.uniform()});
  }
  double tot = 0.0;
  for (const auto& a : atoms) tot += a.p;
  for (auto& a : atoms) a.p /= tot;
  DiscreteMeasure lambda(std::move(atoms));
  DiscreteMeasure mu =
      mean_preserving_dilation(lambda, splitmix64(s0), 0.5 * spread, keep_prob);
  return {std::move(lambda), std::move(mu)};
}

void to_json(nlohmann::json& j, const DiscreteMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.atoms()) atoms.push_back({{"x", a.x}, {"p", a.p}});
  j = nlohmann::json{{"atoms", std::move(atoms)}};
}

void from_json(const nlohmann::json& j, DiscreteMeasure& m) {
  if (!j.is_object()) throw std::invalid_argument("measure: expected object");
  for (const auto& [key, _] : j.items()) {
    if (key != "atoms") throw std::invalid_argument("measure: unknown key '" + key + "'");
  }
  if (!j.contains("atoms") || !j.at("atoms").is_array())
    throw std::invalid_argument("measure: missing 'atoms' array");
  std::vector<MassAtom> atoms;
  for (const auto& ja : j.at("atoms")) {
    if (!ja.is_object()) throw std::invalid_argument("measure: atom must be object");
    for (const auto& [key, _] : ja.items()) {
      if (key != "x" && key != "p")
        throw std::invalid_argument("measure: unknown atom key '" + key + "'");
    }
    const double x = ja.at("x").get<double>();
    const double p = ja.at("p").get<double>();
    if (p < 0.0) throw std::invalid_argument("measure: negative mass");
    for (const auto& seen : atoms) {
      if (seen.x == x) throw std::invalid_argument("measure: duplicate location");
    }
    atoms.push_back({x, p});
  }
  DiscreteMeasure parsed(std::move(atoms));
  const double tot = parsed.total();
  if (tot < 0.0 || tot > 1.0 + 1e-12)
    throw std::invalid_argument("measure: total mass outside [0, 1]");
  m = std::move(parsed);
}

}  // namespace sep
