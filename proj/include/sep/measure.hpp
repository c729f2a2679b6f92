#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sep {

struct MassAtom {
  double x;
  double p;
  bool operator==(const MassAtom&) const = default;
};

// Finitely supported (sub-)probability measure on the reals. Locations are
// strictly increasing, every mass is > 0; the zero measure is the empty atom
// list. Immutable after construction.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  explicit DiscreteMeasure(std::vector<MassAtom> atoms);

  static DiscreteMeasure point_mass(double x, double p = 1.0);

  const std::vector<MassAtom>& atoms() const { return atoms_; }
  bool empty() const { return atoms_.empty(); }
  std::size_t size() const { return atoms_.size(); }

  double total() const;
  double mass_at(double x) const;  // exact location match, 0 otherwise
  bool is_probability(double tol = 1e-12) const;

  // Raw moments Σ p·x^k (compensated summation).
  double raw_moment(int k) const;
  double mean() const { return raw_moment(1); }

  double min_support() const;
  double max_support() const;
  std::vector<double> support() const;

  bool operator==(const DiscreteMeasure&) const = default;

 private:
  std::vector<MassAtom> atoms_;
};

double moment(const DiscreteMeasure& m, int k);
double potential(const DiscreteMeasure& m, double x);  // u_m(x) = -Σ p|x - y|
bool convex_order(const DiscreteMeasure& lambda, const DiscreteMeasure& mu);

// Atom-wise minimum; the largest measure dominated by both.
DiscreteMeasure meet(const DiscreteMeasure& lambda, const DiscreteMeasure& mu);

// a - b atom-wise; requires b <= a atom-wise within tol, drops near-zero rests.
DiscreteMeasure subtract(const DiscreteMeasure& a, const DiscreteMeasure& b,
                         double tol = 1e-12);

DiscreteMeasure mirrored(const DiscreteMeasure& m);  // pushforward by x -> -x

// Total variation ½ Σ |a({x}) - b({x})| over the union of supports.
double tv_distance(const DiscreteMeasure& a, const DiscreteMeasure& b);

// One round of a random mean-preserving dilation: each atom is either kept
// (probability keep_prob) or split into a two-point martingale kernel.
DiscreteMeasure mean_preserving_dilation(const DiscreteMeasure& m, std::uint64_t seed,
                                         double spread, double keep_prob = 0.35);

// (lambda, mu) with lambda prior to mu in convex order; deterministic in seed.
std::pair<DiscreteMeasure, DiscreteMeasure> random_convex_pair(
    std::uint64_t seed, int n_atoms, double spread, double keep_prob = 0.35);

void to_json(nlohmann::json& j, const DiscreteMeasure& m);
void from_json(const nlohmann::json& j, DiscreteMeasure& m);

}  // namespace sep
