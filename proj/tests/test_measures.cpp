#include <doctest.h>

#include <cmath>

#include "sep/instance.hpp"
#include "sep/measure.hpp"

using namespace sep;

namespace {

DiscreteMeasure example_lambda() { return example_instance(0.5).lambda; }
DiscreteMeasure example_mu(double alpha) { return example_instance(alpha).mu; }

}  // namespace

TEST_CASE("moments by direct summation") {
  CHECK(moment(DiscreteMeasure::point_mass(0.0), 2) == 0.0);
  // 1/4*1 + 1/2*0 + 1/4*1
  CHECK(moment(example_lambda(), 2) == doctest::Approx(0.5).epsilon(1e-15));
  for (double alpha : {0.0, 0.25, 0.6, 0.75}) {
    CHECK(moment(example_mu(alpha), 2) ==
          doctest::Approx(4.0 * (1.0 - alpha)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(moment(example_lambda(), 3), std::invalid_argument);
}

TEST_CASE("potential is -E|x - .|") {
  for (double x : {-3.0, -0.7, 0.0, 0.2, 5.0}) {
    CHECK(potential(DiscreteMeasure::point_mass(0.0), x) == -std::abs(x));
  }
  CHECK(potential(example_lambda(), 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
  // -2(1-alpha) at alpha = 3/4 touches u_lambda(0): the boundary case.
  CHECK(potential(example_mu(0.75), 0.0) == doctest::Approx(-0.5).epsilon(1e-15));
}

TEST_CASE("potential is concave piecewise-linear") {
  const auto [lambda, mu] = random_convex_pair(7, 6, 2.0);
  for (const auto& m : {lambda, mu}) {
    std::vector<double> grid;
    for (double x = -4.0; x <= 4.0; x += 0.25) grid.push_back(x);
    for (std::size_t i = 0; i + 2 < grid.size(); ++i) {
      const double x = grid[i], y = grid[i + 1], z = grid[i + 2];
      const double chord =
          potential(m, x) + (potential(m, z) - potential(m, x)) * (y - x) / (z - x);
      CHECK(potential(m, y) >= chord - 1e-12);
    }
  }
}

TEST_CASE("convex order on the example family") {
  const auto d0 = DiscreteMeasure::point_mass(0.0);
  CHECK(convex_order(d0, d0));
  CHECK(convex_order(example_lambda(), example_mu(0.5)));
  CHECK(convex_order(example_lambda(), example_mu(0.75)));
  CHECK_FALSE(convex_order(example_lambda(), example_mu(0.8)));
  CHECK_FALSE(convex_order(example_lambda(), example_mu(0.76)));
}

TEST_CASE("convex order implies second moment order and is transitive") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    auto [lambda, mu] = random_convex_pair(seed, 1 + seed % 7, 1.5);
    CHECK(convex_order(lambda, mu));
    CHECK(moment(lambda, 2) <= moment(mu, 2) + 1e-12);
    const DiscreteMeasure nu = mean_preserving_dilation(mu, seed * 977 + 5, 0.8);
    CHECK(convex_order(mu, nu));
    CHECK(convex_order(lambda, nu));
  }
}

TEST_CASE("meet is the atom-wise minimum") {
  const auto lambda = example_lambda();
  CHECK(meet(lambda, example_mu(0.4)).mass_at(0.0) == doctest::Approx(0.4));
  CHECK(meet(lambda, example_mu(0.6)).mass_at(0.0) == doctest::Approx(0.5));
  CHECK(meet(lambda, lambda) == lambda);

  for (std::uint64_t seed = 3; seed < 13; ++seed) {
    auto [a, b] = random_convex_pair(seed, 4, 2.0);
    const auto m = meet(a, b);
    CHECK(m.total() <= std::min(a.total(), b.total()) + 1e-15);
    CHECK(meet(a, b) == meet(b, a));
    CHECK(meet(m, m) == m);
  }
}

TEST_CASE("meet can be the zero measure") {
  const auto a = DiscreteMeasure::point_mass(0.0);
  const auto b = DiscreteMeasure::point_mass(1.0);
  const auto m = meet(a, b);
  CHECK(m.empty());
  CHECK(m.total() == 0.0);
}

TEST_CASE("random_convex_pair contract") {
  const auto p1 = random_convex_pair(42, 5, 2.0);
  const auto p2 = random_convex_pair(42, 5, 2.0);
  CHECK(p1.first == p2.first);
  CHECK(p1.second == p2.second);

  // Identity kernel keeps lambda = mu.
  const auto id = random_convex_pair(9, 1, 2.0, /*keep_prob=*/1.0);
  CHECK(id.first == id.second);

  CHECK_THROWS_AS(random_convex_pair(1, 0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(random_convex_pair(1, 2, 0.0), std::invalid_argument);
}

TEST_CASE("measure construction rules") {
  CHECK_THROWS_AS(DiscreteMeasure({{0.0, -0.1}}), std::invalid_argument);
  // Zero atoms are normalized away, duplicates merged.
  const DiscreteMeasure m({{1.0, 0.25}, {0.0, 0.0}, {1.0, 0.25}, {-1.0, 0.5}});
  CHECK(m.size() == 2);
  CHECK(m.mass_at(1.0) == 0.5);
}

TEST_CASE("measure json round trip and strict parsing") {
  const auto mu = example_mu(0.6);
  const nlohmann::json j = mu;
  CHECK(j.at("atoms").size() == 3);
  CHECK(j["atoms"][0]["x"] == -2.0);
  const auto back = j.get<DiscreteMeasure>();
  CHECK(back == mu);

  using nlohmann::json;
  CHECK_THROWS(json::parse(R"({"atoms":[{"x":0,"p":0.5},{"x":0,"p":0.5}]})")
                   .get<DiscreteMeasure>());
  CHECK_THROWS(json::parse(R"({"atoms":[{"x":0,"p":-0.5}]})").get<DiscreteMeasure>());
  CHECK_THROWS(json::parse(R"({"atoms":[{"x":0,"p":1.5}]})").get<DiscreteMeasure>());
  CHECK_THROWS(json::parse(R"({"atoms":[],"extra":1})").get<DiscreteMeasure>());
  CHECK_THROWS(json::parse(R"({"atoms":[{"x":0,"p":0.5,"q":1}]})")
                   .get<DiscreteMeasure>());
}

TEST_CASE("subtract and tv_distance") {
  const auto mu = example_mu(0.6);
  const auto nu = meet(example_lambda(), mu);
  const auto resid = subtract(mu, nu);
  CHECK(resid.mass_at(0.0) == doctest::Approx(0.1));
  CHECK(resid.total() == doctest::Approx(0.5));
  CHECK(tv_distance(mu, mu) == 0.0);
  CHECK(tv_distance(DiscreteMeasure::point_mass(0.0), DiscreteMeasure::point_mass(1.0)) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(subtract(nu, mu), std::invalid_argument);
}

TEST_CASE("mirrored measure") {
  const auto mu = example_mu(0.3);
  const auto mm = mirrored(mu);
  CHECK(mm == mu);  // the family is symmetric
  const DiscreteMeasure skew({{-1.0, 0.75}, {3.0, 0.25}});
  CHECK(mirrored(skew).mass_at(1.0) == 0.75);
  CHECK(mirrored(mirrored(skew)) == skew);
}
