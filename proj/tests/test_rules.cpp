#include <doctest.h>

#include <cmath>

#include "sep/engine.hpp"
#include "sep/rules.hpp"

using namespace sep;

TEST_CASE("should_stop per variant") {
  // Azema-Yor: closed rule, pos equal to the boundary stops.
  const AzemaYorRule ay{StepFunction({{1.0, 0.0}})};
  CHECK(should_stop(StoppingRule{ay}, {0.0, 1.0, -0.5, Event::Interior}));
  CHECK_FALSE(should_stop(StoppingRule{ay}, {0.5, 1.0, -0.5, Event::Interior}));

  // Hobson-Pedersen: tau_G fires at max >= G, closed; g == -inf never fires.
  const HobsonPedersenRule hp{DiscreteMeasure::point_mass(2.0), StepFunction{}};
  CHECK_FALSE(should_stop(StoppingRule{hp}, {1.9, 1.9, 0.0, Event::NewMax}, 2.0));
  CHECK(should_stop(StoppingRule{hp}, {2.0, 2.0, 0.0, Event::NewMax}, 2.0));

  // Perkins on the empty barrier never stops.
  const PerkinsRule empty{VhBarrier{}, DiscreteMeasure{}};
  CHECK_FALSE(should_stop(StoppingRule{empty}, {1.0, 1.0, -1.0, Event::NewMax}));

  // Perkins event semantics: strict on the recorded opposite extremum.
  const PerkinsRule p{VhBarrier({{1.0, -1.0}}, {{-1.0, 1.0}}), DiscreteMeasure{}};
  CHECK(should_stop(StoppingRule{p}, {1.0, 1.0, 0.0, Event::NewMax}));
  CHECK_FALSE(should_stop(StoppingRule{p}, {1.0, 1.0, -1.0, Event::NewMax}));
  CHECK(should_stop(StoppingRule{p}, {-1.0, 0.0, -1.0, Event::NewMin}));
  CHECK_FALSE(should_stop(StoppingRule{p}, {-1.0, 1.0, -1.0, Event::NewMin}));
  CHECK_FALSE(should_stop(StoppingRule{p}, {0.0, 1.0, -1.0, Event::Interior}));

  // Root / Rost test the elapsed time against the level threshold.
  const RootRule root{TimeSpaceBarrier(TimeSpaceKind::RootBarrier, {{0.0, 1.5}})};
  CHECK(should_stop(StoppingRule{root}, {0.0, 0.5, -0.5, Event::Interior}, 2.0));
  CHECK_FALSE(should_stop(StoppingRule{root}, {0.0, 0.5, -0.5, Event::Interior}, 1.0));
  const RostRule rost{TimeSpaceBarrier(TimeSpaceKind::InverseBarrier, {{0.0, 1.5}}),
                      DiscreteMeasure{}};
  CHECK(should_stop(StoppingRule{rost}, {0.0, 0.5, -0.5, Event::Interior}, 1.0));
  CHECK_FALSE(should_stop(StoppingRule{rost}, {0.0, 0.5, -0.5, Event::Interior}, 2.0));
}

TEST_CASE("azema-yor barycenter boundary") {
  // mu = (d(-1) + d(1))/2: psi = 0 below -1, then 1; the rule stops at -1 or
  // at a running maximum of 1.
  const DiscreteMeasure mu({{-1.0, 0.5}, {1.0, 0.5}});
  const StepFunction b = azema_yor_boundary(mu);
  CHECK(b(0.0) == -1.0);
  CHECK(b(0.5) == -1.0);
  CHECK(b(1.0) == 1.0);
  CHECK(b(-0.5) == -kInf);

  const auto law = exact_stopped_law(AzemaYorRule{b}, DiscreteMeasure::point_mass(0.0));
  CHECK(tv_distance(law.endpoint_law(), mu) <= 1e-12);
  CHECK(law.expected_duration == doctest::Approx(1.0).epsilon(1e-12));

  // Degenerate target: immediate stop.
  const auto d0 = DiscreteMeasure::point_mass(0.0);
  const auto law0 = exact_stopped_law(AzemaYorRule{azema_yor_boundary(d0)}, d0);
  CHECK(law0.expected_duration == 0.0);
  CHECK(tv_distance(law0.endpoint_law(), d0) == 0.0);

  CHECK_THROWS_AS(azema_yor_boundary(DiscreteMeasure::point_mass(1.0)),
                  std::invalid_argument);  // not centered
}

TEST_CASE("azema-yor embeds three-atom symmetric targets") {
  const DiscreteMeasure mu({{-2.0, 0.25}, {0.0, 0.5}, {2.0, 0.25}});
  const auto law = exact_stopped_law(AzemaYorRule{azema_yor_boundary(mu)},
                                     DiscreteMeasure::point_mass(0.0));
  CHECK(tv_distance(law.endpoint_law(), mu) <= 1e-9);
  CHECK(law.expected_duration ==
        doctest::Approx(moment(mu, 2)).epsilon(1e-9));
}

TEST_CASE("azema-yor embeds asymmetric centered targets") {
  const DiscreteMeasure mu(
      {{-2.0, 0.2}, {-0.5, 0.4}, {1.0, 2.0 / 7.0}, {2.75, 4.0 / 35.0}});
  REQUIRE(std::abs(mu.mean()) <= 1e-12);
  const auto law = exact_stopped_law(AzemaYorRule{azema_yor_boundary(mu)},
                                     DiscreteMeasure::point_mass(0.0));
  CHECK(tv_distance(law.endpoint_law(), mu) <= 1e-9);
}

TEST_CASE("azema-yor monte carlo matches the exact chain") {
  const auto d0 = DiscreteMeasure::point_mass(0.0);
  const DiscreteMeasure mu({{-2.0, 0.25}, {0.5, 0.5}, {1.0, 0.25}});
  const AzemaYorRule rule{azema_yor_boundary(mu)};
  const auto exact = exact_stopped_law(rule, d0);
  const std::int64_t n = 200000;
  const auto mc = mc_stopped_law(StoppingRule{rule}, d0, n, 8888);
  const auto exact_endpoints = exact.endpoint_law();
  const auto mc_endpoints = mc.endpoint_law();
  for (const auto& atom : exact_endpoints.atoms()) {
    const double se = std::sqrt(atom.p * (1.0 - atom.p) / static_cast<double>(n));
    CHECK(std::abs(mc_endpoints.mass_at(atom.x) - atom.p) <= 3.0 * se);
  }
  CHECK(std::abs(mc.expected_duration - exact.expected_duration) <= 0.02);
  // Max marginals at grid resolution too.
  const auto exact_max = exact.max_law();
  const auto mc_max = mc.max_law();
  for (const auto& atom : exact_max.atoms()) {
    const double se = std::sqrt(atom.p * (1.0 - atom.p) / static_cast<double>(n));
    CHECK(std::abs(mc_max.mass_at(atom.x) - atom.p) <= 3.5 * se);
  }
}

TEST_CASE("hobson-pedersen monte carlo law on a hand-checked instance") {
  // From 0 with g == -1 and G uniform on {1, 2}: conditionally on G the rule
  // is the exit time of (-1, G), so the endpoint law mixes
  // (1/2, 1/2) and (2/3, 0, 1/3) over {-1, 1, 2} and E[tau] = 3/2.
  const HobsonPedersenRule hp{DiscreteMeasure({{1.0, 0.5}, {2.0, 0.5}}),
                              StepFunction({{-10.0, -1.0}})};
  const std::int64_t n = 200000;
  const auto law =
      mc_stopped_law(StoppingRule{hp}, DiscreteMeasure::point_mass(0.0), n, 5151);
  const auto endpoints = law.endpoint_law();
  const struct {
    double x, p;
  } expected[] = {{-1.0, 7.0 / 12.0}, {1.0, 0.25}, {2.0, 1.0 / 6.0}};
  for (const auto& e : expected) {
    const double se = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(n));
    CHECK(std::abs(endpoints.mass_at(e.x) - e.p) <= 3.0 * se);
  }
  CHECK(law.expected_duration == doctest::Approx(1.5).epsilon(0.02));

  // G drawn per path at time 0: the max marginal splits accordingly.
  double max_ge_2 = 0.0;
  for (const auto& a : law.joint)
    if (a.max >= 2.0) max_ge_2 += a.mass;
  CHECK(max_ge_2 == doctest::Approx(1.0 / 6.0).epsilon(0.05));
}

TEST_CASE("rule json round trips") {
  const StoppingRule rules[] = {
      StoppingRule{PerkinsRule{VhBarrier({{1.0, -1.0}}, {{-1.0, 1.0}}),
                               DiscreteMeasure::point_mass(0.0, 0.25)}},
      StoppingRule{AzemaYorRule{StepFunction({{0.0, -1.0}, {1.0, 1.0}})}},
      StoppingRule{HobsonPedersenRule{DiscreteMeasure({{1.0, 0.5}, {2.0, 0.5}}),
                                      StepFunction({{0.0, -3.0}})}},
      StoppingRule{RootRule{TimeSpaceBarrier(TimeSpaceKind::RootBarrier,
                                             {{-1.0, 0.0}, {1.0, 2.0}})}},
      StoppingRule{RostRule{TimeSpaceBarrier(TimeSpaceKind::InverseBarrier,
                                             {{0.0, kInf}}),
                            DiscreteMeasure::point_mass(0.0, 0.5)}},
  };
  for (const auto& rule : rules) {
    const nlohmann::json j = rule;
    CHECK(j.get<StoppingRule>() == rule);
  }
  CHECK_THROWS(nlohmann::json::parse(R"({"variant":"bogus"})").get<StoppingRule>());
  CHECK_THROWS(nlohmann::json::parse(
                   R"({"variant":"azema_yor","boundary":{"breakpoints":[]},"x":1})")
                   .get<StoppingRule>());
}

TEST_CASE("rule names") {
  CHECK(rule_name(StoppingRule{PerkinsRule{}}) == "perkins");
  CHECK(rule_name(StoppingRule{AzemaYorRule{}}) == "azema_yor");
  CHECK(rule_name(StoppingRule{HobsonPedersenRule{}}) == "hobson_pedersen");
}
