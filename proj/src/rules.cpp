#include "sep/rules.hpp"

#include <cmath>
#include <stdexcept>

#include "sep/numeric.hpp"

namespace sep {

std::string rule_name(const StoppingRule& rule) {
  return std::visit(
      [](const auto& r) -> std::string {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PerkinsRule>) return "perkins";
        if constexpr (std::is_same_v<T, AzemaYorRule>) return "azema_yor";
        if constexpr (std::is_same_v<T, HobsonPedersenRule>) return "hobson_pedersen";
        if constexpr (std::is_same_v<T, RootRule>) return "root";
        if constexpr (std::is_same_v<T, RostRule>) return "rost";
      },
      rule);
}

namespace {

bool perkins_should_stop(const PerkinsRule& rule, const ExtremaState& s) {
  // Coordinates within the engine's grid tolerance are the same critical
  // level, so the strict tests carry a 1e-12 guard band.
  switch (s.event) {
    case Event::NewMax: {
      if (rule.barrier.h_line_at(s.max) != nullptr) return true;  // tail
      if (const VLine* v = rule.barrier.v_line_at(s.max))
        return s.min > v->depth + 1e-12;
      return false;
    }
    case Event::NewMin: {
      if (const HLine* h = rule.barrier.h_line_at(s.min))
        return s.max < h->right_end - 1e-12;
      return false;
    }
    default:
      return false;
  }
}

}  // namespace

bool should_stop(const StoppingRule& rule, const ExtremaState& state,
                 double time_or_aux) {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PerkinsRule>) {
          return perkins_should_stop(r, state);
        } else if constexpr (std::is_same_v<T, AzemaYorRule>) {
          return state.pos <= r.boundary(state.max);
        } else if constexpr (std::is_same_v<T, HobsonPedersenRule>) {
          return state.pos <= r.g(state.max) || state.max >= time_or_aux;
        } else if constexpr (std::is_same_v<T, RootRule>) {
          return r.barrier.in_region(time_or_aux, state.pos);
        } else {
          return r.barrier.in_region(time_or_aux, state.pos);
        }
      },
      rule);
}

StepFunction azema_yor_boundary(const DiscreteMeasure& mu) {
  if (!mu.is_probability())
    throw std::invalid_argument("azema_yor_boundary: mu must be a probability measure");
  if (std::abs(mu.mean()) > 1e-12)
    throw std::invalid_argument("azema_yor_boundary: mu must be centered");
  // psi(y_i) = barycenter of mu on [y_i, inf), strictly increasing in i. The
  // full-measure barycenter is the mean, which is 0 exactly for the centered
  // measures this constructor accepts; pinning it avoids a rounding-level
  // gap at a start sitting on the mean.
  const auto& atoms = mu.atoms();
  std::vector<std::pair<double, double>> breakpoints;
  double tail_mass = 0.0;
  double tail_mean = 0.0;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    tail_mass += it->p;
    tail_mean += it->p * it->x;
    const bool full_tail = std::next(it) == atoms.rend();
    breakpoints.push_back({full_tail ? 0.0 : tail_mean / tail_mass, it->x});
  }
  return StepFunction(std::move(breakpoints), -kInf);
}

std::vector<double> rule_coordinates(const StoppingRule& rule) {
  std::vector<double> out;
  std::visit(
      [&out](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PerkinsRule>) {
          out = r.barrier.coordinates();
          const auto s = r.atom_stop.support();
          out.insert(out.end(), s.begin(), s.end());
        } else if constexpr (std::is_same_v<T, AzemaYorRule>) {
          for (const auto& [at, value] : r.boundary.breakpoints()) {
            out.push_back(at);
            out.push_back(value);
          }
        } else if constexpr (std::is_same_v<T, HobsonPedersenRule>) {
          for (const auto& [at, value] : r.g.breakpoints()) {
            out.push_back(at);
            out.push_back(value);
          }
          const auto s = r.G_law.support();
          out.insert(out.end(), s.begin(), s.end());
        } else if constexpr (std::is_same_v<T, RootRule>) {
          out = r.barrier.levels();
        } else {
          out = r.barrier.levels();
          const auto s = r.atom_stop.support();
          out.insert(out.end(), s.begin(), s.end());
        }
      },
      rule);
  return out;
}

void to_json(nlohmann::json& j, const StepFunction& f) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [at, value] : f.breakpoints())
    pts.push_back({{"at", at}, {"value", value}});
  j = nlohmann::json{{"breakpoints", std::move(pts)}};
}

void from_json(const nlohmann::json& j, StepFunction& f) {
  for (const auto& [key, _] : j.items()) {
    if (key != "breakpoints")
      throw std::invalid_argument("step function: unknown key '" + key + "'");
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& jp : j.at("breakpoints")) {
    for (const auto& [key, _] : jp.items()) {
      if (key != "at" && key != "value")
        throw std::invalid_argument("step function: unknown breakpoint key '" + key + "'");
    }
    pts.push_back({jp.at("at").get<double>(), jp.at("value").get<double>()});
  }
  f = StepFunction(std::move(pts), -kInf);
}

void to_json(nlohmann::json& j, const StoppingRule& rule) {
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, PerkinsRule>) {
          j = nlohmann::json{{"variant", "perkins"},
                             {"barrier", r.barrier},
                             {"atom_stop", r.atom_stop}};
        } else if constexpr (std::is_same_v<T, AzemaYorRule>) {
          j = nlohmann::json{{"variant", "azema_yor"}, {"boundary", r.boundary}};
        } else if constexpr (std::is_same_v<T, HobsonPedersenRule>) {
          j = nlohmann::json{{"variant", "hobson_pedersen"}, {"G", r.G_law}, {"g", r.g}};
        } else if constexpr (std::is_same_v<T, RootRule>) {
          j = nlohmann::json{{"variant", "root"}, {"barrier", r.barrier}};
        } else {
          j = nlohmann::json{{"variant", "rost"},
                             {"barrier", r.barrier},
                             {"atom_stop", r.atom_stop}};
        }
      },
      rule);
}

void from_json(const nlohmann::json& j, StoppingRule& rule) {
  const std::string variant = j.at("variant").get<std::string>();
  auto expect_keys = [&j](std::initializer_list<const char*> keys) {
    for (const auto& [key, _] : j.items()) {
      bool ok = false;
      for (const char* k : keys)
        if (key == k) ok = true;
      if (!ok) throw std::invalid_argument("rule: unknown key '" + key + "'");
    }
  };
  if (variant == "perkins") {
    expect_keys({"variant", "barrier", "atom_stop"});
    rule = PerkinsRule{j.at("barrier").get<VhBarrier>(),
                       j.at("atom_stop").get<DiscreteMeasure>()};
  } else if (variant == "azema_yor") {
    expect_keys({"variant", "boundary"});
    rule = AzemaYorRule{j.at("boundary").get<StepFunction>()};
  } else if (variant == "hobson_pedersen") {
    expect_keys({"variant", "G", "g"});
    rule = HobsonPedersenRule{j.at("G").get<DiscreteMeasure>(),
                              j.at("g").get<StepFunction>()};
  } else if (variant == "root") {
    expect_keys({"variant", "barrier"});
    auto b = j.at("barrier").get<TimeSpaceBarrier>();
    if (b.kind() != TimeSpaceKind::RootBarrier)
      throw std::invalid_argument("rule: root rule needs a root barrier");
    rule = RootRule{std::move(b)};
  } else if (variant == "rost") {
    expect_keys({"variant", "barrier", "atom_stop"});
    auto b = j.at("barrier").get<TimeSpaceBarrier>();
    if (b.kind() != TimeSpaceKind::InverseBarrier)
      throw std::invalid_argument("rule: rost rule needs an inverse barrier");
    rule = RostRule{std::move(b), j.at("atom_stop").get<DiscreteMeasure>()};
  } else {
    throw std::invalid_argument("rule: unknown variant '" + variant + "'");
  }
}

}  // namespace sep
